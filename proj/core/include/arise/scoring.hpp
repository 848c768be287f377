#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arise/corpus.hpp"
#include "arise/lattice.hpp"
#include "arise/rule.hpp"

namespace arise {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-label PMI scores; -inf marks labels the rule never co-occurs with.
struct PmiVector {
  std::vector<double> scores;
  double lpmi = kNegInf;
  std::size_t label = 0;
};

/// ln((|D| * Count(r, D^y)) / (Count(r, D) * |D^y|)) from document counts.
/// Returns -inf when the rule never fires on label y. Throws ScoringError
/// when the rule fires nowhere or the label has no documents.
double pmi_from_counts(std::size_t docs, std::size_t docs_with_label, std::size_t fired,
                       std::size_t fired_with_label);

double pmi(const Rule& rule, std::size_t label, const Corpus& corpus);

/// PMI vector for a firing set (ascending doc indices). Ties in the argmax go
/// to the lowest label index.
PmiVector pmi_vector(std::span<const std::size_t> fired, const Corpus& corpus);

/// Scores the rule on `corpus` and stores label, lpmi and the vector on it.
PmiVector label_rule(Rule& rule, const Corpus& corpus);

struct InductionOptions {
  std::size_t max_rounds = 3;
};

/// A candidate rule and, for induced generalisations, the keys of the pair it
/// was generalised from.
struct Candidate {
  Rule rule;
  std::optional<std::pair<std::string, std::string>> parents;
};

/// Bottom-up pairwise LGG closure over one lattice. Each round generalises
/// every unordered pair of current elements and admits a result only if its
/// L-PMI strictly exceeds both parents' and it is new. Rounds stop at a
/// fixpoint or after `max_rounds`. Returns features and admitted rules,
/// labelled and sorted by key; the supremum is never returned.
std::vector<Candidate> induce_candidates(const Lattice& lattice, const Corpus& corpus,
                                         const InductionOptions& options = {});

struct RuleInductionConfig {
  std::size_t max_nodes = 3;
  std::size_t group_cap = kDefaultGroupCap;
  InductionOptions induction;
};

/// Features -> per-relation lattices -> induced candidates for a whole
/// corpus. Role-tagged corpora get one set of lattices per role.
std::vector<Rule> induce_rule_candidates(const Corpus& corpus, const RuleInductionConfig& config = {});

/// Cross-role conjunction: fires when the premise rule matches a premise
/// sentence and the hypothesis rule matches a hypothesis sentence.
struct RulePair {
  Rule premise;
  Rule hypothesis;
  std::string premise_role = "premise";
  std::string hypothesis_role = "hypothesis";
  PmiVector pmi;

  std::string key() const { return premise.key() + " && " + hypothesis.key(); }
  bool fires(const LabeledDoc& doc) const;
};

/// PMI vector of the pair's joint firing set. Throws ScoringError when the
/// two rules never co-fire.
PmiVector joint_pmi(const RulePair& pair, const Corpus& corpus);

/// Second L-PMI step. Component rules must already be scored (`lpmi` set).
/// Keeps pairs whose joint L-PMI strictly exceeds both components', ordered
/// by joint L-PMI descending then key, truncated to `top_n`. Throws
/// ContractError when the corpus lacks either role.
std::vector<RulePair> pair_rules(std::span<const Rule> premise_rules, std::span<const Rule> hypothesis_rules,
                                 const Corpus& corpus, std::size_t top_n,
                                 const std::string& premise_role = "premise",
                                 const std::string& hypothesis_role = "hypothesis");

}  // namespace arise
