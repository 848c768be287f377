#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "arise/corpus.hpp"
#include "arise/predicate.hpp"
#include "arise/relations.hpp"

namespace arise {

/// One node of a rule tree. `deprel` is the (subtype-free) relation to the
/// parent; empty for the root.
struct RuleNode {
  NodePredicate pred;
  int parent = -1;
  std::string deprel;

  bool operator==(const RuleNode&) const = default;
};

/// A generalised syntactic n-gram: a rooted tree of at most three predicate
/// nodes with exactly one core-relation edge, or the infimum (matches
/// nothing). Nodes are stored in canonical pre-order, so two rules are equal
/// iff their keys are equal.
class Rule {
 public:
  static constexpr std::size_t kMaxNodes = 3;

  /// Validates and canonicalises. Throws ContractError unless the nodes form
  /// a tree of 2..3 nodes with exactly one core edge.
  static Rule from_nodes(std::vector<RuleNode> nodes, std::string role = {});
  /// `* -rel-> *`
  static Rule supremum(CoreRelation rel, std::string role = {});
  /// The empty rule.
  static Rule infimum(CoreRelation rel, std::string role = {});

  std::span<const RuleNode> nodes() const noexcept { return nodes_; }
  std::span<const std::size_t> children(std::size_t node) const { return children_.at(node); }
  std::size_t size() const noexcept { return nodes_.size(); }
  CoreRelation core() const noexcept { return core_; }
  const std::string& role() const noexcept { return role_; }
  bool is_infimum() const noexcept { return infimum_; }
  bool is_supremum() const noexcept;
  /// Index of the dependent end of the core edge (its parent is the head).
  std::size_t core_dependent() const;

  /// Canonical key: `[role|]tree`, e.g. `Word["bark"](nsubj:Word["dogs"])`.
  const std::string& key() const noexcept { return key_; }

  bool same_partition(const Rule& other) const { return core_ == other.core_ && role_ == other.role_; }

  // Assigned by scoring: class index, L-PMI and the full label-PMI vector.
  std::size_t label = 0;
  double lpmi = -std::numeric_limits<double>::infinity();
  std::vector<double> pmi;

 private:
  Rule() = default;
  void finish();

  std::vector<RuleNode> nodes_;
  std::vector<std::vector<std::size_t>> children_;
  CoreRelation core_ = CoreRelation::nsubj;
  std::string role_;
  bool infimum_ = false;
  std::string key_;
};

/// Orders rules by canonical key.
struct RuleKeyLess {
  bool operator()(const Rule& a, const Rule& b) const { return a.key() < b.key(); }
};

void sort_and_dedup(std::vector<Rule>& rules);

/// True iff the tree contains an injective, edge- and relation-preserving
/// image of the rule whose tokens satisfy every node predicate.
bool matches(const Rule& rule, const DepTree& tree);

/// Sentence-level matching over a document, restricted to the rule's role
/// when it has one. The infimum never matches.
bool matches(const Rule& rule, const LabeledDoc& doc);

/// Indices of corpus documents the rule fires on, ascending.
std::vector<std::size_t> firing_docs(const Rule& rule, const Corpus& corpus);

}  // namespace arise
