#include "arise/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "arise/error.hpp"
#include "arise/features.hpp"
#include "arise/parallel.hpp"

namespace arise {

double pmi_from_counts(std::size_t docs, std::size_t docs_with_label, std::size_t fired,
                       std::size_t fired_with_label) {
  if (fired == 0) throw ScoringError("PMI undefined: rule fires on no document");
  if (fired_with_label == 0) return kNegInf;
  if (docs_with_label == 0) throw ScoringError("PMI undefined: label has no documents");
  const double num = static_cast<double>(docs) * static_cast<double>(fired_with_label);
  const double den = static_cast<double>(fired) * static_cast<double>(docs_with_label);
  return std::log(num / den);
}

namespace {

std::vector<std::size_t> label_sizes(const Corpus& corpus) {
  std::vector<std::size_t> sizes(corpus.num_labels(), 0);
  for (const auto& d : corpus.docs) ++sizes.at(d.label);
  return sizes;
}

PmiVector pmi_vector_with(std::span<const std::size_t> fired, const Corpus& corpus,
                          const std::vector<std::size_t>& sizes) {
  if (fired.empty()) throw ScoringError("PMI undefined: rule fires on no document");
  std::vector<std::size_t> per_label(corpus.num_labels(), 0);
  for (auto i : fired) ++per_label[corpus.docs[i].label];
  PmiVector v;
  v.scores.resize(corpus.num_labels(), kNegInf);
  for (std::size_t y = 0; y < corpus.num_labels(); ++y) {
    v.scores[y] = pmi_from_counts(corpus.size(), sizes[y], fired.size(), per_label[y]);
    if (v.scores[y] > v.lpmi) {
      v.lpmi = v.scores[y];
      v.label = y;
    }
  }
  return v;
}

void apply(Rule& rule, const PmiVector& v) {
  rule.label = v.label;
  rule.lpmi = v.lpmi;
  rule.pmi = v.scores;
}

}  // namespace

double pmi(const Rule& rule, std::size_t label, const Corpus& corpus) {
  if (label >= corpus.num_labels()) throw ContractError("label index out of range");
  const auto fired = firing_docs(rule, corpus);
  std::size_t with_label = 0;
  for (auto i : fired) with_label += corpus.docs[i].label == label ? 1 : 0;
  const auto sizes = label_sizes(corpus);
  return pmi_from_counts(corpus.size(), sizes[label], fired.size(), with_label);
}

PmiVector pmi_vector(std::span<const std::size_t> fired, const Corpus& corpus) {
  return pmi_vector_with(fired, corpus, label_sizes(corpus));
}

PmiVector label_rule(Rule& rule, const Corpus& corpus) {
  const auto v = pmi_vector(firing_docs(rule, corpus), corpus);
  apply(rule, v);
  return v;
}

std::vector<Candidate> induce_candidates(const Lattice& lattice, const Corpus& corpus,
                                         const InductionOptions& options) {
  const auto sizes = label_sizes(corpus);
  auto score = [&](Rule& r) -> bool {
    const auto fired = firing_docs(r, corpus);
    if (fired.empty()) return false;
    apply(r, pmi_vector_with(fired, corpus, sizes));
    return true;
  };

  std::vector<Candidate> elements;
  std::map<std::string, std::size_t> present;
  {
    std::vector<Rule> features(lattice.elements().begin(), lattice.elements().end());
    std::vector<char> ok(features.size(), 0);
    parallel::for_each_index(features.size(), [&](std::size_t i) { ok[i] = score(features[i]) ? 1 : 0; });
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!ok[i]) continue;
      present.emplace(features[i].key(), elements.size());
      elements.push_back({std::move(features[i]), std::nullopt});
    }
  }

  // key -> scored generalisation (nullopt when it fires nowhere)
  std::map<std::string, std::optional<Rule>> scored;
  std::size_t frontier = 0;
  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    const std::size_t n = elements.size();
    std::map<std::string, Candidate> admitted;
    for (std::size_t j = 0; j < n; ++j) {
      if (j < frontier) continue;
      for (std::size_t i = 0; i < j; ++i) {
        const Rule& a = elements[i].rule;
        const Rule& b = elements[j].rule;
        Rule g = lgg(a, b, lattice.lexicon(), lattice.group_cap());
        if (g.is_supremum() || present.count(g.key()) || admitted.count(g.key())) continue;
        auto it = scored.find(g.key());
        if (it == scored.end()) {
          std::string key = g.key();
          std::optional<Rule> value;
          if (score(g)) value = std::move(g);
          it = scored.emplace(std::move(key), std::move(value)).first;
        }
        if (!it->second) continue;
        const Rule& s = *it->second;
        if (s.lpmi > a.lpmi && s.lpmi > b.lpmi) {
          admitted.emplace(s.key(), Candidate{s, std::make_pair(a.key(), b.key())});
        }
      }
    }
    if (admitted.empty()) break;
    frontier = n;
    for (auto& [key, c] : admitted) {
      present.emplace(key, elements.size());
      elements.push_back(std::move(c));
    }
  }

  std::sort(elements.begin(), elements.end(),
            [](const Candidate& x, const Candidate& y) { return x.rule.key() < y.rule.key(); });
  return elements;
}

std::vector<Rule> induce_rule_candidates(const Corpus& corpus, const RuleInductionConfig& config) {
  const Lexicon lexicon = Lexicon::from_corpus(corpus);
  std::vector<std::string> roles = corpus.roles;
  if (roles.empty()) roles.emplace_back();
  std::vector<Rule> out;
  for (const auto& role : roles) {
    const auto features = extract_features(corpus, role, config.max_nodes);
    for (const auto& [rel, part] : partition_by_core_relation(features)) {
      if (part.empty()) continue;
      const Lattice lattice = build_lattice(rel, part, lexicon, config.group_cap, role);
      for (auto& c : induce_candidates(lattice, corpus, config.induction)) out.push_back(std::move(c.rule));
    }
  }
  sort_and_dedup(out);
  return out;
}

namespace {

bool fires_in_role(const Rule& rule, const LabeledDoc& doc, const std::string& role) {
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    if (doc.role_of(i) == role && matches(rule, doc.sentences[i])) return true;
  }
  return false;
}

}  // namespace

bool RulePair::fires(const LabeledDoc& doc) const {
  return fires_in_role(premise, doc, premise_role) && fires_in_role(hypothesis, doc, hypothesis_role);
}

PmiVector joint_pmi(const RulePair& pair, const Corpus& corpus) {
  std::vector<std::size_t> fired;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (pair.fires(corpus.docs[i])) fired.push_back(i);
  }
  return pmi_vector(fired, corpus);
}

std::vector<RulePair> pair_rules(std::span<const Rule> premise_rules, std::span<const Rule> hypothesis_rules,
                                 const Corpus& corpus, std::size_t top_n, const std::string& premise_role,
                                 const std::string& hypothesis_role) {
  auto has = [&](const std::string& r) { return std::find(corpus.roles.begin(), corpus.roles.end(), r) != corpus.roles.end(); };
  if (!has(premise_role) || !has(hypothesis_role)) {
    throw ContractError("pair_rules needs a corpus with '" + premise_role + "' and '" + hypothesis_role + "' roles");
  }
  auto firing_in = [&](const Rule& r, const std::string& role) {
    std::vector<std::size_t> fired;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (fires_in_role(r, corpus.docs[i], role)) fired.push_back(i);
    }
    return fired;
  };
  std::vector<std::vector<std::size_t>> pf, hf;
  for (const auto& r : premise_rules) pf.push_back(firing_in(r, premise_role));
  for (const auto& r : hypothesis_rules) hf.push_back(firing_in(r, hypothesis_role));

  const auto sizes = label_sizes(corpus);
  std::vector<RulePair> kept;
  for (std::size_t i = 0; i < premise_rules.size(); ++i) {
    for (std::size_t j = 0; j < hypothesis_rules.size(); ++j) {
      std::vector<std::size_t> joint;
      std::set_intersection(pf[i].begin(), pf[i].end(), hf[j].begin(), hf[j].end(), std::back_inserter(joint));
      if (joint.empty()) continue;
      PmiVector v = pmi_vector_with(joint, corpus, sizes);
      if (!(v.lpmi > premise_rules[i].lpmi && v.lpmi > hypothesis_rules[j].lpmi)) continue;
      kept.push_back({premise_rules[i], hypothesis_rules[j], premise_role, hypothesis_role, std::move(v)});
    }
  }
  std::sort(kept.begin(), kept.end(), [](const RulePair& a, const RulePair& b) {
    if (a.pmi.lpmi != b.pmi.lpmi) return a.pmi.lpmi > b.pmi.lpmi;
    return a.key() < b.key();
  });
  if (kept.size() > top_n) kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(top_n), kept.end());
  return kept;
}

}  // namespace arise
