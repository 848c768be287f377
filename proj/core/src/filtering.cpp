#include "arise/filtering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "arise/error.hpp"
#include "arise/parallel.hpp"

namespace arise {

void SimilarityParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ContractError("lambda must lie in [0, 1]");
  if (!(coverage_weight >= 0.0)) throw ContractError("coverage weight must be non-negative");
  if (!(agreement_weight >= 0.0)) throw ContractError("agreement weight must be non-negative");
}

double precision(const Rule& rule, const Corpus& validation) {
  const auto fired = firing_docs(rule, validation);
  if (fired.empty()) return 0.0;
  std::size_t hit = 0;
  for (auto i : fired) hit += validation.docs[i].label == rule.label ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(fired.size());
}

double coverage(const Rule& a, const Rule& b, const Corpus& data) {
  if (data.docs.empty()) throw ContractError("coverage over an empty corpus");
  std::size_t n = 0;
  for (const auto& d : data.docs) n += (matches(a, d) || matches(b, d)) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(data.size());
}

double agreement(const Rule& a, const Rule& b, const Corpus& data) {
  std::size_t both = 0;
  for (const auto& d : data.docs) both += (matches(a, d) && matches(b, d)) ? 1 : 0;
  if (both == 0 || a.label != b.label) return 0.0;
  return 1.0;
}

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t popcount_and(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) n += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
  return n;
}

std::size_t popcount_or(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) n += static_cast<std::size_t>(std::popcount(a[w] | b[w]));
  return n;
}

std::size_t popcount(const Bits& a) {
  std::size_t n = 0;
  for (auto w : a) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

}  // namespace

FiringTable::FiringTable(std::span<const Rule> rules, const Corpus& corpus)
    : rows_(rules.size()), label_rows_(rules.size()), labels_(rules.size()), docs_(corpus.size()) {
  const std::size_t words = (docs_ + 63) / 64;
  parallel::for_each_index(rules.size(), [&](std::size_t r) {
    Bits row(words, 0), gold(words, 0);
    for (std::size_t d = 0; d < docs_; ++d) {
      if (!matches(rules[r], corpus.docs[d])) continue;
      row[d / 64] |= std::uint64_t{1} << (d % 64);
      if (corpus.docs[d].label == rules[r].label) gold[d / 64] |= std::uint64_t{1} << (d % 64);
    }
    rows_[r] = std::move(row);
    label_rows_[r] = std::move(gold);
    labels_[r] = rules[r].label;
  });
}

bool FiringTable::fires(std::size_t rule, std::size_t doc) const {
  return (rows_.at(rule).at(doc / 64) >> (doc % 64)) & 1U;
}

double FiringTable::precision(std::size_t i) const {
  const std::size_t fired = popcount(rows_[i]);
  if (fired == 0) return 0.0;
  return static_cast<double>(popcount(label_rows_[i])) / static_cast<double>(fired);
}

double FiringTable::coverage(std::size_t i, std::size_t j) const {
  if (docs_ == 0) throw ContractError("coverage over an empty corpus");
  return static_cast<double>(popcount_or(rows_[i], rows_[j])) / static_cast<double>(docs_);
}

double FiringTable::agreement(std::size_t i, std::size_t j) const {
  if (labels_[i] != labels_[j]) return 0.0;
  return popcount_and(rows_[i], rows_[j]) > 0 ? 1.0 : 0.0;
}

SimilarityMatrix similarity_matrix(std::span<const Rule> rules, const Corpus& validation,
                                   const SimilarityParams& params) {
  params.validate();
  const std::size_t n = rules.size();
  SimilarityMatrix s = SimilarityMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (n == 0) return s;
  const FiringTable table(rules, validation);
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = table.precision(i);
  const bool has_docs = table.docs() > 0;
  parallel::for_each_index(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double beta = has_docs ? table.coverage(i, j) : 0.0;
      const double v = alpha[i] + alpha[j] + params.coverage_weight * beta +
                       params.agreement_weight * table.agreement(i, j);
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  });
  s.triangularView<Eigen::StrictlyLower>() = s.transpose().triangularView<Eigen::StrictlyLower>();
  return s;
}

double gc_value(std::span<const std::size_t> selected, const SimilarityMatrix& sim, double lambda) {
  double represent = 0.0;
  double redundancy = 0.0;
  for (auto j : selected) {
    represent += sim.col(static_cast<Eigen::Index>(j)).sum();
    for (auto i : selected) redundancy += sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return represent - lambda * redundancy;
}

GreedyResult greedy_maximize(const SimilarityMatrix& sim, double lambda, std::size_t budget,
                             std::span<const std::size_t> warm) {
  const auto n = static_cast<std::size_t>(sim.rows());
  GreedyResult out;
  std::vector<char> in(n, 0);
  // cross[r] = sum_{j in S} s_rj
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(sim.rows());
  for (auto w : warm) {
    if (w >= n) throw ContractError("warm-start index out of range");
    if (in[w]) continue;
    in[w] = 1;
    out.selected.push_back(w);
    cross += sim.col(static_cast<Eigen::Index>(w));
  }
  const Eigen::VectorXd colsum = sim.colwise().sum().transpose();

  for (std::size_t added = 0; added < budget; ++added) {
    std::size_t best = n;
    double best_gain = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (in[r]) continue;
      const auto ri = static_cast<Eigen::Index>(r);
      const double gain = colsum(ri) - lambda * (2.0 * cross(ri) + sim(ri, ri));
      if (best == n || gain > best_gain) {
        best = r;
        best_gain = gain;
      }
    }
    if (best == n || !(best_gain > 0.0)) break;
    in[best] = 1;
    out.selected.push_back(best);
    out.steps.push_back({best, best_gain});
    cross += sim.col(static_cast<Eigen::Index>(best));
  }
  return out;
}

Selection greedy_select(std::span<const Rule> candidates, std::span<const Rule> warm_start,
                        const Corpus& validation, const SimilarityParams& params) {
  params.validate();
  std::map<std::string, Rule> ground;
  for (const auto& r : warm_start) ground.emplace(r.key(), r);
  for (const auto& r : candidates) ground.emplace(r.key(), r);
  std::vector<Rule> rules;
  rules.reserve(ground.size());
  for (auto& [key, r] : ground) rules.push_back(std::move(r));

  std::vector<std::size_t> warm;
  for (const auto& r : warm_start) {
    const auto it = std::lower_bound(rules.begin(), rules.end(), r, RuleKeyLess{});
    const auto idx = static_cast<std::size_t>(it - rules.begin());
    if (std::find(warm.begin(), warm.end(), idx) == warm.end()) warm.push_back(idx);
  }

  const SimilarityMatrix sim = similarity_matrix(rules, validation, params);
  const GreedyResult g = greedy_maximize(sim, params.lambda, params.budget, warm);

  Selection out;
  for (auto i : g.selected) out.rules.push_back(rules[i]);
  for (std::size_t s = 0; s < g.steps.size(); ++s) {
    out.trace.push_back({s + 1, rules[g.steps[s].index].key(), g.steps[s].gain});
  }
  return out;
}

}  // namespace arise
