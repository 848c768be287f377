#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arise/corpus.hpp"
#include "arise/rule.hpp"

namespace arise {

struct SimilarityParams {
  double lambda = 0.5;
  double coverage_weight = 1.0;   // w
  double agreement_weight = 1.0;  // gamma
  std::size_t budget = 50;        // new rules per round

  /// Throws ContractError on lambda outside [0,1] or negative weights.
  void validate() const;
};

using SimilarityMatrix = Eigen::MatrixXd;

/// Fraction of the validation documents a rule fires on whose gold label is
/// the rule's label; 0 when it fires nowhere.
double precision(const Rule& rule, const Corpus& validation);

/// |fires(a) ∪ fires(b)| / |data|. Throws ContractError on empty data.
double coverage(const Rule& a, const Rule& b, const Corpus& data);

/// Among documents where both rules fire, the fraction where their labels
/// agree; 0 when they never co-fire.
double agreement(const Rule& a, const Rule& b, const Corpus& data);

/// Per-rule firing sets over a corpus, stored as bitsets so pairwise
/// statistics stay cheap.
class FiringTable {
 public:
  FiringTable(std::span<const Rule> rules, const Corpus& corpus);

  std::size_t rules() const noexcept { return rows_.size(); }
  std::size_t docs() const noexcept { return docs_; }
  bool fires(std::size_t rule, std::size_t doc) const;

  double precision(std::size_t i) const;
  double coverage(std::size_t i, std::size_t j) const;
  double agreement(std::size_t i, std::size_t j) const;

 private:
  std::vector<std::vector<std::uint64_t>> rows_;
  std::vector<std::vector<std::uint64_t>> label_rows_;  // per rule: docs with gold == rule label
  std::vector<std::size_t> labels_;
  std::size_t docs_ = 0;
};

/// s_ij = alpha_i + alpha_j + w * beta(i,j) + gamma * mu(i,j), diagonal included.
SimilarityMatrix similarity_matrix(std::span<const Rule> rules, const Corpus& validation,
                                   const SimilarityParams& params);

/// f_GC(S) = sum_{i in all, j in S} s_ij - lambda * sum_{i,j in S} s_ij.
double gc_value(std::span<const std::size_t> selected, const SimilarityMatrix& sim, double lambda);

struct GreedyStep {
  std::size_t index;
  double gain;
};

struct GreedyResult {
  std::vector<std::size_t> selected;  // warm start first, then additions in order
  std::vector<GreedyStep> steps;
};

/// Greedy graph-cut maximisation over indices of `sim`. Starts from `warm`,
/// adds the argmax-gain element (lowest index on ties) until `budget` new
/// elements are added or no gain is positive.
GreedyResult greedy_maximize(const SimilarityMatrix& sim, double lambda, std::size_t budget,
                             std::span<const std::size_t> warm = {});

struct SelectionStep {
  std::size_t step;
  std::string rule_key;
  double gain;
};

struct Selection {
  std::vector<Rule> rules;  // warm start first, then additions in order
  std::vector<SelectionStep> trace;
};

/// Greedy rule selection. The ground set is candidates ∪ warm_start,
/// deduplicated by key and sorted canonically; warm-start rules keep their
/// stored labels.
Selection greedy_select(std::span<const Rule> candidates, std::span<const Rule> warm_start,
                        const Corpus& validation, const SimilarityParams& params);

}  // namespace arise
