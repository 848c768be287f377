#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arise/corpus.hpp"
#include "arise/rule.hpp"

namespace arise {

/// Rule votes per document. Cell (i, j) is 0 when rule j abstains on doc i
/// and rule_labels[j] + 1 when it fires, so a rule only ever votes its own
/// label.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::vector<std::size_t> rule_labels, std::size_t num_classes);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return rule_labels_.size(); }
  std::size_t num_classes() const noexcept { return classes_; }
  std::span<const std::size_t> rule_labels() const noexcept { return rule_labels_; }
  std::vector<std::string>& rule_keys() noexcept { return rule_keys_; }
  const std::vector<std::string>& rule_keys() const noexcept { return rule_keys_; }

  std::uint32_t at(std::size_t i, std::size_t j) const { return cells_.at(i * cols() + j); }
  bool fired(std::size_t i, std::size_t j) const { return at(i, j) != 0; }
  void set_fired(std::size_t i, std::size_t j, bool fired);
  std::span<const std::uint32_t> row(std::size_t i) const;
  bool all_abstain(std::size_t i) const;

 private:
  std::size_t rows_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> rule_labels_;
  std::vector<std::string> rule_keys_;
  std::vector<std::uint32_t> cells_;
};

/// Columns follow the canonical key order of `rules`.
LabelMatrix fire_matrix(std::span<const Rule> rules, const Corpus& corpus);
LabelMatrix fire_matrix(std::span<const Rule> rules, std::span<const LabeledDoc> docs, std::size_t num_classes);

/// theta: one row per rule, one column per class.
struct LabelModelParams {
  Eigen::MatrixXd theta;

  static LabelModelParams zeros(std::size_t rules, std::size_t classes);
  std::size_t rules() const noexcept { return static_cast<std::size_t>(theta.rows()); }
  std::size_t classes() const noexcept { return static_cast<std::size_t>(theta.cols()); }
};

/// log Z = log sum_y prod_j (1 + exp(theta_jy)).
double log_partition(const LabelModelParams& params);

/// log P(l, y) = sum_{j fired} theta_jy - log Z.
double log_joint_prob(std::span<const std::uint32_t> row, std::size_t y, const LabelModelParams& params);
double joint_prob(std::span<const std::uint32_t> row, std::size_t y, const LabelModelParams& params);

struct Posterior {
  std::vector<double> probs;
  bool no_evidence = false;

  /// Argmax class, or nothing when the maximum is shared.
  std::optional<std::size_t> unique_argmax() const;
};

/// softmax_y sum_{j fired} theta_jy; all-abstain rows give the uniform
/// distribution flagged as no evidence.
Posterior posterior(std::span<const std::uint32_t> row, const LabelModelParams& params);

/// -sum_i log P(l_i, y_i).
double label_model_nll(const LabelMatrix& matrix, std::span<const std::size_t> gold, const LabelModelParams& params);
Eigen::MatrixXd label_model_gradient(const LabelMatrix& matrix, std::span<const std::size_t> gold,
                                     const LabelModelParams& params);

struct TrainConfig {
  double lr = 0.05;
  std::size_t epochs = 500;
  double tol = 1e-7;
};

struct TrainReport {
  std::vector<double> losses;  // one per accepted step, starting at the initial loss
  std::size_t epochs_run = 0;
  bool converged = false;
};

/// Full-batch gradient descent from theta = 0. A step that raises the loss
/// is rejected and the learning rate halved; accepted steps grow it by 20%.
/// Throws TrainingError on an empty matrix, zero rules, or misaligned gold.
LabelModelParams train_label_model(const LabelMatrix& matrix, std::span<const std::size_t> gold,
                                   const TrainConfig& config = {}, TrainReport* report = nullptr);

/// Hashed bag-of-words softmax classifier standing in for a neural feature model.
struct FeatureClassifierParams {
  std::size_t hash_dim = 65536;
  Eigen::MatrixXd weights;  // hash_dim x classes
  Eigen::VectorXd bias;     // classes

  static FeatureClassifierParams zeros(std::size_t hash_dim, std::size_t classes);
  std::size_t classes() const noexcept { return static_cast<std::size_t>(bias.size()); }
};

/// Sparse hashed token counts (bucket, count), sorted by bucket.
using HashedFeatures = std::vector<std::pair<std::size_t, double>>;

HashedFeatures hash_features(const LabeledDoc& doc, std::size_t hash_dim);

Eigen::VectorXd classifier_logits(const HashedFeatures& x, const FeatureClassifierParams& params);
std::vector<double> feature_classify(const LabeledDoc& doc, const FeatureClassifierParams& params);

struct JointConfig {
  TrainConfig train;
  std::size_t hash_dim = 65536;
  double ce_weight = 1.0;
  double ll_weight = 1.0;
  double kl_weight = 1.0;
};

struct JointLoss {
  double ce = 0.0;
  double nll = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

struct JointGradient {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Weighted CE(p_phi, y) + NLL(theta) + KL(p_phi || q_theta) summed over
/// documents; all-abstain rows contribute no KL.
JointLoss joint_loss(std::span<const HashedFeatures> x, const LabelMatrix& matrix, std::span<const std::size_t> gold,
                     const LabelModelParams& theta, const FeatureClassifierParams& phi, const JointConfig& config,
                     JointGradient* gradient = nullptr);

struct JointResult {
  LabelModelParams theta;
  FeatureClassifierParams phi;
  std::vector<std::pair<std::size_t, JointLoss>> log;  // (epoch, loss) per accepted step
};

/// Simultaneous full-batch descent on (theta, phi) from zero. Throws
/// TrainingError when the loss stops being finite, naming the last finite value.
JointResult joint_train(const Corpus& corpus, const LabelMatrix& matrix, const JointConfig& config = {});

}  // namespace arise
