#include "arise/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arise/error.hpp"
#include "arise/parallel.hpp"

namespace arise {

LabelMatrix::LabelMatrix(std::size_t rows, std::vector<std::size_t> rule_labels, std::size_t num_classes)
    : rows_(rows), classes_(num_classes), rule_labels_(std::move(rule_labels)), cells_(rows * rule_labels_.size(), 0) {
  for (auto l : rule_labels_) {
    if (l >= classes_) throw ContractError("rule label out of range");
  }
}

void LabelMatrix::set_fired(std::size_t i, std::size_t j, bool fired) {
  if (i >= rows_ || j >= cols()) throw ContractError("label matrix index out of range");
  cells_[i * cols() + j] = fired ? static_cast<std::uint32_t>(rule_labels_[j] + 1) : 0;
}

std::span<const std::uint32_t> LabelMatrix::row(std::size_t i) const {
  if (i >= rows_) throw ContractError("label matrix row out of range");
  return std::span<const std::uint32_t>(cells_).subspan(i * cols(), cols());
}

bool LabelMatrix::all_abstain(std::size_t i) const {
  const auto r = row(i);
  return std::all_of(r.begin(), r.end(), [](std::uint32_t v) { return v == 0; });
}

LabelMatrix fire_matrix(std::span<const Rule> rules, std::span<const LabeledDoc> docs, std::size_t num_classes) {
  std::vector<const Rule*> ordered;
  for (const auto& r : rules) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Rule* a, const Rule* b) { return a->key() < b->key(); });
  std::vector<std::size_t> labels;
  std::vector<std::string> keys;
  for (const auto* r : ordered) {
    labels.push_back(r->label);
    keys.push_back(r->key());
  }
  LabelMatrix m(docs.size(), std::move(labels), num_classes);
  m.rule_keys() = std::move(keys);
  parallel::for_each_index(docs.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < ordered.size(); ++j) {
      if (matches(*ordered[j], docs[i])) m.set_fired(i, j, true);
    }
  });
  return m;
}

LabelMatrix fire_matrix(std::span<const Rule> rules, const Corpus& corpus) {
  return fire_matrix(rules, corpus.docs, corpus.num_labels());
}

LabelModelParams LabelModelParams::zeros(std::size_t rules, std::size_t classes) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rules), static_cast<Eigen::Index>(classes))};
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (auto x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// log prod_j (1 + exp(theta_jy)) per class.
std::vector<double> class_log_mass(const LabelModelParams& p) {
  std::vector<double> out(p.classes(), 0.0);
  for (std::size_t y = 0; y < p.classes(); ++y) {
    for (std::size_t j = 0; j < p.rules(); ++j) out[y] += softplus(p.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y)));
  }
  return out;
}

void check_row(std::span<const std::uint32_t> row, const LabelModelParams& p) {
  if (row.size() != p.rules()) throw ContractError("firing row length does not match theta");
}

double fired_sum(std::span<const std::uint32_t> row, std::size_t y, const LabelModelParams& p) {
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] != 0) s += p.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y));
  }
  return s;
}

void check_gold(const LabelMatrix& m, std::span<const std::size_t> gold, const LabelModelParams& p) {
  if (gold.size() != m.rows()) throw ContractError("gold labels are not aligned with the label matrix");
  if (m.cols() != p.rules()) throw ContractError("label matrix width does not match theta");
  for (auto y : gold) {
    if (y >= p.classes()) throw ContractError("gold label out of range");
  }
}

}  // namespace

double log_partition(const LabelModelParams& params) {
  const auto mass = class_log_mass(params);
  return logsumexp(mass);
}

double log_joint_prob(std::span<const std::uint32_t> row, std::size_t y, const LabelModelParams& params) {
  check_row(row, params);
  if (y >= params.classes()) throw ContractError("class out of range");
  return fired_sum(row, y, params) - log_partition(params);
}

double joint_prob(std::span<const std::uint32_t> row, std::size_t y, const LabelModelParams& params) {
  return std::exp(log_joint_prob(row, y, params));
}

std::optional<std::size_t> Posterior::unique_argmax() const {
  if (probs.empty()) return std::nullopt;
  const auto it = std::max_element(probs.begin(), probs.end());
  if (std::count(probs.begin(), probs.end(), *it) > 1) return std::nullopt;
  return static_cast<std::size_t>(it - probs.begin());
}

Posterior posterior(std::span<const std::uint32_t> row, const LabelModelParams& params) {
  check_row(row, params);
  const std::size_t k = params.classes();
  Posterior out;
  out.no_evidence = std::all_of(row.begin(), row.end(), [](std::uint32_t v) { return v == 0; });
  if (out.no_evidence) {
    out.probs.assign(k, 1.0 / static_cast<double>(k));
    return out;
  }
  std::vector<double> u(k);
  for (std::size_t y = 0; y < k; ++y) u[y] = fired_sum(row, y, params);
  const double lse = logsumexp(u);
  out.probs.resize(k);
  for (std::size_t y = 0; y < k; ++y) out.probs[y] = std::exp(u[y] - lse);
  return out;
}

double label_model_nll(const LabelMatrix& matrix, std::span<const std::size_t> gold, const LabelModelParams& params) {
  check_gold(matrix, gold, params);
  const double log_z = log_partition(params);
  double nll = 0.0;
  for (std::size_t i = 0; i < matrix.rows(); ++i) nll += log_z - fired_sum(matrix.row(i), gold[i], params);
  return nll;
}

Eigen::MatrixXd label_model_gradient(const LabelMatrix& matrix, std::span<const std::size_t> gold,
                                     const LabelModelParams& params) {
  check_gold(matrix, gold, params);
  const auto m = static_cast<Eigen::Index>(params.rules());
  const auto k = static_cast<Eigen::Index>(params.classes());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, k);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto row = matrix.row(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (row[static_cast<std::size_t>(j)] != 0) g(j, static_cast<Eigen::Index>(gold[i])) -= 1.0;
    }
  }
  const auto mass = class_log_mass(params);
  const double log_z = logsumexp(mass);
  const double n = static_cast<double>(matrix.rows());
  for (Eigen::Index c = 0; c < k; ++c) {
    const double pz = std::exp(mass[static_cast<std::size_t>(c)] - log_z);
    for (Eigen::Index j = 0; j < m; ++j) g(j, c) += n * pz * sigmoid(params.theta(j, c));
  }
  return g;
}

LabelModelParams train_label_model(const LabelMatrix& matrix, std::span<const std::size_t> gold,
                                   const TrainConfig& config, TrainReport* report) {
  if (matrix.rows() == 0) throw TrainingError("cannot train the label model on an empty matrix");
  if (matrix.cols() == 0) throw TrainingError("cannot train the label model without rules");
  if (matrix.num_classes() == 0) throw TrainingError("cannot train the label model without classes");
  LabelModelParams params = LabelModelParams::zeros(matrix.cols(), matrix.num_classes());
  check_gold(matrix, gold, params);

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = {};
  double loss = label_model_nll(matrix, gold, params);
  rep.losses.push_back(loss);
  double lr = config.lr;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rep.epochs_run = epoch + 1;
    const Eigen::MatrixXd grad = label_model_gradient(matrix, gold, params);
    bool accepted = false;
    while (lr > 1e-15) {
      LabelModelParams next{params.theta - lr * grad};
      const double next_loss = label_model_nll(matrix, gold, next);
      if (!std::isfinite(next_loss)) {
        throw TrainingError("label model loss diverged; last finite loss " + std::to_string(loss));
      }
      if (next_loss <= loss) {
        const double delta = loss - next_loss;
        params = std::move(next);
        loss = next_loss;
        rep.losses.push_back(loss);
        lr *= 1.2;
        accepted = true;
        if (delta < config.tol) rep.converged = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) rep.converged = true;
    if (rep.converged) break;
  }
  return params;
}

}  // namespace arise
