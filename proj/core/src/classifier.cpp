#include <cmath>
#include <limits>
#include <map>

#include "arise/error.hpp"
#include "arise/label_model.hpp"
#include "arise/text.hpp"

namespace arise {

FeatureClassifierParams FeatureClassifierParams::zeros(std::size_t hash_dim, std::size_t classes) {
  if (hash_dim == 0) throw ContractError("hash_dim must be positive");
  FeatureClassifierParams p;
  p.hash_dim = hash_dim;
  p.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hash_dim), static_cast<Eigen::Index>(classes));
  p.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes));
  return p;
}

HashedFeatures hash_features(const LabeledDoc& doc, std::size_t hash_dim) {
  if (hash_dim == 0) throw ContractError("hash_dim must be positive");
  std::map<std::size_t, double> counts;
  for (const auto& sentence : doc.sentences) {
    for (const auto& t : sentence.tokens()) counts[static_cast<std::size_t>(text::fnv1a(t.folded) % hash_dim)] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

Eigen::VectorXd classifier_logits(const HashedFeatures& x, const FeatureClassifierParams& params) {
  Eigen::VectorXd z = params.bias;
  for (const auto& [b, v] : x) z += v * params.weights.row(static_cast<Eigen::Index>(b)).transpose();
  return z;
}

namespace {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

}  // namespace

std::vector<double> feature_classify(const LabeledDoc& doc, const FeatureClassifierParams& params) {
  const Eigen::VectorXd lp = log_softmax(classifier_logits(hash_features(doc, params.hash_dim), params));
  std::vector<double> out(static_cast<std::size_t>(lp.size()));
  for (Eigen::Index c = 0; c < lp.size(); ++c) out[static_cast<std::size_t>(c)] = std::exp(lp(c));
  return out;
}

JointLoss joint_loss(std::span<const HashedFeatures> x, const LabelMatrix& matrix, std::span<const std::size_t> gold,
                     const LabelModelParams& theta, const FeatureClassifierParams& phi, const JointConfig& config,
                     JointGradient* gradient) {
  if (x.size() != matrix.rows() || gold.size() != matrix.rows()) {
    throw ContractError("features, label matrix and gold labels are not aligned");
  }
  if (phi.classes() != theta.classes()) throw ContractError("classifier and label model disagree on classes");
  const auto k = static_cast<Eigen::Index>(theta.classes());

  JointLoss loss;
  loss.nll = label_model_nll(matrix, gold, theta);
  if (gradient) {
    gradient->theta = config.ll_weight * label_model_gradient(matrix, gold, theta);
    gradient->weights = Eigen::MatrixXd::Zero(phi.weights.rows(), phi.weights.cols());
    gradient->bias = Eigen::VectorXd::Zero(k);
  }

  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const Eigen::VectorXd lp = log_softmax(classifier_logits(x[i], phi));
    const Eigen::VectorXd p = lp.array().exp();
    const auto y = static_cast<Eigen::Index>(gold[i]);
    loss.ce -= lp(y);

    Eigen::VectorXd dz = config.ce_weight * p;
    dz(y) -= config.ce_weight;

    const auto row = matrix.row(i);
    const Posterior q = posterior(row, theta);
    if (!q.no_evidence) {
      Eigen::VectorXd lq(k);
      for (Eigen::Index c = 0; c < k; ++c) lq(c) = std::log(q.probs[static_cast<std::size_t>(c)]);
      const Eigen::VectorXd a = lp - lq;
      const double kl = p.dot(a);
      loss.kl += kl;
      if (gradient) {
        dz += config.kl_weight * (p.array() * (a.array() - kl)).matrix();
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (row[j] == 0) continue;
          for (Eigen::Index c = 0; c < k; ++c) {
            gradient->theta(static_cast<Eigen::Index>(j), c) +=
                config.kl_weight * (q.probs[static_cast<std::size_t>(c)] - p(c));
          }
        }
      }
    }
    if (gradient) {
      gradient->bias += dz;
      for (const auto& [b, v] : x[i]) gradient->weights.row(static_cast<Eigen::Index>(b)) += v * dz.transpose();
    }
  }
  loss.total = config.ce_weight * loss.ce + config.ll_weight * loss.nll + config.kl_weight * loss.kl;
  return loss;
}

JointResult joint_train(const Corpus& corpus, const LabelMatrix& matrix, const JointConfig& config) {
  if (matrix.rows() == 0) throw TrainingError("cannot train on an empty corpus");
  if (matrix.rows() != corpus.size()) throw ContractError("label matrix rows do not match the corpus");
  if (matrix.num_classes() != corpus.num_labels()) throw ContractError("label matrix classes do not match the corpus");
  std::vector<HashedFeatures> x;
  std::vector<std::size_t> gold;
  for (const auto& d : corpus.docs) {
    x.push_back(hash_features(d, config.hash_dim));
    gold.push_back(d.label);
  }

  JointResult out{LabelModelParams::zeros(matrix.cols(), corpus.num_labels()),
                  FeatureClassifierParams::zeros(config.hash_dim, corpus.num_labels()),
                  {}};
  JointGradient grad;
  JointLoss loss = joint_loss(x, matrix, gold, out.theta, out.phi, config, &grad);
  if (!std::isfinite(loss.total)) throw TrainingError("joint loss is not finite at initialisation");
  out.log.emplace_back(0, loss);

  double lr = config.train.lr;
  for (std::size_t epoch = 1; epoch <= config.train.epochs; ++epoch) {
    bool accepted = false;
    double delta = 0.0;
    while (lr > 1e-15) {
      LabelModelParams theta{out.theta.theta - lr * grad.theta};
      FeatureClassifierParams phi = out.phi;
      phi.weights -= lr * grad.weights;
      phi.bias -= lr * grad.bias;
      JointGradient next_grad;
      const JointLoss next = joint_loss(x, matrix, gold, theta, phi, config, &next_grad);
      if (!std::isfinite(next.total)) {
        throw TrainingError("joint training diverged; last finite loss " + std::to_string(loss.total));
      }
      if (next.total <= loss.total) {
        delta = loss.total - next.total;
        out.theta = std::move(theta);
        out.phi = std::move(phi);
        grad = std::move(next_grad);
        loss = next;
        out.log.emplace_back(epoch, loss);
        lr *= 1.2;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted || delta < config.train.tol) break;
  }
  return out;
}

}  // namespace arise
