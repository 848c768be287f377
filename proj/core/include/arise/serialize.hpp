#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arise/filtering.hpp"
#include "arise/label_model.hpp"
#include "arise/rule.hpp"

namespace arise {

inline constexpr int kSchemaVersion = 1;

struct RuleSet {
  std::vector<std::string> labels;
  std::vector<Rule> rules;
};

/// `{"schema_version", "labels", "rules": [...]}`. Each rule carries its
/// canonical key, core relation, role, label name, L-PMI, PMI vector (-inf
/// written as null) and its predicate tree.
std::string rules_to_json(std::span<const Rule> rules, std::span<const std::string> labels);
/// Throws ParseError on malformed documents and ContractError when a stored
/// key disagrees with the rebuilt rule.
RuleSet rules_from_json(std::string_view json);

struct ModelParams {
  std::vector<std::string> labels;
  std::vector<std::string> rule_keys;
  LabelModelParams theta;
  std::optional<FeatureClassifierParams> classifier;
};

/// Classifier weights are stored sparsely: one {bucket: weight} map per class.
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(std::string_view json);

/// One `{"step", "rule", "gain"}` object per line.
std::string trace_to_jsonl(std::span<const SelectionStep> trace);

/// `epoch,ce,nll,kl,total` with one row per accepted step.
std::string training_log_csv(std::span<const std::pair<std::size_t, JointLoss>> log);

/// Shortest decimal that round-trips, used for every real written to disk.
std::string format_real(double v);

}  // namespace arise
