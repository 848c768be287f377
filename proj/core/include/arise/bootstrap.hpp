#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arise/corpus.hpp"
#include "arise/filtering.hpp"
#include "arise/label_model.hpp"
#include "arise/rule.hpp"
#include "arise/scoring.hpp"

namespace arise {

struct GeneratorSpec {
  enum class Mode { file, command };
  Mode mode = Mode::file;
  /// File mode: candidate JSONL; `{iter}` is replaced by the iteration number.
  /// Without `parses`, each object must embed its parse in `conllu`.
  std::filesystem::path path;
  std::optional<std::filesystem::path> parses;
  /// Command mode: run through /bin/sh with the seed JSONL on stdin.
  std::string command;
  std::size_t per_label_quota = 0;  // 0 = unlimited
  bool paraphrase_morphing = false;
};

enum class ValidationMode { split, few_shot };

struct BootstrapConfig {
  std::filesystem::path seed_docs;
  std::filesystem::path seed_parses;
  ValidationMode validation_mode = ValidationMode::split;
  std::filesystem::path validation_docs;
  std::filesystem::path validation_parses;
  std::vector<std::string> labels;  // empty = observed in the seed
  GeneratorSpec generator;
  std::size_t iterations = 2;
  RuleInductionConfig rules;
  SimilarityParams filtering;
  TrainConfig label_model;
  bool paraphrases_into_seed = false;
  std::uint64_t seed_rng = 0;
};

struct ModuleSettings {
  RuleInductionConfig rules;
  SimilarityParams filtering;
  TrainConfig label_model;
};

/// Reads only the module sections (features, rules, filtering, label_model)
/// of a config document, with the same validation as parse_config.
ModuleSettings parse_module_settings(std::string_view json);

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the offending key on unknown keys, wrong types
/// or out-of-range values.
BootstrapConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);
BootstrapConfig load_config(const std::filesystem::path& path);
/// Checks referenced files exist; throws ConfigError otherwise.
void check_config_paths(const BootstrapConfig& config);

struct IterationMetrics {
  std::size_t iteration = 0;
  std::size_t seed_size = 0;             // before the iteration's additions
  std::size_t training_docs = 0;
  std::size_t paraphrases = 0;
  std::size_t rule_candidates = 0;
  std::size_t rules_selected = 0;
  std::size_t rules_added = 0;
  std::size_t candidates_received = 0;
  std::size_t candidates_duplicate = 0;
  std::size_t kept = 0;
  std::size_t rejected_no_evidence = 0;
  std::size_t rejected_ambiguous = 0;
  std::size_t rejected_disagrees = 0;
  double rule_precision = 0.0;        // mean validation precision of selected rules
  double validation_accuracy = 0.0;   // label-model argmax accuracy on covered validation docs
  double validation_coverage = 0.0;   // fraction of validation docs with evidence
};

struct BootstrapState {
  std::size_t iteration = 0;
  Corpus seed;
  std::vector<Rule> rule_set;
  LabelModelParams theta;
  std::vector<IterationMetrics> history;
};

enum class RejectReason { no_evidence, ambiguous, disagrees };
std::string_view to_string(RejectReason reason);

struct Rejection {
  LabeledDoc doc;
  RejectReason reason;
};

struct CandidateFilter {
  std::vector<LabeledDoc> kept;
  std::vector<Rejection> rejected;
};

/// Keeps a candidate iff at least one rule fires and the posterior has a
/// unique argmax equal to the claimed label. `theta` rows follow the
/// canonical key order of `rules`.
CandidateFilter filter_candidates(std::span<const LabeledDoc> candidates, std::span<const Rule> rules,
                                  const LabelModelParams& theta, std::size_t num_classes);

/// Morphed copies (origin = paraphrase, same label) of the docs whose parses
/// change under tree morphing.
std::vector<LabeledDoc> paraphrase_morph(std::span<const LabeledDoc> docs);

struct GeneratorContext {
  std::size_t iteration = 0;
  std::uint64_t seed_rng = 0;
  std::vector<std::string> labels;
};

/// Runs the plug-in generator. Candidates come back with origin = generated.
/// Throws GeneratorError on a failing command, malformed output or a missing file.
std::vector<LabeledDoc> generate_candidates(const GeneratorSpec& spec, std::span<const LabeledDoc> seed,
                                            const GeneratorContext& context);

struct IterationOutput {
  std::vector<Rule> candidates;
  std::vector<SelectionStep> trace;
  CandidateFilter filtered;
};

/// One loop iteration: induce from the training portion of the seed (plus
/// paraphrases), greedy-select with the current rule set as warm start,
/// retrain the label model, generate, filter and grow the seed. With
/// `generate == false` only the rule steps run. The input state is never
/// modified.
BootstrapState run_iteration(const BootstrapState& state, const BootstrapConfig& config, const Corpus& validation,
                             IterationOutput* output = nullptr, bool generate = true);

/// Loads the config's corpora, runs every iteration and writes
/// iter_<n>/{rules.json,kept.jsonl,rejected.jsonl,trace.jsonl,metrics.json}
/// and run_summary.json under `out_dir`.
BootstrapState run_bootstrap(const BootstrapConfig& config, const std::filesystem::path& out_dir);

/// Metrics as a JSON object (stable key order).
std::string metrics_to_json(const IterationMetrics& m);

}  // namespace arise
