#include "cli.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "arise/bootstrap.hpp"
#include "arise/corpus.hpp"
#include "arise/error.hpp"
#include "arise/features.hpp"
#include "arise/filtering.hpp"
#include "arise/label_model.hpp"
#include "arise/parallel.hpp"
#include "arise/scoring.hpp"
#include "arise/serialize.hpp"

namespace arise::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed_rng = 0;
  std::string out_dir = ".";
  std::string config;
  std::size_t threads = 0;
};

struct CorpusArgs {
  std::string dir;
  std::string docs;
  std::string parses;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed-rng", c.seed_rng, "Seed for any sampling step")->capture_default_str();
  app->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  app->add_option("--config", c.config, "JSON config; module sections supply defaults");
  app->add_option("--threads", c.threads, "Worker threads (default: ARISE_THREADS or all cores)");
}

void add_corpus(CLI::App* app, CorpusArgs& c, const std::string& what) {
  auto* dir = app->add_option("--corpus", c.dir, what + " directory holding docs.jsonl and parses.conllu (or --docs/--parses)");
  auto* docs = app->add_option("--docs", c.docs, what + " JSONL file");
  auto* parses = app->add_option("--parses", c.parses, what + " CoNLL-U file");
  docs->needs(parses);
  parses->needs(docs);
  app->parse_complete_callback([dir, docs, parses] {
    if (dir->count() > 0 && (docs->count() > 0 || parses->count() > 0)) throw CLI::ExcludesError("--corpus", "--docs/--parses");
  });
}

Corpus load(const CorpusArgs& c, const LoadOptions& options = {}) {
  if (!c.dir.empty()) return load_corpus_dir(c.dir, options);
  if (!c.docs.empty()) return load_corpus(c.docs, c.parses, options);
  throw LoadError("no corpus given (use --corpus DIR or --docs/--parses)");
}

fs::path output(const std::string& explicit_path, const Common& c, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(c.out_dir) / name;
}

ModuleSettings settings(const Common& c) {
  if (c.config.empty()) return {};
  return parse_module_settings(read_file(c.config));
}

template <class T>
void override(std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

std::vector<Rule> load_rules(const std::string& path, std::vector<std::string>* labels = nullptr) {
  RuleSet set = rules_from_json(read_file(path));
  if (labels) *labels = set.labels;
  return std::move(set.rules);
}

std::vector<Rule> scored_rules(std::span<const Rule> rules) {
  std::vector<Rule> out(rules.begin(), rules.end());
  std::sort(out.begin(), out.end(), RuleKeyLess{});
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule induction and data filtering for bootstrapped weak supervision", "arise"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  CorpusArgs corpus;
  std::string out_path;
  std::function<void()> action;

  // extract
  std::string role;
  std::optional<std::size_t> max_nodes;
  auto* extract = app.add_subcommand("extract", "Extract syntactic n-gram features from a parsed corpus");
  add_common(extract, common);
  add_corpus(extract, corpus, "Input corpus");
  extract->add_option("--role", role, "Only use sentences tagged with this role");
  extract->add_option("--max-nodes", max_nodes, "Largest subtree size (2 or 3, default 3)");
  extract->add_option("--out", out_path, "Features JSON (default <out-dir>/features.json)");
  extract->callback([&] {
    action = [&] {
      auto s = settings(common);
      override(max_nodes, s.rules.max_nodes);
      const Corpus c = load(corpus);
      const auto features = extract_features(c, role, s.rules.max_nodes);
      const fs::path path = output(out_path, common, "features.json");
      write_file(path, features_to_json(features));
      err << "extract: " << features.size() << " features from " << c.size() << " docs -> " << path.string() << "\n";
    };
  });

  // induce
  std::optional<std::size_t> group_cap, max_rounds;
  auto* induce = app.add_subcommand("induce", "Induce labelled candidate rules by pairwise generalisation");
  add_common(induce, common);
  add_corpus(induce, corpus, "Training corpus");
  induce->add_option("--max-nodes", max_nodes, "Largest subtree size (2 or 3, default 3)");
  induce->add_option("--group-cap", group_cap, "Largest WordSet/StemSet/PosSet size (default 4)");
  induce->add_option("--max-rounds", max_rounds, "Generalisation rounds per lattice (default 3)");
  induce->add_option("--out", out_path, "Candidate rules JSON (default <out-dir>/candidates.json)");
  induce->callback([&] {
    action = [&] {
      auto s = settings(common);
      override(max_nodes, s.rules.max_nodes);
      override(group_cap, s.rules.group_cap);
      override(max_rounds, s.rules.induction.max_rounds);
      const Corpus c = load(corpus);
      const auto rules = induce_rule_candidates(c, s.rules);
      const fs::path path = output(out_path, common, "candidates.json");
      write_file(path, rules_to_json(rules, c.labels));
      err << "induce: " << rules.size() << " candidate rules from " << c.size() << " docs -> " << path.string()
          << "\n";
    };
  });

  // filter
  std::string candidates_path, warm_path, trace_path;
  std::optional<double> lambda, cov_weight, agree_weight;
  std::optional<std::size_t> budget;
  auto* filter = app.add_subcommand("filter", "Select a rule subset by greedy graph-cut maximisation");
  add_common(filter, common);
  add_corpus(filter, corpus, "Validation corpus");
  filter->add_option("--candidates", candidates_path, "Candidate rules JSON")->required();
  filter->add_option("--warm-start", warm_path, "Rules JSON to start the selection from");
  filter->add_option("--lambda", lambda, "Redundancy weight in [0,1] (default 0.5)");
  filter->add_option("--cov-weight", cov_weight, "Coverage weight w (default 1)");
  filter->add_option("--agree-weight", agree_weight, "Agreement weight gamma (default 1)");
  filter->add_option("--budget", budget, "New rules to add (default 50)");
  filter->add_option("--out", out_path, "Selected rules JSON (default <out-dir>/selected.json)");
  filter->add_option("--trace", trace_path, "Selection trace JSONL (default <out-dir>/trace.jsonl)");
  filter->callback([&] {
    action = [&] {
      auto s = settings(common);
      override(lambda, s.filtering.lambda);
      override(cov_weight, s.filtering.coverage_weight);
      override(agree_weight, s.filtering.agreement_weight);
      override(budget, s.filtering.budget);
      std::vector<std::string> labels;
      const auto candidates = load_rules(candidates_path, &labels);
      std::vector<Rule> warm;
      if (!warm_path.empty()) {
        std::vector<std::string> warm_labels;
        warm = load_rules(warm_path, &warm_labels);
        if (warm_labels != labels) throw ContractError("warm-start rules use a different label set");
      }
      LoadOptions options;
      options.labels = labels;
      const Corpus validation = load(corpus, options);
      const Selection sel = greedy_select(candidates, warm, validation, s.filtering);
      const fs::path path = output(out_path, common, "selected.json");
      const fs::path trace = output(trace_path, common, "trace.jsonl");
      write_file(path, rules_to_json(sel.rules, labels));
      write_file(trace, trace_to_jsonl(sel.trace));
      err << "filter: selected " << sel.rules.size() << " rules (" << sel.trace.size() << " new) from "
          << candidates.size() << " candidates -> " << path.string() << "\n";
    };
  });

  // label-model
  std::string rules_path;
  std::optional<double> lr, tol;
  std::optional<std::size_t> epochs;
  auto* lm = app.add_subcommand("label-model", "Train the generative label model on gold labels");
  add_common(lm, common);
  add_corpus(lm, corpus, "Labelled corpus");
  lm->add_option("--rules", rules_path, "Rules JSON (labelling functions)")->required();
  lm->add_option("--lr", lr, "Initial learning rate (default 0.05)");
  lm->add_option("--epochs", epochs, "Maximum gradient steps (default 500)");
  lm->add_option("--tol", tol, "Stop when the loss improves by less than this (default 1e-7)");
  lm->add_option("--out", out_path, "Parameters JSON (default <out-dir>/params.json)");
  lm->callback([&] {
    action = [&] {
      auto s = settings(common);
      override(lr, s.label_model.lr);
      override(epochs, s.label_model.epochs);
      override(tol, s.label_model.tol);
      std::vector<std::string> labels;
      const auto rules = scored_rules(load_rules(rules_path, &labels));
      LoadOptions options;
      options.labels = labels;
      const Corpus c = load(corpus, options);
      const LabelMatrix m = fire_matrix(rules, c);
      std::vector<std::size_t> gold;
      for (const auto& d : c.docs) gold.push_back(d.label);
      TrainReport report;
      ModelParams params;
      params.labels = labels;
      params.rule_keys = m.rule_keys();
      params.theta = train_label_model(m, gold, s.label_model, &report);
      const fs::path path = output(out_path, common, "params.json");
      write_file(path, params_to_json(params));
      err << "label-model: " << report.epochs_run << " epochs, final NLL " << format_real(report.losses.back())
          << (report.converged ? " (converged)" : "") << " -> " << path.string() << "\n";
    };
  });

  // joint-train
  std::string log_path;
  std::optional<std::size_t> hash_dim;
  std::optional<double> ce_weight, ll_weight, kl_weight;
  auto* joint = app.add_subcommand("joint-train", "Jointly train the label model and a hashed feature classifier");
  add_common(joint, common);
  add_corpus(joint, corpus, "Labelled corpus");
  joint->add_option("--rules", rules_path, "Rules JSON (labelling functions)")->required();
  joint->add_option("--lr", lr, "Initial learning rate (default 0.05)");
  joint->add_option("--epochs", epochs, "Maximum gradient steps (default 500)");
  joint->add_option("--tol", tol, "Stop when the loss improves by less than this (default 1e-7)");
  joint->add_option("--hash-dim", hash_dim, "Feature hashing buckets (default 65536)");
  joint->add_option("--ce-weight", ce_weight, "Cross-entropy term weight (default 1)");
  joint->add_option("--ll-weight", ll_weight, "Label-model likelihood term weight (default 1)");
  joint->add_option("--kl-weight", kl_weight, "Consensus KL term weight (default 1)");
  joint->add_option("--out", out_path, "Parameters JSON (default <out-dir>/params.json)");
  joint->add_option("--log", log_path, "Training log CSV (default <out-dir>/training_log.csv)");
  joint->callback([&] {
    action = [&] {
      auto s = settings(common);
      JointConfig jc;
      jc.train = s.label_model;
      override(lr, jc.train.lr);
      override(epochs, jc.train.epochs);
      override(tol, jc.train.tol);
      override(hash_dim, jc.hash_dim);
      override(ce_weight, jc.ce_weight);
      override(ll_weight, jc.ll_weight);
      override(kl_weight, jc.kl_weight);
      std::vector<std::string> labels;
      const auto rules = scored_rules(load_rules(rules_path, &labels));
      LoadOptions options;
      options.labels = labels;
      const Corpus c = load(corpus, options);
      const LabelMatrix m = fire_matrix(rules, c);
      JointResult r = joint_train(c, m, jc);
      ModelParams params;
      params.labels = labels;
      params.rule_keys = m.rule_keys();
      params.theta = std::move(r.theta);
      params.classifier = std::move(r.phi);
      const fs::path path = output(out_path, common, "params.json");
      const fs::path log = output(log_path, common, "training_log.csv");
      write_file(path, params_to_json(params));
      write_file(log, training_log_csv(r.log));
      err << "joint-train: " << r.log.size() - 1 << " steps, final loss " << format_real(r.log.back().second.total)
          << " -> " << path.string() << "\n";
    };
  });

  // filter-data
  std::string params_path, cand_docs, cand_parses, kept_path, rejected_path;
  auto* fd = app.add_subcommand("filter-data", "Keep generated candidates whose claimed label the label model confirms");
  add_common(fd, common);
  fd->add_option("--rules", rules_path, "Rules JSON used to train the parameters")->required();
  fd->add_option("--params", params_path, "Label-model parameters JSON")->required();
  fd->add_option("--candidates", cand_docs, "Candidate JSONL (each object embeds `conllu` unless --candidate-parses)")
      ->required();
  fd->add_option("--candidate-parses", cand_parses, "CoNLL-U file for candidates that reference sent_ids");
  fd->add_option("--out", kept_path, "Kept candidates JSONL (default <out-dir>/kept.jsonl)");
  fd->add_option("--rejected", rejected_path, "Rejections JSONL (default <out-dir>/rejected.jsonl)");
  fd->callback([&] {
    action = [&] {
      std::vector<std::string> labels;
      const auto rules = scored_rules(load_rules(rules_path, &labels));
      const ModelParams params = params_from_json(read_file(params_path));
      if (params.labels != labels) throw ContractError("params and rules use different label sets");
      std::vector<std::string> keys;
      for (const auto& r : rules) keys.push_back(r.key());
      if (params.rule_keys != keys) throw ContractError("params were trained on a different rule set");
      LoadOptions options;
      options.labels = labels;
      options.default_origin = Origin::generated;
      std::vector<LabeledDoc> docs = cand_parses.empty() ? parse_embedded_docs(read_file(cand_docs), options)
                                                         : load_corpus(cand_docs, cand_parses, options).docs;
      const CandidateFilter f = filter_candidates(docs, rules, params.theta, labels.size());
      const fs::path kept = output(kept_path, common, "kept.jsonl");
      const fs::path rejected = output(rejected_path, common, "rejected.jsonl");
      write_file(kept, docs_to_jsonl(f.kept, true));
      std::string rej;
      for (const auto& r : f.rejected) {
        nlohmann::ordered_json o;
        o["doc_id"] = r.doc.doc_id;
        o["label"] = labels[r.doc.label];
        o["reason"] = std::string(to_string(r.reason));
        rej += o.dump() + "\n";
      }
      write_file(rejected, rej);
      err << "filter-data: kept " << f.kept.size() << " of " << docs.size() << " candidates -> " << kept.string()
          << "\n";
    };
  });

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Run the full induce/filter/generate loop from a config file");
  add_common(boot, common);
  boot->callback([&] {
    action = [&] {
      if (common.config.empty()) throw ConfigError("bootstrap needs --config");
      BootstrapConfig cfg = load_config(common.config);
      if (boot->count("--seed-rng")) cfg.seed_rng = common.seed_rng;
      const BootstrapState state = run_bootstrap(cfg, common.out_dir);
      err << "bootstrap: " << state.history.size() << " iterations, seed " << state.history.front().seed_size
          << " -> " << state.seed.size() << " docs, " << state.rule_set.size() << " rules -> " << common.out_dir
          << "\n";
    };
  });

  // validate-config
  std::string config_arg;
  auto* vc = app.add_subcommand("validate-config", "Check a bootstrap config file without running anything");
  add_common(vc, common);
  vc->add_option("file", config_arg, "Config file (alternative to --config)");
  vc->callback([&] {
    action = [&] {
      const std::string path = !config_arg.empty() ? config_arg : common.config;
      if (path.empty()) throw ConfigError("validate-config needs a config file");
      check_config_paths(load_config(path));
      err << "OK\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (common.threads > 0) parallel::set_thread_count(common.threads);
    action();
  } catch (const Error& e) {
    err << "arise " << name << ": " << e.stage() << " error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "arise " << name << ": error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace arise::cli
