#include "arise/bootstrap.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sys/wait.h>
#include <unistd.h>

#include "arise/error.hpp"
#include "arise/morph.hpp"
#include "arise/serialize.hpp"
#include "json.hpp"

namespace arise {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + (where.empty() ? std::string(key) : where + "." + key) + "' has the wrong type");
  }
}

std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("'" + (where.empty() ? std::string(key) : where + "." + key) + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

json parse_config_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "", {"seed", "validation", "labels", "generator", "iterations", "features", "rules", "filtering",
                           "label_model", "paraphrases_into_seed", "seed_rng"});
  return doc;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string required_path(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing '" + where + "." + key + "'");
  return get<std::string>(obj, key, where, "");
}

ModuleSettings parse_modules(const json& doc) {
  ModuleSettings m;
  const json features = doc.value("features", json::object());
  reject_unknown(features, "features", {"max_nodes"});
  m.rules.max_nodes = get_count(features, "max_nodes", "features", m.rules.max_nodes);
  if (m.rules.max_nodes != 2 && m.rules.max_nodes != 3) throw ConfigError("'features.max_nodes' must be 2 or 3");

  const json rules = doc.value("rules", json::object());
  reject_unknown(rules, "rules", {"group_cap", "max_rounds"});
  m.rules.group_cap = get_count(rules, "group_cap", "rules", m.rules.group_cap);
  if (m.rules.group_cap == 0) throw ConfigError("'rules.group_cap' must be at least 1");
  m.rules.induction.max_rounds = get_count(rules, "max_rounds", "rules", m.rules.induction.max_rounds);

  const json filtering = doc.value("filtering", json::object());
  reject_unknown(filtering, "filtering", {"lambda", "cov_weight", "agree_weight", "budget"});
  m.filtering.lambda = get<double>(filtering, "lambda", "filtering", m.filtering.lambda);
  m.filtering.coverage_weight = get<double>(filtering, "cov_weight", "filtering", m.filtering.coverage_weight);
  m.filtering.agreement_weight = get<double>(filtering, "agree_weight", "filtering", m.filtering.agreement_weight);
  m.filtering.budget = get_count(filtering, "budget", "filtering", m.filtering.budget);
  try {
    m.filtering.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("filtering: ") + e.what());
  }

  const json lm = doc.value("label_model", json::object());
  reject_unknown(lm, "label_model", {"lr", "epochs", "tol"});
  m.label_model.lr = get<double>(lm, "lr", "label_model", m.label_model.lr);
  m.label_model.epochs = get_count(lm, "epochs", "label_model", m.label_model.epochs);
  m.label_model.tol = get<double>(lm, "tol", "label_model", m.label_model.tol);
  if (!(m.label_model.lr > 0.0)) throw ConfigError("'label_model.lr' must be positive");
  if (!(m.label_model.tol >= 0.0)) throw ConfigError("'label_model.tol' must be non-negative");

  return m;
}

}  // namespace

BootstrapConfig parse_config(std::string_view text, const fs::path& base_dir) {
  const json doc = parse_config_json(text);
  BootstrapConfig c;

  if (!doc.contains("seed")) throw ConfigError("missing 'seed'");
  const auto& seed = doc.at("seed");
  reject_unknown(seed, "seed", {"docs", "parses"});
  c.seed_docs = resolve(base_dir, required_path(seed, "docs", "seed"));
  c.seed_parses = resolve(base_dir, required_path(seed, "parses", "seed"));

  const json validation = doc.value("validation", json::object({{"mode", "few_shot"}}));
  reject_unknown(validation, "validation", {"mode", "docs", "parses"});
  const auto mode = get<std::string>(validation, "mode", "validation", "few_shot");
  if (mode == "split") {
    c.validation_mode = ValidationMode::split;
    c.validation_docs = resolve(base_dir, required_path(validation, "docs", "validation"));
    c.validation_parses = resolve(base_dir, required_path(validation, "parses", "validation"));
  } else if (mode == "few_shot") {
    c.validation_mode = ValidationMode::few_shot;
    if (validation.contains("docs") || validation.contains("parses")) {
      throw ConfigError("'validation' in few_shot mode reuses the seed and takes no paths");
    }
  } else {
    throw ConfigError("'validation.mode' must be \"split\" or \"few_shot\"");
  }

  c.labels = get<std::vector<std::string>>(doc, "labels", "", {});

  if (!doc.contains("generator")) throw ConfigError("missing 'generator'");
  const auto& gen = doc.at("generator");
  reject_unknown(gen, "generator", {"mode", "path", "parses", "command", "per_label_quota", "paraphrase_morphing"});
  const auto gmode = get<std::string>(gen, "mode", "generator", "");
  if (gmode == "file") {
    c.generator.mode = GeneratorSpec::Mode::file;
    c.generator.path = resolve(base_dir, required_path(gen, "path", "generator"));
    if (gen.contains("parses")) c.generator.parses = resolve(base_dir, get<std::string>(gen, "parses", "generator", ""));
    if (gen.contains("command")) throw ConfigError("'generator.command' is only valid in command mode");
  } else if (gmode == "command") {
    c.generator.mode = GeneratorSpec::Mode::command;
    c.generator.command = get<std::string>(gen, "command", "generator", "");
    if (c.generator.command.empty()) throw ConfigError("'generator.command' must be a non-empty string");
    if (gen.contains("path") || gen.contains("parses")) throw ConfigError("'generator.path' is only valid in file mode");
  } else {
    throw ConfigError("'generator.mode' must be \"file\" or \"command\"");
  }
  c.generator.per_label_quota = get_count(gen, "per_label_quota", "generator", 0);
  c.generator.paraphrase_morphing = get<bool>(gen, "paraphrase_morphing", "generator", false);

  c.iterations = get_count(doc, "iterations", "", c.iterations);

  const ModuleSettings modules = parse_modules(doc);
  c.rules = modules.rules;
  c.filtering = modules.filtering;
  c.label_model = modules.label_model;

  c.paraphrases_into_seed = get<bool>(doc, "paraphrases_into_seed", "", false);
  c.seed_rng = get<std::uint64_t>(doc, "seed_rng", "", 0);
  return c;
}

ModuleSettings parse_module_settings(std::string_view text) { return parse_modules(parse_config_json(text)); }

BootstrapConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

void check_config_paths(const BootstrapConfig& c) {
  auto need = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  need(c.seed_docs, "seed.docs");
  need(c.seed_parses, "seed.parses");
  if (c.validation_mode == ValidationMode::split) {
    need(c.validation_docs, "validation.docs");
    need(c.validation_parses, "validation.parses");
  }
  if (c.generator.mode == GeneratorSpec::Mode::file) {
    const std::string p = c.generator.path.string();
    if (p.find("{iter}") == std::string::npos) need(c.generator.path, "generator.path");
    if (c.generator.parses) need(*c.generator.parses, "generator.parses");
  }
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::no_evidence: return "no_evidence";
    case RejectReason::ambiguous: return "ambiguous";
    case RejectReason::disagrees: return "disagrees";
  }
  return "disagrees";
}

CandidateFilter filter_candidates(std::span<const LabeledDoc> candidates, std::span<const Rule> rules,
                                  const LabelModelParams& theta, std::size_t num_classes) {
  const LabelMatrix m = fire_matrix(rules, candidates, num_classes);
  if (theta.rules() != m.cols()) throw ContractError("theta does not match the rule set");
  CandidateFilter out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Posterior p = posterior(m.row(i), theta);
    if (p.no_evidence) {
      out.rejected.push_back({candidates[i], RejectReason::no_evidence});
      continue;
    }
    const auto best = p.unique_argmax();
    if (!best) {
      out.rejected.push_back({candidates[i], RejectReason::ambiguous});
    } else if (*best != candidates[i].label) {
      out.rejected.push_back({candidates[i], RejectReason::disagrees});
    } else {
      out.kept.push_back(candidates[i]);
    }
  }
  return out;
}

std::vector<LabeledDoc> paraphrase_morph(std::span<const LabeledDoc> docs) {
  std::vector<LabeledDoc> out;
  for (const auto& d : docs) {
    LabeledDoc m = d;
    bool changed = false;
    for (auto& s : m.sentences) {
      DepTree t = morph_tree(s);
      if (!(t == s)) {
        changed = true;
        s = std::move(t);
      }
    }
    if (!changed) continue;
    m.doc_id = d.doc_id + "~morph";
    m.origin = Origin::paraphrase;
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

std::string replace_iter(std::string s, std::size_t iteration) {
  const std::string tag = "{iter}";
  for (auto pos = s.find(tag); pos != std::string::npos; pos = s.find(tag, pos)) {
    s.replace(pos, tag.size(), std::to_string(iteration));
  }
  return s;
}

std::string run_command(const std::string& command, const std::string& input, const GeneratorContext& ctx) {
  const fs::path tmp = fs::temp_directory_path() /
                       ("arise-seed-" + std::to_string(::getpid()) + "-" + std::to_string(ctx.iteration) + ".jsonl");
  write_file(tmp, input);
  ::setenv("ARISE_ITERATION", std::to_string(ctx.iteration).c_str(), 1);
  ::setenv("ARISE_SEED", std::to_string(ctx.seed_rng).c_str(), 1);
  const std::string full = "( " + command + " ) < '" + tmp.string() + "'";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) {
    fs::remove(tmp);
    throw GeneratorError("could not start generator command");
  }
  std::string out;
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  std::error_code ec;
  fs::remove(tmp, ec);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw GeneratorError("generator command exited with status " + std::to_string(code));
  }
  return out;
}

}  // namespace

std::vector<LabeledDoc> generate_candidates(const GeneratorSpec& spec, std::span<const LabeledDoc> seed,
                                            const GeneratorContext& ctx) {
  LoadOptions options;
  options.labels = ctx.labels;
  options.default_origin = Origin::generated;
  std::vector<LabeledDoc> docs;
  try {
    if (spec.mode == GeneratorSpec::Mode::file) {
      const fs::path path = replace_iter(spec.path.string(), ctx.iteration);
      if (!fs::exists(path)) throw GeneratorError("candidate file not found: " + path.string());
      if (spec.parses) {
        const fs::path parses = replace_iter(spec.parses->string(), ctx.iteration);
        docs = load_corpus(path, parses, options).docs;
      } else {
        docs = parse_embedded_docs(read_file(path), options);
      }
    } else {
      docs = parse_embedded_docs(run_command(spec.command, docs_to_jsonl(seed, true), ctx), options);
    }
  } catch (const GeneratorError&) {
    throw;
  } catch (const Error& e) {
    throw GeneratorError(std::string("malformed generator output: ") + e.what());
  }
  for (auto& d : docs) {
    d.origin = Origin::generated;
    for (const auto& s : d.sentences) {
      if (s.empty()) throw GeneratorError("candidate '" + d.doc_id + "' has an empty parse");
    }
    if (d.sentences.empty()) throw GeneratorError("candidate '" + d.doc_id + "' carries no parse");
  }
  if (spec.per_label_quota > 0) {
    std::map<std::size_t, std::size_t> taken;
    std::vector<LabeledDoc> limited;
    for (auto& d : docs) {
      if (taken[d.label]++ < spec.per_label_quota) limited.push_back(std::move(d));
    }
    docs = std::move(limited);
  }
  return docs;
}

namespace {

std::string content_key(const LabeledDoc& d) {
  std::string k = std::to_string(d.label);
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    k += "\x1e";
    k += d.role_of(i);
    for (const auto& t : d.sentences[i].tokens()) {
      k += "\x1f" + t.form + "\t" + t.stem + "\t" + t.upos + "\t" + std::to_string(t.head) + "\t" + t.deprel;
    }
  }
  return k;
}

std::vector<LabeledDoc> training_docs(const BootstrapState& state, const BootstrapConfig& config) {
  if (config.validation_mode == ValidationMode::split) return state.seed.docs;
  std::vector<LabeledDoc> out;
  for (const auto& d : state.seed.docs) {
    if (d.origin != Origin::gold) out.push_back(d);
  }
  return out;
}

Corpus with_docs(const Corpus& like, std::vector<LabeledDoc> docs) {
  Corpus c;
  c.labels = like.labels;
  c.docs = std::move(docs);
  std::set<std::string> roles;
  for (const auto& d : c.docs) {
    for (const auto& r : d.roles) {
      if (!r.empty()) roles.insert(r);
    }
  }
  c.roles.assign(roles.begin(), roles.end());
  return c;
}

}  // namespace

BootstrapState run_iteration(const BootstrapState& state, const BootstrapConfig& config, const Corpus& validation,
                             IterationOutput* output, bool generate) {
  BootstrapState next = state;
  IterationMetrics metrics;
  metrics.iteration = state.iteration;
  metrics.seed_size = state.seed.size();
  const GeneratorContext ctx{state.iteration, config.seed_rng, state.seed.labels};

  std::vector<LabeledDoc> training = training_docs(state, config);
  std::optional<std::vector<LabeledDoc>> generated;
  if (training.empty() && generate && config.validation_mode == ValidationMode::few_shot) {
    // Zero-shot first round: nothing but gold exists, so rules come from the generator's own output.
    generated = generate_candidates(config.generator, {}, ctx);
    training = *generated;
  }
  metrics.training_docs = training.size();

  std::vector<LabeledDoc> paraphrases;
  if (config.generator.paraphrase_morphing) paraphrases = paraphrase_morph(training);
  metrics.paraphrases = paraphrases.size();

  std::vector<LabeledDoc> induction_docs = training;
  induction_docs.insert(induction_docs.end(), paraphrases.begin(), paraphrases.end());
  const Corpus induction = with_docs(state.seed, std::move(induction_docs));

  std::vector<Rule> candidates;
  if (!induction.docs.empty()) candidates = induce_rule_candidates(induction, config.rules);
  metrics.rule_candidates = candidates.size();

  Selection selection = greedy_select(candidates, state.rule_set, validation, config.filtering);
  std::sort(selection.rules.begin(), selection.rules.end(), RuleKeyLess{});
  next.rule_set = selection.rules;
  metrics.rules_selected = next.rule_set.size();
  metrics.rules_added = selection.trace.size();
  if (!next.rule_set.empty()) {
    double sum = 0.0;
    for (const auto& r : next.rule_set) sum += precision(r, validation);
    metrics.rule_precision = sum / static_cast<double>(next.rule_set.size());
  }

  const Corpus train_corpus = with_docs(state.seed, training);
  const LabelMatrix train_matrix = fire_matrix(next.rule_set, train_corpus);
  if (train_matrix.cols() > 0 && train_matrix.rows() > 0) {
    std::vector<std::size_t> gold;
    for (const auto& d : train_corpus.docs) gold.push_back(d.label);
    next.theta = train_label_model(train_matrix, gold, config.label_model);
  } else {
    next.theta = LabelModelParams::zeros(next.rule_set.size(), state.seed.num_labels());
  }

  if (!validation.docs.empty()) {
    const LabelMatrix vm = fire_matrix(next.rule_set, validation);
    std::size_t covered = 0, correct = 0;
    for (std::size_t i = 0; i < vm.rows(); ++i) {
      const Posterior p = posterior(vm.row(i), next.theta);
      if (p.no_evidence) continue;
      ++covered;
      const auto best = p.unique_argmax();
      if (best && *best == validation.docs[i].label) ++correct;
    }
    metrics.validation_coverage = static_cast<double>(covered) / static_cast<double>(validation.size());
    metrics.validation_accuracy = covered ? static_cast<double>(correct) / static_cast<double>(covered) : 0.0;
  }

  CandidateFilter filtered;
  if (generate) {
    if (!generated) {
      const std::vector<LabeledDoc> shown =
          config.validation_mode == ValidationMode::split ? state.seed.docs : training;
      generated = generate_candidates(config.generator, shown, ctx);
    }
    metrics.candidates_received = generated->size();

    std::set<std::string> seen;
    std::set<std::string> ids;
    for (const auto& d : state.seed.docs) {
      seen.insert(content_key(d));
      ids.insert(d.doc_id);
    }
    std::vector<LabeledDoc> unique;
    for (auto& d : *generated) {
      if (!seen.insert(content_key(d)).second) {
        ++metrics.candidates_duplicate;
        continue;
      }
      unique.push_back(d);
    }
    filtered = filter_candidates(unique, next.rule_set, next.theta, state.seed.num_labels());
    for (const auto& r : filtered.rejected) {
      switch (r.reason) {
        case RejectReason::no_evidence: ++metrics.rejected_no_evidence; break;
        case RejectReason::ambiguous: ++metrics.rejected_ambiguous; break;
        case RejectReason::disagrees: ++metrics.rejected_disagrees; break;
      }
    }
    for (auto& d : filtered.kept) {
      if (ids.count(d.doc_id)) {
        std::string id = d.doc_id + "@iter" + std::to_string(state.iteration);
        for (std::size_t n = 2; ids.count(id); ++n) {
          id = d.doc_id + "@iter" + std::to_string(state.iteration) + "." + std::to_string(n);
        }
        d.doc_id = id;
      }
      ids.insert(d.doc_id);
      next.seed.docs.push_back(d);
    }
    metrics.kept = filtered.kept.size();
    if (config.paraphrases_into_seed) {
      for (auto d : paraphrases) {
        if (ids.count(d.doc_id) || !seen.insert(content_key(d)).second) continue;
        ids.insert(d.doc_id);
        next.seed.docs.push_back(std::move(d));
      }
    }
    next.seed = with_docs(state.seed, std::move(next.seed.docs));
  }

  next.history.push_back(metrics);
  next.iteration = state.iteration + 1;
  if (output) {
    output->candidates = std::move(candidates);
    output->trace = std::move(selection.trace);
    output->filtered = std::move(filtered);
  }
  return next;
}

std::string metrics_to_json(const IterationMetrics& m) {
  ordered_json o;
  o["iteration"] = m.iteration;
  o["seed_size"] = m.seed_size;
  o["training_docs"] = m.training_docs;
  o["paraphrases"] = m.paraphrases;
  o["rule_candidates"] = m.rule_candidates;
  o["rules_selected"] = m.rules_selected;
  o["rules_added"] = m.rules_added;
  o["candidates_received"] = m.candidates_received;
  o["candidates_duplicate"] = m.candidates_duplicate;
  o["kept"] = m.kept;
  o["rejected"] = {{"no_evidence", m.rejected_no_evidence},
                   {"ambiguous", m.rejected_ambiguous},
                   {"disagrees", m.rejected_disagrees}};
  o["rule_precision"] = m.rule_precision;
  o["validation_accuracy"] = m.validation_accuracy;
  o["validation_coverage"] = m.validation_coverage;
  return o.dump(2) + "\n";
}

namespace {

std::string rejections_to_jsonl(std::span<const Rejection> rejected, std::span<const std::string> labels) {
  std::string out;
  for (const auto& r : rejected) {
    ordered_json o;
    o["doc_id"] = r.doc.doc_id;
    o["label"] = labels[r.doc.label];
    o["reason"] = std::string(to_string(r.reason));
    out += o.dump() + "\n";
  }
  return out;
}

void write_iteration(const fs::path& dir, const BootstrapState& state, const IterationOutput& out, bool generated) {
  write_file(dir / "rules.json", rules_to_json(state.rule_set, state.seed.labels));
  write_file(dir / "trace.jsonl", trace_to_jsonl(out.trace));
  write_file(dir / "metrics.json", metrics_to_json(state.history.back()));
  if (generated) {
    write_file(dir / "kept.jsonl", docs_to_jsonl(out.filtered.kept, true));
    write_file(dir / "rejected.jsonl", rejections_to_jsonl(out.filtered.rejected, state.seed.labels));
  }
}

}  // namespace

BootstrapState run_bootstrap(const BootstrapConfig& config, const fs::path& out_dir) {
  check_config_paths(config);
  LoadOptions options;
  options.labels = config.labels;
  BootstrapState state;
  state.seed = load_corpus(config.seed_docs, config.seed_parses, options);
  for (auto& d : state.seed.docs) d.origin = Origin::gold;
  options.labels = state.seed.labels;
  const Corpus validation = config.validation_mode == ValidationMode::split
                                ? load_corpus(config.validation_docs, config.validation_parses, options)
                                : state.seed;
  state.theta = LabelModelParams::zeros(0, state.seed.num_labels());

  if (config.iterations == 0) {
    IterationOutput out;
    state = run_iteration(state, config, validation, &out, false);
    write_iteration(out_dir / "iter_0", state, out, false);
  }
  for (std::size_t n = 0; n < config.iterations; ++n) {
    IterationOutput out;
    state = run_iteration(state, config, validation, &out, true);
    write_iteration(out_dir / ("iter_" + std::to_string(n)), state, out, true);
  }

  ordered_json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["labels"] = state.seed.labels;
  summary["iterations"] = config.iterations;
  summary["validation_mode"] = config.validation_mode == ValidationMode::split ? "split" : "few_shot";
  ordered_json history = ordered_json::array();
  for (const auto& m : state.history) history.push_back(ordered_json::parse(metrics_to_json(m)));
  summary["history"] = std::move(history);
  summary["final_seed_size"] = state.seed.size();
  summary["final_rules"] = state.rule_set.size();
  std::vector<std::string> keys;
  for (const auto& r : state.rule_set) keys.push_back(r.key());
  summary["rule_keys"] = keys;
  write_file(out_dir / "run_summary.json", summary.dump(2) + "\n");
  return state;
}

}  // namespace arise
