#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>

#include "arise/bootstrap.hpp"
#include "arise/error.hpp"
#include "synthetic.hpp"

using namespace arise;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("arise-unit-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Seed, validation and a candidates file with embedded parses.
fs::path write_planted_run(const std::string& name, double candidate_noise = 0.2) {
  const fs::path dir = fresh_dir(name);
  synth::Rng rng(42);
  const auto seed = synth::planted_corpus(rng, 30, 0.0, "s");
  const auto val = synth::planted_corpus(rng, 15, 0.0, "v");
  auto cand = synth::planted_corpus(rng, 30, candidate_noise, "c");
  for (auto& d : cand.corpus.docs) d.origin = Origin::generated;
  save_corpus(seed.corpus, dir / "seed.jsonl", dir / "seed.conllu");
  save_corpus(val.corpus, dir / "val.jsonl", dir / "val.conllu");
  write_file(dir / "cand.jsonl", docs_to_jsonl(cand.corpus.docs, true));
  write_file(dir / "config.json", R"({
    "seed": {"docs": "seed.jsonl", "parses": "seed.conllu"},
    "validation": {"mode": "split", "docs": "val.jsonl", "parses": "val.conllu"},
    "generator": {"mode": "file", "path": "cand.jsonl"},
    "iterations": 2,
    "filtering": {"budget": 10}
  })");
  return dir;
}

std::vector<Rule> signature_rules() {
  std::vector<Rule> rules;
  for (std::size_t y = 0; y < 3; ++y) {
    const DepTree t = synth::planted_signature(y);
    Rule r = Rule::from_nodes({{NodePredicate::stem(t.token(0).stem), -1, ""},
                               {NodePredicate::stem(t.token(1).stem), 0, "obj"}});
    r.label = y;
    rules.push_back(std::move(r));
  }
  std::sort(rules.begin(), rules.end(), RuleKeyLess{});
  return rules;
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST(Config, ValidDocumentResolvesPaths) {
  const auto c = parse_config(R"({"seed":{"docs":"a.jsonl","parses":"a.conllu"},
                                  "generator":{"mode":"command","command":"cat"},
                                  "filtering":{"lambda":0.25},"label_model":{"epochs":10},"seed_rng":9})",
                              "/base");
  EXPECT_EQ(c.seed_docs, fs::path("/base/a.jsonl"));
  EXPECT_EQ(c.validation_mode, ValidationMode::few_shot);
  EXPECT_EQ(c.generator.mode, GeneratorSpec::Mode::command);
  EXPECT_DOUBLE_EQ(c.filtering.lambda, 0.25);
  EXPECT_EQ(c.label_model.epochs, 10u);
  EXPECT_EQ(c.seed_rng, 9u);
  EXPECT_EQ(c.iterations, 2u);
}

TEST(Config, ErrorsNameTheKey) {
  const std::string seed = R"("seed":{"docs":"a","parses":"b"},)";
  const std::string gen = R"("generator":{"mode":"file","path":"c"})";
  auto message = [](const std::string& doc) -> std::string {
    try {
      parse_config(doc, "/");
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message("{" + seed + gen + R"(,"bogus":1})").find("bogus"), std::string::npos);
  EXPECT_NE(message("{" + seed + gen + R"(,"filtering":{"lambda":"x"}})").find("lambda"), std::string::npos);
  EXPECT_NE(message("{" + seed + gen + R"(,"filtering":{"lambda":2}})").find("lambda"), std::string::npos);
  EXPECT_NE(message("{" + seed + gen + R"(,"iterations":-1})").find("iterations"), std::string::npos);
  EXPECT_NE(message("{" + gen + "}").find("seed"), std::string::npos);
  EXPECT_NE(message("{" + seed + R"("generator":{"mode":"magic"}})").find("generator.mode"), std::string::npos);
  EXPECT_NE(message("{" + seed + gen + R"(,"validation":{"mode":"split"}})").find("validation"), std::string::npos);
  EXPECT_THROW(parse_config("not json", "/"), ConfigError);
  EXPECT_THROW(load_config("/definitely/not/here.json"), ConfigError);
}

TEST(Config, MissingFilesAreReported) {
  const auto c = parse_config(R"({"seed":{"docs":"nope.jsonl","parses":"nope.conllu"},
                                  "generator":{"mode":"file","path":"c"}})",
                              "/nonexistent-dir");
  EXPECT_THROW(check_config_paths(c), ConfigError);
}

TEST(Filter, ReasonsAndKept) {
  const auto rules = signature_rules();
  auto theta = LabelModelParams::zeros(3, 3);
  for (std::size_t j = 0; j < 3; ++j) theta.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(rules[j].label)) = 2.0;

  auto doc_with = [](std::string id, std::size_t label, std::vector<DepTree> sentences) {
    LabeledDoc d;
    d.doc_id = std::move(id);
    d.label = label;
    d.sentences = std::move(sentences);
    return d;
  };
  const DepTree unrelated({make_token(1, "sleep", "sleep", "VERB", 0, "root")});
  const std::vector<LabeledDoc> cands{
      doc_with("keep", 0, {synth::planted_signature(0)}),
      doc_with("wrong", 1, {synth::planted_signature(0)}),
      doc_with("none", 0, {unrelated}),
      doc_with("tie", 0, {synth::planted_signature(0), synth::planted_signature(1)}),
  };
  const auto out = filter_candidates(cands, rules, theta, 3);
  ASSERT_EQ(out.kept.size(), 1u);
  EXPECT_EQ(out.kept[0].doc_id, "keep");
  ASSERT_EQ(out.rejected.size(), 3u);
  EXPECT_EQ(out.rejected[0].reason, RejectReason::disagrees);
  EXPECT_EQ(out.rejected[1].reason, RejectReason::no_evidence);
  EXPECT_EQ(out.rejected[2].reason, RejectReason::ambiguous);
  EXPECT_EQ(to_string(RejectReason::ambiguous), "ambiguous");
  EXPECT_THROW(filter_candidates(cands, rules, LabelModelParams::zeros(2, 3), 3), ContractError);
}

TEST(Paraphrase, OnlyChangedDocsAreEmitted) {
  LabeledDoc plain;
  plain.doc_id = "p";
  plain.sentences.push_back(synth::planted_signature(0));
  LabeledDoc modified = plain;
  modified.doc_id = "m";
  modified.label = 2;
  modified.sentences[0] = DepTree({make_token(1, "bakes", "bake", "VERB", 0, "root"),
                                   make_token(2, "fresh", "fresh", "ADJ", 3, "amod"),
                                   make_token(3, "bread", "bread", "NOUN", 1, "obj")});
  const std::vector<LabeledDoc> docs{plain, modified};
  const auto out = paraphrase_morph(docs);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].doc_id, "m~morph");
  EXPECT_EQ(out[0].label, 2u);
  EXPECT_EQ(out[0].origin, Origin::paraphrase);
  EXPECT_EQ(out[0].sentences[0].size(), 2u);
}

TEST(Generator, FileModeWithIterationPlaceholder) {
  const fs::path dir = fresh_dir("gen-file");
  synth::Rng rng(1);
  const auto c = synth::planted_corpus(rng, 6, 0.0, "g");
  write_file(dir / "cand_1.jsonl", docs_to_jsonl(c.corpus.docs, true));
  GeneratorSpec spec;
  spec.path = dir / "cand_{iter}.jsonl";
  GeneratorContext ctx{1, 0, c.corpus.labels};
  const auto docs = generate_candidates(spec, {}, ctx);
  ASSERT_EQ(docs.size(), 6u);
  for (const auto& d : docs) EXPECT_EQ(d.origin, Origin::generated);
  spec.per_label_quota = 1;
  EXPECT_EQ(generate_candidates(spec, {}, ctx).size(), 3u);
  ctx.iteration = 2;
  EXPECT_THROW(generate_candidates(spec, {}, ctx), GeneratorError);
  fs::remove_all(dir);
}

TEST(Generator, CommandModeSeesSeedAndEnvironment) {
  synth::Rng rng(1);
  const auto c = synth::planted_corpus(rng, 4, 0.0, "g");
  GeneratorSpec spec;
  spec.mode = GeneratorSpec::Mode::command;
  spec.command = "cat";
  const GeneratorContext ctx{3, 77, c.corpus.labels};
  const auto echoed = generate_candidates(spec, c.corpus.docs, ctx);
  ASSERT_EQ(echoed.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(echoed[i].doc_id, c.corpus.docs[i].doc_id);
    EXPECT_EQ(echoed[i].sentences, c.corpus.docs[i].sentences);
  }
  spec.command = R"(test "$ARISE_ITERATION" = 3 && test "$ARISE_SEED" = 77 && cat)";
  EXPECT_EQ(generate_candidates(spec, c.corpus.docs, ctx).size(), 4u);
  spec.command = "exit 3";
  try {
    generate_candidates(spec, c.corpus.docs, ctx);
    FAIL();
  } catch (const GeneratorError& e) {
    EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos);
  }
  spec.command = "echo '{broken'";
  EXPECT_THROW(generate_candidates(spec, c.corpus.docs, ctx), GeneratorError);
}

TEST(Iteration, SeedGrowsAndInputIsUntouched) {
  const fs::path dir = write_planted_run("iter");
  const auto config = load_config(dir / "config.json");
  BootstrapState state;
  state.seed = load_corpus(config.seed_docs, config.seed_parses);
  const Corpus validation = load_corpus(config.validation_docs, config.validation_parses, {state.seed.labels});
  const Corpus before = state.seed;
  IterationOutput out;
  const auto next = run_iteration(state, config, validation, &out);
  EXPECT_EQ(state.seed, before);
  EXPECT_EQ(next.iteration, 1u);
  EXPECT_GE(next.seed.size(), state.seed.size());
  EXPECT_EQ(next.seed.size(), state.seed.size() + out.filtered.kept.size());
  EXPECT_FALSE(next.rule_set.empty());
  EXPECT_EQ(next.theta.rules(), next.rule_set.size());
  const auto& m = next.history.at(0);
  EXPECT_EQ(m.candidates_received, 30u);
  EXPECT_EQ(m.kept + m.rejected_ambiguous + m.rejected_disagrees + m.rejected_no_evidence + m.candidates_duplicate,
            m.candidates_received);
  for (const auto& d : out.filtered.kept) EXPECT_EQ(d.origin, Origin::generated);

  const auto again = run_iteration(next, config, validation);
  EXPECT_GE(again.seed.size(), next.seed.size());
  // Re-offering the same file: every candidate already kept is now a duplicate.
  EXPECT_GE(again.history.back().candidates_duplicate, m.kept);
  fs::remove_all(dir);
}

TEST(Bootstrap, ZeroIterationsWritesRulesOnly) {
  const fs::path dir = write_planted_run("zero");
  auto config = load_config(dir / "config.json");
  config.iterations = 0;
  const auto state = run_bootstrap(config, dir / "out");
  EXPECT_TRUE(fs::exists(dir / "out" / "iter_0" / "rules.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "iter_0" / "metrics.json"));
  EXPECT_FALSE(fs::exists(dir / "out" / "iter_0" / "kept.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "run_summary.json"));
  EXPECT_EQ(state.seed.size(), 30u);
  fs::remove_all(dir);
}

TEST(Bootstrap, RunsAreByteIdentical) {
  const fs::path dir = write_planted_run("det");
  const auto config = load_config(dir / "config.json");
  run_bootstrap(config, dir / "a");
  run_bootstrap(config, dir / "b");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 5u);
  fs::remove_all(dir);
}
