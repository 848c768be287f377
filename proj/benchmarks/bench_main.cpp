#include <benchmark/benchmark.h>

#include <random>

#include "arise/features.hpp"
#include "arise/filtering.hpp"
#include "arise/label_model.hpp"
#include "arise/lattice.hpp"
#include "arise/scoring.hpp"

using namespace arise;

namespace {

// Chain-and-fan trees over a small vocabulary; every third edge is obj.
Corpus make_corpus(std::size_t docs, std::size_t tokens, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const char* rels[] = {"obj", "nsubj", "amod", "det", "obl"};
  Corpus c;
  c.labels = {"a", "b", "c"};
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<Token> t;
    for (std::size_t i = 0; i < tokens; ++i) {
      const std::string w = "w" + std::to_string(rng() % 40);
      const int head = i == 0 ? 0 : static_cast<int>(1 + rng() % i);
      t.push_back(make_token(static_cast<int>(i + 1), w, w, i % 2 ? "NOUN" : "VERB", head,
                             i == 0 ? "root" : rels[rng() % 5]));
    }
    LabeledDoc doc;
    doc.doc_id = std::to_string(d);
    doc.label = rng() % 3;
    doc.sentences.emplace_back(std::move(t));
    c.docs.push_back(std::move(doc));
  }
  return c;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const Corpus c = make_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractFeatures)->Arg(100)->Arg(1000);

void BM_Matching(benchmark::State& state) {
  const Corpus c = make_corpus(1000, 12, 2);
  const auto features = extract_features(c);
  std::vector<Rule> rules;
  for (std::size_t i = 0; i < features.size() && rules.size() < 50; i += 7) rules.push_back(features[i].as_rule());
  for (auto _ : state) {
    std::size_t fired = 0;
    for (const auto& r : rules) fired += firing_docs(r, c).size();
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rules.size() * c.size()));
}
BENCHMARK(BM_Matching);

void BM_Lgg(benchmark::State& state) {
  const Corpus c = make_corpus(200, 10, 3);
  const Lexicon lex = Lexicon::from_corpus(c);
  const auto parts = partition_by_core_relation(extract_features(c));
  const auto& obj = parts.at(CoreRelation::obj);
  std::size_t i = 0;
  for (auto _ : state) {
    const Rule a = obj[i % obj.size()].as_rule();
    const Rule b = obj[(i * 7 + 3) % obj.size()].as_rule();
    benchmark::DoNotOptimize(lgg(a, b, lex));
    ++i;
  }
}
BENCHMARK(BM_Lgg);

void BM_InduceCandidates(benchmark::State& state) {
  const Corpus c = make_corpus(static_cast<std::size_t>(state.range(0)), 8, 4);
  for (auto _ : state) benchmark::DoNotOptimize(induce_rule_candidates(c));
}
BENCHMARK(BM_InduceCandidates)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_GreedySelect(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  SimilarityMatrix sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) sim(i, j) = sim(j, i) = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(greedy_maximize(sim, 0.5, 50));
}
BENCHMARK(BM_GreedySelect)->Arg(200)->Arg(2000);

void BM_TrainLabelModel(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const std::size_t rows = 2000, rules = 40, k = 3;
  std::vector<std::size_t> labels, gold;
  for (std::size_t j = 0; j < rules; ++j) labels.push_back(j % k);
  LabelMatrix m(rows, labels, k);
  for (std::size_t i = 0; i < rows; ++i) {
    gold.push_back(rng() % k);
    for (std::size_t j = 0; j < rules; ++j) m.set_fired(i, j, rng() % 10 == 0);
  }
  TrainConfig cfg;
  cfg.epochs = 100;
  for (auto _ : state) benchmark::DoNotOptimize(train_label_model(m, gold, cfg));
}
BENCHMARK(BM_TrainLabelModel)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
