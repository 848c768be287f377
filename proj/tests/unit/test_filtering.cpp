#include <gtest/gtest.h>

#include "arise/error.hpp"
#include "arise/filtering.hpp"
#include "arise/scoring.hpp"
#include "synthetic.hpp"

using namespace arise;

namespace {

std::vector<bool> fires(const Rule& r, const Corpus& c) {
  std::vector<bool> out;
  for (const auto& d : c.docs) out.push_back(matches(r, d));
  return out;
}

struct Fixture {
  Corpus corpus;
  std::vector<Rule> rules;
};

Fixture random_fixture(synth::Rng& rng, std::size_t rules) {
  Fixture f;
  f.corpus = synth::random_corpus(rng, 30, 3, 8, 8);
  const Lexicon lex = Lexicon::from_corpus(f.corpus);
  std::uniform_int_distribution<std::size_t> lab(0, 2);
  while (f.rules.size() < rules) {
    Rule r = synth::random_rule(rng, lex, CoreRelation::nsubj, 3);
    r.label = lab(rng);
    f.rules.push_back(std::move(r));
  }
  return f;
}

double brute_gc(const std::vector<std::size_t>& s, const SimilarityMatrix& sim, double lambda) {
  double rep = 0, red = 0;
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    for (auto j : s) rep += sim(i, static_cast<Eigen::Index>(j));
  }
  for (auto i : s) {
    for (auto j : s) red += sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return rep - lambda * red;
}

SimilarityMatrix random_psd_like(synth::Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SimilarityMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
  }
  return m;
}

}  // namespace

TEST(Stats, MatchBruteForce) {
  synth::Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = random_fixture(rng, 6);
    const FiringTable table(f.rules, f.corpus);
    const double n = static_cast<double>(f.corpus.size());
    for (std::size_t i = 0; i < f.rules.size(); ++i) {
      const auto fi = fires(f.rules[i], f.corpus);
      double fired = 0, right = 0;
      for (std::size_t d = 0; d < fi.size(); ++d) {
        fired += fi[d];
        right += fi[d] && f.corpus.docs[d].label == f.rules[i].label;
      }
      const double want_p = fired == 0 ? 0.0 : right / fired;
      EXPECT_DOUBLE_EQ(precision(f.rules[i], f.corpus), want_p);
      EXPECT_DOUBLE_EQ(table.precision(i), want_p);
      for (std::size_t j = 0; j < f.rules.size(); ++j) {
        const auto fj = fires(f.rules[j], f.corpus);
        double either = 0, both = 0;
        for (std::size_t d = 0; d < fi.size(); ++d) {
          either += fi[d] || fj[d];
          both += fi[d] && fj[d];
        }
        const double agree = both == 0 || f.rules[i].label != f.rules[j].label ? 0.0 : 1.0;
        EXPECT_DOUBLE_EQ(coverage(f.rules[i], f.rules[j], f.corpus), either / n);
        EXPECT_DOUBLE_EQ(table.coverage(i, j), either / n);
        EXPECT_DOUBLE_EQ(agreement(f.rules[i], f.rules[j], f.corpus), agree);
        EXPECT_DOUBLE_EQ(table.agreement(i, j), agree);
      }
    }
  }
}

TEST(Stats, EmptyDataIsAnError) {
  const Corpus empty;
  const Rule r = Rule::supremum(CoreRelation::obj);
  EXPECT_THROW(coverage(r, r, empty), ContractError);
  EXPECT_DOUBLE_EQ(precision(r, empty), 0.0);
}

TEST(Similarity, FollowsDefinition) {
  synth::Rng rng(9);
  const Fixture f = random_fixture(rng, 7);
  SimilarityParams p;
  p.coverage_weight = 0.7;
  p.agreement_weight = 1.3;
  const auto sim = similarity_matrix(f.rules, f.corpus, p);
  ASSERT_EQ(sim.rows(), 7);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      const double want = precision(f.rules[i], f.corpus) + precision(f.rules[j], f.corpus) +
                          0.7 * coverage(f.rules[i], f.rules[j], f.corpus) +
                          1.3 * agreement(f.rules[i], f.rules[j], f.corpus);
      EXPECT_NEAR(sim(i, j), want, 1e-12);
      EXPECT_DOUBLE_EQ(sim(i, j), sim(j, i));
    }
  }
}

TEST(Similarity, ParamsValidate) {
  SimilarityParams p;
  p.lambda = 1.5;
  EXPECT_THROW(p.validate(), ContractError);
  p = {};
  p.coverage_weight = -1;
  EXPECT_THROW(p.validate(), ContractError);
  EXPECT_NO_THROW(SimilarityParams{}.validate());
}

TEST(GraphCut, ValueIsTheDoubleSum) {
  synth::Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto sim = random_psd_like(rng, 8);
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < 8; ++i) {
      if (rng() % 2) s.push_back(i);
    }
    EXPECT_NEAR(gc_value(s, sim, 0.3), brute_gc(s, sim, 0.3), 1e-9);
  }
}

TEST(Greedy, GainsMatchRecomputation) {
  synth::Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 3 + rng() % 10;
    const auto sim = random_psd_like(rng, n);
    const double lambda = 0.1 * static_cast<double>(rng() % 6);
    const auto result = greedy_maximize(sim, lambda, 3);
    std::vector<std::size_t> s;
    for (const auto& step : result.steps) {
      const double before = brute_gc(s, sim, lambda);
      s.push_back(step.index);
      EXPECT_NEAR(step.gain, brute_gc(s, sim, lambda) - before, 1e-9);
      EXPECT_GT(step.gain, 0.0);
    }
    EXPECT_EQ(s, result.selected);
  }
}

TEST(Greedy, PicksTheBestMarginalElementEachStep) {
  synth::Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    const auto sim = random_psd_like(rng, 9);
    const auto result = greedy_maximize(sim, 0.5, 4);
    std::vector<std::size_t> s;
    for (const auto& step : result.steps) {
      double best = -1e300;
      std::size_t arg = 0;
      for (std::size_t e = 0; e < 9; ++e) {
        if (std::find(s.begin(), s.end(), e) != s.end()) continue;
        auto with = s;
        with.push_back(e);
        const double g = brute_gc(with, sim, 0.5) - brute_gc(s, sim, 0.5);
        if (g > best + 1e-12) {
          best = g;
          arg = e;
        }
      }
      EXPECT_EQ(step.index, arg);
      s.push_back(step.index);
    }
  }
}

TEST(Greedy, BudgetWarmStartAndStopping) {
  synth::Rng rng(5);
  const auto sim = random_psd_like(rng, 6);
  EXPECT_TRUE(greedy_maximize(sim, 0.5, 0).selected.empty());
  const std::vector<std::size_t> warm{4, 1};
  const auto r = greedy_maximize(sim, 0.5, 2, warm);
  ASSERT_GE(r.selected.size(), 2u);
  EXPECT_EQ(r.selected[0], 4u);
  EXPECT_EQ(r.selected[1], 1u);
  EXPECT_LE(r.steps.size(), 2u);
  // lambda = 1 on an all-ones matrix: gain of the first pick is n - 1 > 0,
  // the next pick gains n - 3, and so on.
  const SimilarityMatrix ones = SimilarityMatrix::Ones(4, 4);
  const auto all = greedy_maximize(ones, 1.0, 10);
  ASSERT_EQ(all.steps.size(), 2u);
  EXPECT_EQ(all.selected, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(all.steps[0].gain, 3.0);
  EXPECT_DOUBLE_EQ(all.steps[1].gain, 1.0);
}

TEST(Greedy, ZeroLambdaFillsTheBudget) {
  synth::Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    const auto sim = random_psd_like(rng, 10);
    EXPECT_EQ(greedy_maximize(sim, 0.0, 4).selected.size(), 4u);
    EXPECT_EQ(greedy_maximize(sim, 0.0, 40).selected.size(), 10u);
  }
}

TEST(Select, WarmStartWinsAndIsKeptFirst) {
  synth::Rng rng(30);
  Fixture f = random_fixture(rng, 8);
  Rule warm = f.rules[3];
  warm.label = (warm.label + 1) % 3;
  const std::vector<Rule> warm_start{warm};
  SimilarityParams p;
  p.budget = 3;
  const auto sel = greedy_select(f.rules, warm_start, f.corpus, p);
  ASSERT_FALSE(sel.rules.empty());
  EXPECT_EQ(sel.rules[0].key(), warm.key());
  EXPECT_EQ(sel.rules[0].label, warm.label);
  EXPECT_LE(sel.rules.size(), 4u);
  EXPECT_EQ(sel.trace.size() + 1, sel.rules.size());
  for (std::size_t i = 0; i < sel.trace.size(); ++i) {
    EXPECT_EQ(sel.trace[i].step, i + 1);
    EXPECT_EQ(sel.trace[i].rule_key, sel.rules[i + 1].key());
  }
  const auto again = greedy_select(f.rules, warm_start, f.corpus, p);
  ASSERT_EQ(again.rules.size(), sel.rules.size());
  for (std::size_t i = 0; i < sel.rules.size(); ++i) EXPECT_EQ(again.rules[i].key(), sel.rules[i].key());
}

TEST(Select, InputOrderDoesNotMatter) {
  synth::Rng rng(31);
  Fixture f = random_fixture(rng, 10);
  SimilarityParams p;
  p.budget = 4;
  const auto a = greedy_select(f.rules, {}, f.corpus, p);
  std::reverse(f.rules.begin(), f.rules.end());
  const auto b = greedy_select(f.rules, {}, f.corpus, p);
  ASSERT_EQ(a.rules.size(), b.rules.size());
  for (std::size_t i = 0; i < a.rules.size(); ++i) EXPECT_EQ(a.rules[i].key(), b.rules[i].key());
}
