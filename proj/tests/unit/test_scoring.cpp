#include <gtest/gtest.h>

#include <cmath>

#include "arise/error.hpp"
#include "arise/features.hpp"
#include "arise/scoring.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace arise;

namespace {

LabeledDoc vo_doc(std::string id, std::size_t label, const std::string& verb, const std::string& noun) {
  LabeledDoc d;
  d.doc_id = std::move(id);
  d.label = label;
  d.sentences.emplace_back(std::vector<Token>{make_token(1, verb, verb, "VERB", 0, "root"),
                                              make_token(2, noun, noun, "NOUN", 1, "obj")});
  return d;
}

Rule vo_rule(const std::string& verb, const std::string& noun) {
  return Rule::from_nodes({{NodePredicate::word(verb), -1, ""}, {NodePredicate::word(noun), 0, "obj"}});
}

double oracle_pmi(const Rule& r, std::size_t y, const Corpus& c) {
  double fired = 0, fired_y = 0, docs_y = 0;
  for (const auto& d : c.docs) {
    bool f = false;
    for (const auto& s : d.sentences) f = f || synth::brute_force_matches(r, s);
    fired += f;
    fired_y += f && d.label == y;
    docs_y += d.label == y;
  }
  if (fired_y == 0) return kNegInf;
  return std::log(static_cast<double>(c.size()) * fired_y / (fired * docs_y));
}

}  // namespace

TEST(Pmi, LnTwoCase) {
  Corpus c;
  c.labels = {"a", "b"};
  c.docs = {vo_doc("1", 0, "eat", "bread"), vo_doc("2", 0, "eat", "soup"), vo_doc("3", 1, "kick", "ball"),
            vo_doc("4", 1, "kick", "can")};
  Rule r = vo_rule("eat", "bread");
  EXPECT_NEAR(pmi(r, 0, c), std::log(2.0), 1e-12);
  EXPECT_EQ(pmi(r, 1, c), kNegInf);
  const auto v = label_rule(r, c);
  EXPECT_EQ(r.label, 0u);
  EXPECT_NEAR(r.lpmi, std::log(2.0), 1e-12);
  EXPECT_EQ(v.scores.size(), 2u);
}

TEST(Pmi, IndependenceGivesZero) {
  EXPECT_DOUBLE_EQ(pmi_from_counts(8, 4, 2, 1), 0.0);
  EXPECT_DOUBLE_EQ(pmi_from_counts(10, 5, 10, 5), 0.0);
}

TEST(Pmi, UndefinedCases) {
  EXPECT_THROW(pmi_from_counts(4, 2, 0, 0), ScoringError);
  EXPECT_EQ(pmi_from_counts(4, 0, 2, 0), kNegInf);
  EXPECT_THROW(pmi_from_counts(4, 0, 2, 1), ScoringError);
  Corpus c;
  c.labels = {"a"};
  c.docs = {vo_doc("1", 0, "eat", "bread")};
  EXPECT_THROW(pmi(vo_rule("kick", "ball"), 0, c), ScoringError);
  EXPECT_THROW(pmi(vo_rule("eat", "bread"), 3, c), ContractError);
}

TEST(Pmi, TiesGoToLowestLabel) {
  Corpus c;
  c.labels = {"a", "b", "c"};
  c.docs = {vo_doc("1", 0, "eat", "x"), vo_doc("2", 1, "eat", "x"), vo_doc("3", 2, "run", "y")};
  Rule r = vo_rule("eat", "x");
  for (int i = 0; i < 5; ++i) {
    label_rule(r, c);
    EXPECT_EQ(r.label, 0u);
  }
}

TEST(Pmi, MatchesOracleOnRandomCases) {
  synth::Rng rng(3);
  std::size_t checked = 0;
  while (checked < 50) {
    const Corpus c = synth::random_corpus(rng, 25, 3, 8, 8);
    const Lexicon lex = Lexicon::from_corpus(c);
    const Rule r = synth::random_rule(rng, lex, CoreRelation::nsubj, 2);
    if (firing_docs(r, c).empty()) continue;
    bool any_empty = false;
    for (std::size_t y = 0; y < 3; ++y) {
      any_empty = any_empty || std::none_of(c.docs.begin(), c.docs.end(), [&](const auto& d) { return d.label == y; });
    }
    if (any_empty) continue;
    for (std::size_t y = 0; y < 3; ++y) {
      const double want = oracle_pmi(r, y, c);
      const double got = pmi(r, y, c);
      if (std::isinf(want)) {
        EXPECT_EQ(got, want);
      } else {
        EXPECT_NEAR(got, want, 1e-12);
      }
    }
    ++checked;
  }
}

TEST(Induce, AdmittedRulesBeatBothParents) {
  synth::Rng rng(8);
  std::size_t admitted = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto planted = synth::planted_corpus(rng, 45, 0.3, "p");
    const Corpus& c = planted.corpus;
    const Lexicon lex = Lexicon::from_corpus(c);
    const auto parts = partition_by_core_relation(extract_features(c));
    for (const auto& [rel, part] : parts) {
      const Lattice l = build_lattice(rel, part, lex);
      const auto out = induce_candidates(l, c);
      std::map<std::string, Rule> by_key;
      for (const auto& cand : out) by_key.emplace(cand.rule.key(), cand.rule);
      for (const auto& cand : out) {
        EXPECT_FALSE(cand.rule.is_supremum());
        if (!cand.parents) continue;
        ++admitted;
        Rule self = cand.rule;
        Rule a = by_key.at(cand.parents->first);
        Rule b = by_key.at(cand.parents->second);
        label_rule(self, c);
        label_rule(a, c);
        label_rule(b, c);
        EXPECT_GT(self.lpmi, a.lpmi);
        EXPECT_GT(self.lpmi, b.lpmi);
        EXPECT_TRUE(subsumes(self, a, lex));
        EXPECT_TRUE(subsumes(self, b, lex));
      }
    }
  }
  EXPECT_GT(admitted, 0u);
}

TEST(Induce, OutputIsSortedAndLabelled) {
  synth::Rng rng(2);
  const Corpus c = synth::random_corpus(rng, 30, 2, 8, 10);
  const auto rules = induce_rule_candidates(c);
  ASSERT_FALSE(rules.empty());
  for (std::size_t i = 1; i < rules.size(); ++i) EXPECT_LT(rules[i - 1].key(), rules[i].key());
  for (const auto& r : rules) {
    EXPECT_EQ(r.pmi.size(), 2u);
    EXPECT_FALSE(std::isinf(r.lpmi) && r.lpmi < 0);
  }
}

TEST(Pairs, JointPmiAndAdmission) {
  Corpus c;
  c.labels = {"no", "yes"};
  c.roles = {"hypothesis", "premise"};
  auto pair_doc = [](std::string id, std::size_t label, const std::string& pv, const std::string& hv) {
    LabeledDoc d = vo_doc(std::move(id), label, pv, "it");
    d.sentences.push_back(vo_doc("", 0, hv, "it").sentences[0]);
    d.roles = {"premise", "hypothesis"};
    return d;
  };
  c.docs = {pair_doc("1", 1, "buy", "own"), pair_doc("2", 0, "buy", "sell"), pair_doc("3", 0, "see", "own"),
            pair_doc("4", 0, "see", "sell")};
  auto role_rule = [](const std::string& v, const std::string& role) {
    return Rule::from_nodes({{NodePredicate::word(v), -1, ""}, {NodePredicate::word("it"), 0, "obj"}}, role);
  };
  Rule p = role_rule("buy", "premise");
  Rule h = role_rule("own", "hypothesis");
  label_rule(p, c);
  label_rule(h, c);
  EXPECT_NEAR(p.lpmi, std::log(2.0), 1e-12);
  const RulePair rp{p, h};
  const auto v = joint_pmi(rp, c);
  EXPECT_EQ(v.label, 1u);
  EXPECT_NEAR(v.lpmi, std::log(4.0), 1e-12);

  const std::vector<Rule> ps{p}, hs{h};
  const auto kept = pair_rules(ps, hs, c, 5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].key(), rp.key());
  EXPECT_TRUE(pair_rules(ps, hs, c, 0).empty());

  Corpus flat;
  flat.labels = {"a"};
  EXPECT_THROW(pair_rules(ps, hs, flat, 5), ContractError);
  EXPECT_THROW(joint_pmi(RulePair{role_rule("zzz", "premise"), h}, c), ScoringError);
}
