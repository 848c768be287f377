#include <gtest/gtest.h>

#include "arise/error.hpp"
#include "arise/features.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace arise;

namespace {

DepTree she_gave_him_books() {
  return DepTree({make_token(1, "She", "she", "PRON", 2, "nsubj"), make_token(2, "gave", "give", "VERB", 0, "root"),
                  make_token(3, "him", "he", "PRON", 2, "iobj"), make_token(4, "books", "book", "NOUN", 2, "obj")});
}

}  // namespace

TEST(Features, SingleEdgeTree) {
  const DepTree t({make_token(1, "dogs", "dog", "NOUN", 2, "nsubj"), make_token(2, "bark", "bark", "VERB", 0, "root")});
  const auto f = extract_subtrees(t);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].core, CoreRelation::nsubj);
  EXPECT_EQ(f[0].key(), R"("bark"/"bark"/"VERB"(nsubj:"dogs"/"dog"/"NOUN"))");
}

TEST(Features, NoCoreRelationGivesNothing) {
  const DepTree t({make_token(1, "the", "the", "DET", 2, "det"), make_token(2, "end", "end", "NOUN", 0, "root")});
  EXPECT_TRUE(extract_subtrees(t).empty());
}

TEST(Features, DitransitiveMatchesBruteForce) {
  const DepTree t = she_gave_him_books();
  EXPECT_EQ(synth::oracle_keys_of_extracted(t, 3), synth::brute_force_subtrees(t, 3));
  // Three single-edge features; every 3-node set has two core edges.
  EXPECT_EQ(extract_subtrees(t).size(), 3u);
}

TEST(Features, RandomTreesMatchBruteForce) {
  synth::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const DepTree t = synth::random_tree(rng, 1 + static_cast<std::size_t>(i % 12), 30);
    for (std::size_t k : {2u, 3u}) {
      ASSERT_EQ(synth::oracle_keys_of_extracted(t, k), synth::brute_force_subtrees(t, k)) << "tree " << i;
    }
  }
}

TEST(Features, RejectsBadMaxNodes) {
  EXPECT_THROW(extract_subtrees(she_gave_him_books(), 1), ContractError);
  EXPECT_THROW(extract_subtrees(she_gave_him_books(), 4), ContractError);
}

TEST(Features, PartitionIsExhaustiveAndExclusive) {
  const auto empty = partition_by_core_relation({});
  EXPECT_EQ(empty.size(), 6u);
  for (const auto& [rel, part] : empty) EXPECT_TRUE(part.empty());

  synth::Rng rng(4);
  const Corpus c = synth::random_corpus(rng, 20, 2);
  const auto features = extract_features(c);
  const auto parts = partition_by_core_relation(features);
  std::size_t total = 0;
  for (const auto& [rel, part] : parts) {
    for (const auto& f : part) EXPECT_EQ(f.core, rel);
    total += part.size();
  }
  EXPECT_EQ(total, features.size());
}

TEST(Features, SupportAndSelfCoverage) {
  synth::Rng rng(9);
  const Corpus c = synth::random_corpus(rng, 30, 3, 9, 10);
  const auto features = extract_features(c);
  ASSERT_FALSE(features.empty());
  for (const auto& f : features) {
    const auto cov = feature_coverage(f, c);
    for (const auto& id : f.support) EXPECT_TRUE(cov.count(id)) << f.key() << " " << id;
    // Oracle: brute-force search of each document.
    std::set<std::string> brute;
    const Rule r = f.as_rule();
    for (const auto& d : c.docs) {
      for (const auto& s : d.sentences) {
        if (synth::brute_force_matches(r, s)) brute.insert(d.doc_id);
      }
    }
    EXPECT_EQ(cov, brute) << f.key();
  }
}

TEST(Features, RoleSpecificExtraction) {
  synth::Rng rng(2);
  const Corpus c = synth::random_corpus(rng, 10, 2, 8, 10, true);
  for (const auto& f : extract_features(c, "premise")) EXPECT_EQ(f.role, "premise");
  const auto all = extract_features(c);
  for (const auto& f : all) EXPECT_TRUE(f.role.empty());
}

TEST(Features, AbsentVocabularyCoversNothing) {
  synth::Rng rng(2);
  const Corpus c = synth::random_corpus(rng, 10, 2);
  const DepTree t({make_token(1, "zzz", "zzz", "X", 2, "obj"), make_token(2, "qqq", "qqq", "X", 0, "root")});
  const auto f = extract_subtrees(t);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(feature_coverage(f[0], c).empty());
}

TEST(Features, JsonListsKeysAndSupport) {
  synth::Rng rng(6);
  const Corpus c = synth::random_corpus(rng, 5, 2);
  const auto features = extract_features(c);
  const auto j = nlohmann::json::parse(features_to_json(features));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    EXPECT_EQ(j[i]["key"], features[i].key());
    EXPECT_EQ(j[i]["support"].size(), features[i].support.size());
  }
}
