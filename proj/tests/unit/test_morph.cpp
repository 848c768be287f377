#include <gtest/gtest.h>

#include "arise/morph.hpp"
#include "synthetic.hpp"

using namespace arise;

TEST(Morph, BigDogsBark) {
  const DepTree t({make_token(1, "the", "the", "DET", 3, "det"), make_token(2, "big", "big", "ADJ", 3, "amod"),
                   make_token(3, "dogs", "dog", "NOUN", 4, "nsubj"), make_token(4, "bark", "bark", "VERB", 0, "root")});
  const DepTree m = morph_tree(t);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.token(0).form, "dogs");
  EXPECT_EQ(m.token(0).head, 2);
  EXPECT_EQ(m.token(1).form, "bark");
}

TEST(Morph, NoPeripheralRelationsIsIdentity) {
  const DepTree t({make_token(1, "dogs", "dog", "NOUN", 2, "nsubj"), make_token(2, "bark", "bark", "VERB", 0, "root")});
  EXPECT_EQ(morph_tree(t), t);
}

TEST(Morph, PeripheralRootIsLeftAlone) {
  const DepTree t({make_token(1, "very", "very", "ADV", 0, "advmod"), make_token(2, "much", "much", "ADV", 1, "advmod")});
  EXPECT_EQ(morph_tree(t), t);
}

// Structural validator: the result is a valid tree whose tokens are exactly
// the input tokens with no peripheral edge on their path to the root.
TEST(Morph, RandomTreesKeepExactlyTheCoreSkeleton) {
  synth::Rng rng(14);
  const auto peripheral = default_peripheral_relations();
  for (int i = 0; i < 300; ++i) {
    const DepTree t = synth::random_tree(rng, 1 + static_cast<std::size_t>(i % 12));
    const DepTree m = morph_tree(t);
    if (peripheral.count(t.token(t.root()).relation)) {
      EXPECT_EQ(m, t);
      continue;
    }
    std::vector<std::string> expected;
    for (std::size_t k = 0; k < t.size(); ++k) {
      bool keep = true;
      for (std::size_t cur = k; t.parent(cur); cur = *t.parent(cur)) keep = keep && !peripheral.count(t.token(cur).relation);
      if (keep) expected.push_back(t.token(k).form + "@" + std::to_string(k));
    }
    EXPECT_FALSE(tree_violation(m.tokens()).has_value());
    ASSERT_EQ(m.size(), expected.size());
    for (const auto& tok : m.tokens()) {
      if (tok.head == 0) continue;
      EXPECT_FALSE(peripheral.count(tok.relation));
    }
  }
}
