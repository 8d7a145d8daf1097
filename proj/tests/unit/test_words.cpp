#include <gtest/gtest.h>

#include "avt/analytics/words.hpp"

using namespace avt;
using namespace avt::analytics;

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("A man, playing-the GUITAR!"),
            (std::vector<std::string>{"a", "man", "playing", "the", "guitar"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
  EXPECT_EQ(tokenize("caf\xc3\xa9 2 dogs"), (std::vector<std::string>{"caf\xc3\xa9", "2", "dogs"}));
}

TEST(WordStats, HandComputedExample) {
  const std::vector<std::string> caps{"a dog runs on the grass", "the dog the dog barks", "a red car"};
  const auto r = word_stats(caps, default_stoplist(), 10);
  EXPECT_EQ(r.captions, 3u);
  // word counts 6, 5, 3
  EXPECT_NEAR(r.mean_words, 14.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.std_words, std::sqrt((36.0 + 25.0 + 9.0) / 3.0 - (14.0 / 3.0) * (14.0 / 3.0)), 1e-12);
  EXPECT_EQ(r.min_words, 3u);
  EXPECT_EQ(r.max_words, 6u);
  // a dog runs on the grass barks red car
  EXPECT_EQ(r.distinct_words, 9u);
  EXPECT_EQ(r.distinct_after_stoplist, 6u);
  ASSERT_FALSE(r.top.empty());
  EXPECT_EQ(r.top[0].word, "dog");
  EXPECT_EQ(r.top[0].captions, 2u);
  EXPECT_NEAR(r.top[0].percent, 200.0 / 3.0, 1e-12);
  for (const auto& w : r.top) {
    EXPECT_FALSE(default_stoplist().contains(w.word));
    if (w.word != "dog") {
      EXPECT_EQ(w.captions, 1u);
    }
  }
}

TEST(WordStats, PresenceNotFrequency) {
  const std::vector<std::string> once{"dog cat"};
  const std::vector<std::string> many{"dog dog dog dog cat"};
  EXPECT_EQ(word_stats(once, {}, 5).top[0].captions, 1u);
  const auto r = word_stats(many, {}, 5);
  for (const auto& w : r.top) EXPECT_EQ(w.captions, 1u);
}

TEST(WordStats, TopKOrderingIsStable) {
  const std::vector<std::string> caps{"zeta alpha", "zeta beta", "gamma"};
  const auto r = word_stats(caps, {}, 3);
  ASSERT_EQ(r.top.size(), 3u);
  EXPECT_EQ(r.top[0].word, "zeta");
  EXPECT_EQ(r.top[1].word, "alpha");
  EXPECT_EQ(r.top[2].word, "beta");
}

TEST(WordStats, MergeEqualsSinglePass) {
  const std::vector<std::string> caps{"one two", "two three four", "", "five"};
  WordStatsAccumulator whole, a, b;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    whole.add(caps[i]);
    (i < 2 ? a : b).add(caps[i]);
  }
  a.merge(b);
  EXPECT_TRUE(a == whole);
  EXPECT_THROW(WordStatsAccumulator{}.report({}, 1), Error);
}
