#include <random>

#include <gtest/gtest.h>

#include "newsload/textprep.hpp"
#include "test_util.hpp"

using namespace newsload;
using Words = std::vector<std::string>;

TEST(Tokenize, LettersOnlyAndSentenceCount) {
  auto t = tokenize("The CAT runs 42 km.");
  EXPECT_EQ(t.tokens, (Words{"the", "cat", "runs", "km"}));
  EXPECT_EQ(t.sentences, 1u);
}

TEST(Tokenize, EmptyText) {
  auto t = tokenize("");
  EXPECT_TRUE(t.tokens.empty());
  EXPECT_EQ(t.sentences, 0u);
}

TEST(Tokenize, HyphenAndDigitsSplit) {
  auto t = tokenize("COVID-19 lockdown!");
  EXPECT_EQ(t.tokens, (Words{"covid", "lockdown"}));
  EXPECT_EQ(t.sentences, 1u);
}

TEST(Tokenize, ApostrophesSplitAndSentenceBoundaries) {
  auto t = tokenize("It's over. Really?! yes... no.5 more");
  EXPECT_EQ(t.tokens, (Words{"it", "s", "over", "really", "yes", "no", "more"}));
  // "over." "Really?!" "yes..." end sentences; "no.5" does not; the tail counts.
  EXPECT_EQ(t.sentences, 4u);
}

TEST(Tokenize, NonAsciiLettersKeptAndLowered) {
  auto t = tokenize("ÉLODIE met Zoë in Łódź");
  EXPECT_EQ(t.tokens, (Words{"élodie", "met", "zoë", "in", "łódź"}));
  EXPECT_EQ(utf8_length("łódź"), 4u);
}

TEST(Normalize, RemovesStopwordsAndShortTokens) {
  StopwordSet stop({"the"});
  Words raw = {"the", "cat", "runs", "km"};
  EXPECT_EQ(normalize(raw, stop), (Words{"cat", "runs"}));
  Words tiny = {"a", "an"};
  EXPECT_TRUE(normalize(tiny, stop).empty());
}

TEST(Normalize, DropsTokensWithDigits) {
  StopwordSet stop({"the"});
  Words raw = {"abc1", "covid19", "fine"};
  EXPECT_EQ(normalize(raw, stop), (Words{"fine"}));
}

TEST(Normalize, ShortLengthCountsCodePoints) {
  StopwordSet stop({"the"});
  Words raw = {"öl", "été"};
  EXPECT_EQ(normalize(raw, stop), (Words{"été"}));
}

TEST(Normalize, Idempotent) {
  auto stop = StopwordSet::english();
  auto raw = tokenize("The quick brown fox jumps over the lazy dog, and then it rests.").tokens;
  auto once = normalize(raw, stop);
  EXPECT_EQ(normalize(once, stop), once);
}

TEST(Stopwords, EmbeddedListIsLowercaseAndSized) {
  auto stop = StopwordSet::english();
  EXPECT_GE(stop.size(), 150u);
  EXPECT_LE(stop.size(), 220u);
  EXPECT_TRUE(stop.contains("the"));
  EXPECT_TRUE(stop.contains("and"));
  EXPECT_FALSE(stop.contains("electricity"));
}

TEST(Stopwords, FromFileOverride) {
  testutil::TempDir dir;
  testutil::write_file(dir / "stop.txt", "# custom\nStorm\n\nwind\n");
  auto stop = StopwordSet::from_file(dir / "stop.txt");
  EXPECT_EQ(stop.size(), 2u);
  EXPECT_TRUE(stop.contains("storm"));
  Words raw = {"storm", "wind", "rain"};
  EXPECT_EQ(normalize(raw, stop), (Words{"rain"}));
}

// Property checks over random mixed-case text.
TEST(TextProperties, CaseInvarianceAndOutputContract) {
  auto stop = StopwordSet::english();
  std::mt19937_64 rng(17);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?'-";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    std::size_t len = rng() % 200;
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    std::string upper = text, lower = text;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto a = normalize(tokenize(upper).tokens, stop);
    auto b = normalize(tokenize(lower).tokens, stop);
    ASSERT_EQ(a, b);
    ASSERT_EQ(tokenize(text).tokens, tokenize(text).tokens);
    for (const auto& tok : a) {
      EXPECT_GE(utf8_length(tok), 3u);
      EXPECT_FALSE(stop.contains(tok));
      for (char c : tok) EXPECT_FALSE(std::isdigit(static_cast<unsigned char>(c)));
    }
  }
}
