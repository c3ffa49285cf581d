#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "newsload/features.hpp"
#include "test_util.hpp"

using namespace newsload;
using Words = std::vector<std::string>;

namespace {

const Date kDay = parse_date("2020-06-01");

double value_of(const DailyFeatureRow& row, const std::string& name) {
  auto it = std::find(row.names.begin(), row.names.end(), name);
  if (it == row.names.end()) throw std::runtime_error("no feature " + name);
  return row.values[static_cast<std::size_t>(it - row.names.begin())];
}

ArticleText article(std::string section, Words tokens) {
  ArticleText a;
  a.section = std::move(section);
  a.raw = tokens;
  a.tokens = std::move(tokens);
  a.sentences = 1;
  return a;
}

SentimentLexicon toy_lexicon() {
  return SentimentLexicon({{"good", {1.0, 0.6}}, {"bad", {-1.0, 0.7}}, {"fine", {0.5, 0.4}}},
                          {{"very", 1.3}});
}

}  // namespace

TEST(CountFeatures, ZeroArticles) {
  auto row = count_features(kDay, TextType::title, {});
  EXPECT_EQ(row.values.size(), 25u);
  EXPECT_TRUE(row.missing);
  for (double v : row.values) EXPECT_EQ(v, 0.0);
}

TEST(CountFeatures, SectionProportions) {
  std::vector<ArticleText> arts = {article("UK", {"alpha"}), article("UK", {"beta"})};
  auto row = count_features(kDay, TextType::title, arts);
  EXPECT_EQ(value_of(row, "section_uk"), 1.0);
  double total = 0;
  for (std::size_t i = 0; i < row.names.size(); ++i)
    if (row.names[i].rfind("section_", 0) == 0) total += row.values[i];
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(CountFeatures, HandCountedToyCorpus) {
  auto stop = StopwordSet::english();
  // Word counts 10, 20 and 30; sentence counts 1, 2 and 3.
  std::vector<ArticleText> arts = {
      prepare_text("UK", "One two three four five six seven eight nine ten.", stop),
      prepare_text("Wales",
                   "Alpha beta gamma delta epsilon zeta eta theta iota kappa. "
                   "Alpha beta gamma delta epsilon zeta eta theta iota kappa.",
                   stop),
      prepare_text("Scotland",
                   "The cat sat on the mat and then the dog ran. "
                   "The cat sat on the mat and then the dog ran. "
                   "A b c d e f g h.",
                   stop)};
  auto row = count_features(kDay, TextType::body, arts);
  EXPECT_EQ(value_of(row, "total_words"), 60.0);
  EXPECT_EQ(value_of(row, "total_sentences"), 6.0);
  EXPECT_EQ(value_of(row, "article_count"), 3.0);
  EXPECT_DOUBLE_EQ(value_of(row, "sentences_per_article"), 2.0);
  EXPECT_DOUBLE_EQ(value_of(row, "words_per_sentence"), 10.0);
  // Distinct raw words: 10 + 10 + {the,cat,sat,on,mat,and,then,dog,ran,a..h} = 37.
  EXPECT_EQ(value_of(row, "unique_words"), 37.0);
  // Kept tokens: number words minus stopwords, 20 Greek letters, cat/sat/mat/dog/ran twice.
  ASSERT_TRUE(stop.contains("then") && stop.contains("the") && stop.contains("and"));
  Words kept_first = normalize(tokenize("One two three four five six seven eight nine ten.").tokens, stop);
  std::size_t expected = kept_first.size() + 20 + 10;
  EXPECT_EQ(value_of(row, "non_stopwords"), static_cast<double>(expected));
}

TEST(Vocabulary, ThresholdIsStrict) {
  std::vector<Words> docs = {{"cat", "cat", "cat", "dog"}, {"cat", "cat", "dog"}};
  auto v = build_vocabulary(docs, 3);
  EXPECT_EQ(v.words, (Words{"cat"}));
  EXPECT_EQ(v.counts, (std::vector<std::size_t>{5}));
}

TEST(Vocabulary, ZeroThresholdKeepsAllFrequencyOrdered) {
  std::vector<Words> docs = {{"b", "a", "c", "c"}, {"a", "d"}};
  auto v = build_vocabulary(docs, 0);
  EXPECT_EQ(v.words, (Words{"a", "c", "b", "d"}));
}

TEST(Vocabulary, EmptyVocabularyNamesThreshold) {
  std::vector<Words> docs = {{"cat"}};
  auto msg = testutil::error_of([&] { build_vocabulary(docs, 500); });
  EXPECT_NE(msg.find("500"), std::string::npos) << msg;
}

TEST(WordFrequency, NormalizedByDailyTokens) {
  Vocabulary vocab{{"cat"}, {9}};
  std::vector<ArticleText> arts = {article("UK", {"cat", "cat", "dog"})};
  auto row = word_frequency_features(kDay, TextType::title, arts, vocab);
  ASSERT_EQ(row.values.size(), 1u);
  EXPECT_DOUBLE_EQ(row.values[0], 2.0 / 3.0);
  auto empty = word_frequency_features(kDay, TextType::title, {}, vocab);
  EXPECT_EQ(empty.values[0], 0.0);
}

TEST(WordFrequency, RawCountsOverHandTotal) {
  Vocabulary vocab{{"storm", "rain", "snow"}, {1, 1, 1}};
  std::vector<ArticleText> arts = {article("UK", {"storm", "wind", "rain"}),
                                   article("UK", {"storm", "snow", "storm", "sun"})};
  auto norm = word_frequency_features(kDay, TextType::body, arts, vocab, true);
  auto raw = word_frequency_features(kDay, TextType::body, arts, vocab, false);
  const double total = 7.0;
  const double counts[] = {3, 1, 1};
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(raw.values[i], counts[i]);
    EXPECT_DOUBLE_EQ(norm.values[i], counts[i] / total);
  }
  double sum = std::accumulate(norm.values.begin(), norm.values.end(), 0.0);
  EXPECT_LE(sum, 1.0);
}

TEST(Sentiment, MeanPolarityAndSubjectivity) {
  auto lex = toy_lexicon();
  Words tokens = {"good", "good", "bad"};
  auto s = sentiment_scores(tokens, lex);
  EXPECT_NEAR(s.polarity, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.subjectivity, (0.6 + 0.6 + 0.7) / 3.0, 1e-12);
  EXPECT_FALSE(s.neutral);
}

TEST(Sentiment, NoHitsIsNeutral) {
  auto lex = toy_lexicon();
  Words tokens = {"table", "chair"};
  auto s = sentiment_scores(tokens, lex);
  EXPECT_EQ(s.polarity, 0.0);
  EXPECT_EQ(s.subjectivity, 0.0);
  EXPECT_TRUE(s.neutral);
}

TEST(Sentiment, ModifierMultipliesNextScoredWord) {
  auto lex = toy_lexicon();
  Words strong = {"very", "good"};
  EXPECT_DOUBLE_EQ(sentiment_scores(strong, lex).polarity, 1.0);
  Words mild = {"very", "fine"};
  EXPECT_NEAR(sentiment_scores(mild, lex).polarity, 0.65, 1e-12);
  Words gap = {"very", "table", "fine"};
  EXPECT_NEAR(sentiment_scores(gap, lex).polarity, 0.65, 1e-12);
  Words after = {"fine", "very"};
  EXPECT_NEAR(sentiment_scores(after, lex).polarity, 0.5, 1e-12);
}

TEST(Sentiment, SubjectivityHistogram) {
  std::vector<SentimentScore> scores = {{0, 0.1, false}, {0, 0.5, false}, {0, 0.9, false}};
  auto row = sentiment_features(kDay, TextType::title, scores);
  EXPECT_EQ(row.values.size(), kSentimentFeatures);
  const double third = 1.0 / 3.0;
  const double expected[] = {third, 0, third, 0, third};
  for (int b = 0; b < 5; ++b)
    EXPECT_DOUBLE_EQ(value_of(row, "subjectivity_q" + std::to_string(b + 1)), expected[b]);
}

TEST(Sentiment, SingleNeutralArticle) {
  std::vector<SentimentScore> scores = {{0, 0, true}};
  auto row = sentiment_features(kDay, TextType::title, scores);
  EXPECT_EQ(value_of(row, "polarity_q3"), 1.0);
  EXPECT_EQ(value_of(row, "polarity_std"), 0.0);
}

TEST(Sentiment, ExactlyEighteenFeaturesAndHistogramsSumToOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pol(-1, 1), subj(0, 1);
  for (int day = 0; day < 200; ++day) {
    std::vector<SentimentScore> scores(1 + rng() % 30);
    for (auto& s : scores) s = {pol(rng), subj(rng), false};
    if (day % 7 == 0) scores[0] = {1.0, 1.0, false};  // upper edge lands in the last bin
    auto row = sentiment_features(kDay, TextType::body, scores);
    ASSERT_EQ(row.values.size(), 18u);
    double p = 0, s = 0;
    for (int b = 1; b <= 5; ++b) {
      p += value_of(row, "polarity_q" + std::to_string(b));
      s += value_of(row, "subjectivity_q" + std::to_string(b));
    }
    EXPECT_NEAR(p, 1.0, 1e-9);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Sentiment, LexiconFilesLoad) {
  auto lex = SentimentLexicon::load(std::string(NEWSLOAD_DATA_DIR) + "/lexicon.csv",
                                    std::string(NEWSLOAD_DATA_DIR) + "/modifiers.csv");
  EXPECT_GT(lex.size(), 100u);
  ASSERT_NE(lex.find("good"), nullptr);
  EXPECT_GT(lex.find("good")->polarity, 0.0);
  EXPECT_GT(lex.modifier("very"), 1.0);
}

TEST(Embedding, ToyTableMeans) {
  std::istringstream in("a 1 0\nb 0 1\n");
  auto table = EmbeddingTable::parse(in);
  EXPECT_EQ(table.dim(), 2u);
  std::vector<ArticleText> one = {article("UK", {"a", "b", "zzz"})};
  auto row = embedding_features(kDay, TextType::title, one, table);
  EXPECT_EQ(row.values, (std::vector<double>{0.5, 0.5}));
  std::vector<ArticleText> two = {article("UK", {"a"}), article("UK", {"b"}),
                                  article("UK", {"unknown"})};
  row = embedding_features(kDay, TextType::title, two, table);
  EXPECT_EQ(row.values, (std::vector<double>{0.5, 0.5}));
  auto none = embedding_features(kDay, TextType::title, {}, table);
  EXPECT_TRUE(none.missing);
  EXPECT_EQ(none.values, (std::vector<double>{0.0, 0.0}));
}

TEST(Embedding, DimensionMismatchRejected) {
  std::istringstream bad("a 1 0\nb 0 1 2\n");
  EXPECT_THROW(EmbeddingTable::parse(bad), Error);
  std::istringstream wrong("a 1 0\n");
  EXPECT_THROW(EmbeddingTable::parse(wrong, 100), Error);
}

TEST(Embedding, PermutationInvariant) {
  std::mt19937_64 rng(9);
  std::ostringstream table_text;
  Words vocab;
  for (int w = 0; w < 30; ++w) {
    vocab.push_back("w" + std::string(1, static_cast<char>('a' + w % 26)) + std::to_string(w));
    table_text << vocab.back();
    for (int d = 0; d < 4; ++d) table_text << ' ' << (static_cast<double>(rng() % 1000) / 7.0);
    table_text << '\n';
  }
  std::istringstream in(table_text.str());
  auto table = EmbeddingTable::parse(in);
  std::vector<ArticleText> arts(6);
  for (auto& a : arts)
    for (int t = 0; t < 9; ++t) a.tokens.push_back(vocab[rng() % vocab.size()]);
  auto base = embedding_features(kDay, TextType::body, arts, table);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(arts.begin(), arts.end(), rng);
    for (auto& a : arts) std::shuffle(a.tokens.begin(), a.tokens.end(), rng);
    auto row = embedding_features(kDay, TextType::body, arts, table);
    for (std::size_t i = 0; i < row.values.size(); ++i) EXPECT_NEAR(row.values[i], base.values[i], 1e-12);
  }
}

TEST(FeatureTable, CsvRoundTripAndNamespacing) {
  FeatureTable table({kDay, kDay + std::chrono::days{1}});
  std::vector<DailyFeatureRow> rows = {
      word_frequency_features(kDay, TextType::title, std::vector<ArticleText>{article("UK", {"cat"})},
                              Vocabulary{{"cat"}, {1}})};
  table.add_rows(rows);
  EXPECT_TRUE(table.has_column("wordfreq.title.cat"));
  EXPECT_EQ(column_prefix(Family::wordfreq, TextType::title), "wordfreq.title.");
  EXPECT_EQ(group_id(Family::embedding, TextType::body), "GWE_B");
  std::stringstream ss;
  table.write_csv(ss, "# hash=abc seed=1");
  auto back = FeatureTable::read_csv(ss);
  EXPECT_EQ(back.columns(), table.columns());
  EXPECT_EQ(back.dates(), table.dates());
  auto a = table.column("wordfreq.title.cat");
  auto b = back.column("wordfreq.title.cat");
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

// Training-period rows depend only on the frozen training vocabulary.
TEST(WordFrequency, AppendingTestArticlesLeavesTrainingRowsUnchanged) {
  std::vector<Words> train = {{"storm", "rain", "storm"}, {"rain", "sun"}};
  std::vector<Words> extended = train;
  extended.push_back({"snow", "snow", "snow", "snow"});
  auto vocab = build_vocabulary(train, 0);
  std::vector<ArticleText> day = {article("UK", {"storm", "sun", "snow"})};
  auto before = word_frequency_features(kDay, TextType::title, day, vocab);
  auto vocab_again = build_vocabulary(train, 0);
  auto after = word_frequency_features(kDay, TextType::title, day, vocab_again);
  EXPECT_EQ(before.values, after.values);
  EXPECT_EQ(before.names, after.names);
  EXPECT_NE(build_vocabulary(extended, 0).words, vocab.words);
}
