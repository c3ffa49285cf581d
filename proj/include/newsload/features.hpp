#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsload/common.hpp"
#include "newsload/textprep.hpp"

namespace newsload {

enum class Family { count, wordfreq, sentiment, embedding, topic };

inline constexpr std::array<Family, 5> kFamilies = {Family::count, Family::wordfreq,
                                                    Family::sentiment, Family::topic,
                                                    Family::embedding};

std::string_view family_name(Family family);
/// Short label used in group identifiers: CF, WF, SE, TD, GWE.
std::string_view family_code(Family family);
Family parse_family(std::string_view name);

/// Group identifier such as "WF_T".
std::string group_id(Family family, TextType type);
/// Column prefix "family.texttype." shared by every feature of a group.
std::string column_prefix(Family family, TextType type);

struct DailyFeatureRow {
  Date date{};
  TextType text_type = TextType::title;
  Family family = Family::count;
  std::vector<std::string> names;
  std::vector<double> values;
  /// Set when the day had nothing to summarize (no articles / no scored text).
  bool missing = false;

  void add(std::string name, double value);
};

/// One article's text field after tokenization and normalization.
struct ArticleText {
  std::string section;
  std::vector<std::string> raw;     // lowercase tokens
  std::vector<std::string> tokens;  // normalized tokens
  std::size_t sentences = 0;
};

ArticleText prepare_text(std::string_view section, std::string_view text,
                         const StopwordSet& stopwords);

/// Seven volume statistics plus the 18 section proportions (25 features).
DailyFeatureRow count_features(Date date, TextType type, std::span<const ArticleText> articles);

struct WordFreqConfig {
  std::size_t title = 200;
  std::size_t description = 400;
  std::size_t body = 5000;
  /// Divide daily counts by the day's token total; raw counts when false.
  bool normalize = true;

  std::size_t threshold(TextType type) const;
  void validate() const;
};

struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::size_t> counts;
};

/// Words whose training frequency is strictly above `threshold`, ordered by
/// descending frequency then lexicographically.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> training_documents,
                            std::size_t threshold);

DailyFeatureRow word_frequency_features(Date date, TextType type,
                                        std::span<const ArticleText> articles,
                                        const Vocabulary& vocabulary, bool normalize = true);

struct WordSentiment {
  double polarity = 0.0;
  double subjectivity = 0.0;
};

class SentimentLexicon {
 public:
  SentimentLexicon() = default;
  SentimentLexicon(std::unordered_map<std::string, WordSentiment> words,
                   std::unordered_map<std::string, double> modifiers);

  /// Lexicon rows word,polarity,subjectivity; modifier rows word,intensity.
  static SentimentLexicon load(const std::filesystem::path& lexicon,
                               const std::filesystem::path& modifiers);

  const WordSentiment* find(std::string_view word) const;
  /// Intensity multiplier, or 0 when the word is not a modifier.
  double modifier(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, WordSentiment> words_;
  std::unordered_map<std::string, double> modifiers_;
};

struct SentimentScore {
  double polarity = 0.0;
  double subjectivity = 0.0;
  bool neutral = false;
};

/// Mean of per-word polarities (each clamped to [-1, 1] after any pending
/// modifier multiplier) and mean subjectivity over lexicon hits.
SentimentScore sentiment_scores(std::span<const std::string> tokens, const SentimentLexicon& lexicon);

inline constexpr std::size_t kSentimentFeatures = 18;

/// Five-bin histograms of (polarity+1)/2 and subjectivity plus max, min, mean
/// and population std of each score.
DailyFeatureRow sentiment_features(Date date, TextType type, std::span<const SentimentScore> scores);

class EmbeddingTable {
 public:
  /// "word v1 ... vD" per line. All rows must share one dimension, which must
  /// equal `expected_dim` when that is non-zero.
  static EmbeddingTable load(const std::filesystem::path& path, std::size_t expected_dim = 0);
  static EmbeddingTable parse(std::istream& in, std::size_t expected_dim = 0);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  /// Pointer to dim() values, nullptr when out of vocabulary.
  const double* find(std::string_view word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Mean over articles of each article's mean in-vocabulary token vector.
DailyFeatureRow embedding_features(Date date, TextType type, std::span<const ArticleText> articles,
                                   const EmbeddingTable& table);

/// Wide date-by-feature table; columns are "family.texttype.name".
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<Date> dates);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return dates_.size(); }

  /// Places each row under columns built from its family and text type.
  void add_rows(std::span<const DailyFeatureRow> rows);
  void set(std::string_view column, std::size_t row, double value);

  bool has_column(std::string_view column) const;
  std::span<const double> column(std::string_view column) const;
  std::optional<std::size_t> row_of(Date date) const;
  /// Columns that start with `prefix`, in insertion order.
  std::vector<std::string> columns_with_prefix(std::string_view prefix) const;

  void write_csv(std::ostream& out, std::string_view provenance = {}) const;
  static FeatureTable read_csv(std::istream& in);

 private:
  std::size_t ensure_column(std::string_view name);

  std::vector<Date> dates_;
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> column_index_;
  std::vector<std::vector<double>> values_;  // column-major
};

}  // namespace newsload
