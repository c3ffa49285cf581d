#include "newsload/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "newsload/csv.hpp"
#include "newsload/ingest.hpp"

namespace newsload {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::count: return "count";
    case Family::wordfreq: return "wordfreq";
    case Family::sentiment: return "sentiment";
    case Family::embedding: return "embedding";
    case Family::topic: return "topic";
  }
  return "?";
}

std::string_view family_code(Family family) {
  switch (family) {
    case Family::count: return "CF";
    case Family::wordfreq: return "WF";
    case Family::sentiment: return "SE";
    case Family::embedding: return "GWE";
    case Family::topic: return "TD";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : kFamilies)
    if (name == family_name(f) || name == family_code(f)) return f;
  throw Error("unknown feature family '" + std::string(name) + "'");
}

std::string group_id(Family family, TextType type) {
  return std::string(family_code(family)) + "_" + text_type_code(type);
}

std::string column_prefix(Family family, TextType type) {
  return std::string(family_name(family)) + "." + std::string(text_type_name(type)) + ".";
}

void DailyFeatureRow::add(std::string name, double value) {
  names.push_back(std::move(name));
  values.push_back(value);
}

ArticleText prepare_text(std::string_view section, std::string_view text,
                         const StopwordSet& stopwords) {
  ArticleText out;
  out.section = std::string(section);
  auto tok = tokenize(text);
  out.sentences = tok.sentences;
  out.tokens = normalize(tok.tokens, stopwords);
  out.raw = std::move(tok.tokens);
  return out;
}

// ---------------------------------------------------------------- count

namespace {

std::string section_slug(std::string_view section) {
  std::string out;
  for (char c : section) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else if (!out.empty() && out.back() != '_')
      out.push_back('_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

DailyFeatureRow count_features(Date date, TextType type, std::span<const ArticleText> articles) {
  DailyFeatureRow row{date, type, Family::count, {}, {}, articles.empty()};
  double words = 0, sentences = 0, kept = 0;
  std::set<std::string_view> unique;
  std::array<double, kSections.size()> per_section{};
  double known = 0;
  for (const auto& a : articles) {
    words += static_cast<double>(a.raw.size());
    sentences += static_cast<double>(a.sentences);
    kept += static_cast<double>(a.tokens.size());
    for (const auto& t : a.raw) unique.insert(t);
    int s = section_index(a.section);
    if (s >= 0) {
      per_section[s] += 1;
      known += 1;
    }
  }
  const double n = static_cast<double>(articles.size());
  row.add("total_words", words);
  row.add("total_sentences", sentences);
  row.add("unique_words", static_cast<double>(unique.size()));
  row.add("non_stopwords", kept);
  row.add("sentences_per_article", n > 0 ? sentences / n : 0.0);
  row.add("words_per_sentence", sentences > 0 ? words / sentences : 0.0);
  row.add("article_count", n);
  for (std::size_t s = 0; s < kSections.size(); ++s)
    row.add("section_" + section_slug(kSections[s]), known > 0 ? per_section[s] / known : 0.0);
  return row;
}

// ---------------------------------------------------------------- word frequency

std::size_t WordFreqConfig::threshold(TextType type) const {
  switch (type) {
    case TextType::title: return title;
    case TextType::description: return description;
    case TextType::body: return body;
  }
  return title;
}

void WordFreqConfig::validate() const {
  if (title < 1 || description < 1 || body < 1)
    throw Error("word-frequency thresholds must be >= 1");
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> training_documents,
                            std::size_t threshold) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : training_documents)
    for (const auto& w : doc) ++freq[w];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : freq)
    if (c > threshold) kept.emplace_back(w, c);
  if (kept.empty())
    throw Error("empty vocabulary: no word occurs more than " + std::to_string(threshold) +
                " times (threshold too high)");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  for (auto& [w, c] : kept) {
    v.words.push_back(w);
    v.counts.push_back(c);
  }
  return v;
}

DailyFeatureRow word_frequency_features(Date date, TextType type,
                                        std::span<const ArticleText> articles,
                                        const Vocabulary& vocabulary, bool normalize) {
  DailyFeatureRow row{date, type, Family::wordfreq, {}, {}, articles.empty()};
  std::unordered_map<std::string_view, double> counts;
  double total = 0;
  for (const auto& a : articles) {
    total += static_cast<double>(a.tokens.size());
    for (const auto& t : a.tokens) counts[t] += 1;
  }
  row.names = vocabulary.words;
  row.values.reserve(vocabulary.words.size());
  for (const auto& w : vocabulary.words) {
    auto it = counts.find(w);
    double c = it == counts.end() ? 0.0 : it->second;
    row.values.push_back(normalize ? (total > 0 ? c / total : 0.0) : c);
  }
  return row;
}

// ---------------------------------------------------------------- sentiment

SentimentLexicon::SentimentLexicon(std::unordered_map<std::string, WordSentiment> words,
                                   std::unordered_map<std::string, double> modifiers)
    : words_(std::move(words)), modifiers_(std::move(modifiers)) {
  for (const auto& [w, s] : words_) {
    if (!(s.polarity >= -1.0 && s.polarity <= 1.0))
      throw Error("lexicon polarity out of [-1,1] for '" + w + "'");
    if (!(s.subjectivity >= 0.0 && s.subjectivity <= 1.0))
      throw Error("lexicon subjectivity out of [0,1] for '" + w + "'");
  }
  for (const auto& [w, m] : modifiers_) {
    if (!(m > 0.0)) throw Error("modifier intensity must be > 0 for '" + w + "'");
    if (words_.count(w)) throw Error("'" + w + "' is both a modifier and a scored word");
  }
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& lexicon,
                                        const std::filesystem::path& modifiers) {
  std::unordered_map<std::string, WordSentiment> words;
  auto rows = read_csv_file(lexicon);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 3) throw Error("lexicon row " + std::to_string(r + 1) + " needs 3 fields");
    if (r == 0 && row[0] == "word") continue;
    words[to_lower_utf8(trim(row[0]))] = {parse_double(row[1]), parse_double(row[2])};
  }
  std::unordered_map<std::string, double> mods;
  if (!modifiers.empty()) {
    auto mrows = read_csv_file(modifiers);
    for (std::size_t r = 0; r < mrows.size(); ++r) {
      const auto& row = mrows[r];
      if (row.size() < 2) throw Error("modifier row " + std::to_string(r + 1) + " needs 2 fields");
      if (r == 0 && row[0] == "word") continue;
      mods[to_lower_utf8(trim(row[0]))] = parse_double(row[1]);
    }
  }
  return SentimentLexicon(std::move(words), std::move(mods));
}

const WordSentiment* SentimentLexicon::find(std::string_view word) const {
  auto it = words_.find(std::string(word));
  return it == words_.end() ? nullptr : &it->second;
}

double SentimentLexicon::modifier(std::string_view word) const {
  auto it = modifiers_.find(std::string(word));
  return it == modifiers_.end() ? 0.0 : it->second;
}

SentimentScore sentiment_scores(std::span<const std::string> tokens,
                                const SentimentLexicon& lexicon) {
  double pol_sum = 0, subj_sum = 0, pending = 1.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (double m = lexicon.modifier(t); m > 0) {
      pending *= m;
      continue;
    }
    const WordSentiment* s = lexicon.find(t);
    if (!s) continue;
    pol_sum += std::clamp(s->polarity * pending, -1.0, 1.0);
    subj_sum += s->subjectivity;
    pending = 1.0;
    ++hits;
  }
  if (hits == 0) return {0.0, 0.0, true};
  double n = static_cast<double>(hits);
  return {std::clamp(pol_sum / n, -1.0, 1.0), std::clamp(subj_sum / n, 0.0, 1.0), false};
}

namespace {

constexpr double kBinEdges[] = {0.2, 0.4, 0.6, 0.8};

std::size_t quintile(double v) {
  std::size_t b = 0;
  for (double e : kBinEdges)
    if (v >= e) ++b;
  return b;
}

}  // namespace

DailyFeatureRow sentiment_features(Date date, TextType type, std::span<const SentimentScore> scores) {
  DailyFeatureRow row{date, type, Family::sentiment, {}, {}, scores.empty()};
  std::array<double, 5> pol_hist{}, subj_hist{};
  for (const auto& s : scores) {
    pol_hist[quintile((s.polarity + 1.0) / 2.0)] += 1;
    subj_hist[quintile(s.subjectivity)] += 1;
  }
  const double n = static_cast<double>(scores.size());
  for (std::size_t b = 0; b < 5; ++b)
    row.add("polarity_q" + std::to_string(b + 1), n > 0 ? pol_hist[b] / n : 0.0);
  for (std::size_t b = 0; b < 5; ++b)
    row.add("subjectivity_q" + std::to_string(b + 1), n > 0 ? subj_hist[b] / n : 0.0);

  auto summarize = [&](const char* prefix, auto pick) {
    double mx = 0, mn = 0, mean = 0, sd = 0;
    if (n > 0) {
      mx = -std::numeric_limits<double>::infinity();
      mn = std::numeric_limits<double>::infinity();
      for (const auto& s : scores) {
        double v = pick(s);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        mean += v;
      }
      mean /= n;
      for (const auto& s : scores) sd += (pick(s) - mean) * (pick(s) - mean);
      sd = std::sqrt(sd / n);
    }
    std::string p(prefix);
    row.add(p + "_max", mx);
    row.add(p + "_min", mn);
    row.add(p + "_mean", mean);
    row.add(p + "_std", sd);
  };
  summarize("polarity", [](const SentimentScore& s) { return s.polarity; });
  summarize("subjectivity", [](const SentimentScore& s) { return s.subjectivity; });
  return row;
}

// ---------------------------------------------------------------- embeddings

EmbeddingTable EmbeddingTable::parse(std::istream& in, std::size_t expected_dim) {
  EmbeddingTable table;
  table.dim_ = expected_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos < t.size()) {
      auto next = t.find(' ', pos);
      if (next == std::string_view::npos) next = t.size();
      if (next > pos) parts.push_back(t.substr(pos, next - pos));
      pos = next + 1;
    }
    std::size_t d = parts.size() - 1;
    if (d == 0) throw Error("embedding line " + std::to_string(lineno) + " has no vector");
    if (table.dim_ == 0) table.dim_ = d;
    if (d != table.dim_)
      throw Error("embedding dimension mismatch at line " + std::to_string(lineno) + ": expected " +
                  std::to_string(table.dim_) + ", got " + std::to_string(d));
    std::size_t offset = table.data_.size();
    for (std::size_t i = 1; i < parts.size(); ++i) {
      double v = parse_double(parts[i]);
      if (!std::isfinite(v))
        throw Error("non-finite embedding value at line " + std::to_string(lineno));
      table.data_.push_back(v);
    }
    table.index_.emplace(std::string(parts[0]), offset);
  }
  if (table.index_.empty()) throw Error("embedding table is empty");
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read embedding table '" + path.string() + "'");
  return parse(in, expected_dim);
}

const double* EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : data_.data() + it->second;
}

DailyFeatureRow embedding_features(Date date, TextType type, std::span<const ArticleText> articles,
                                   const EmbeddingTable& table) {
  const std::size_t d = table.dim();
  DailyFeatureRow row{date, type, Family::embedding, {}, {}, false};
  std::vector<double> day(d, 0.0), article(d);
  std::size_t used = 0;
  for (const auto& a : articles) {
    std::fill(article.begin(), article.end(), 0.0);
    std::size_t hits = 0;
    for (const auto& t : a.tokens) {
      const double* v = table.find(t);
      if (!v) continue;
      for (std::size_t i = 0; i < d; ++i) article[i] += v[i];
      ++hits;
    }
    if (hits == 0) continue;
    for (std::size_t i = 0; i < d; ++i) day[i] += article[i] / static_cast<double>(hits);
    ++used;
  }
  if (used > 0)
    for (double& v : day) v /= static_cast<double>(used);
  row.missing = used == 0;
  for (std::size_t i = 0; i < d; ++i) row.add("dim" + std::to_string(i + 1), day[i]);
  return row;
}

// ---------------------------------------------------------------- wide table

FeatureTable::FeatureTable(std::vector<Date> dates) : dates_(std::move(dates)) {
  if (!std::is_sorted(dates_.begin(), dates_.end()))
    throw Error("feature table dates must be sorted");
}

std::size_t FeatureTable::ensure_column(std::string_view name) {
  std::string key(name);
  auto it = column_index_.find(key);
  if (it != column_index_.end()) return it->second;
  std::size_t idx = columns_.size();
  columns_.push_back(key);
  column_index_.emplace(std::move(key), idx);
  values_.emplace_back(dates_.size(), 0.0);
  return idx;
}

void FeatureTable::set(std::string_view column, std::size_t row, double value) {
  if (row >= dates_.size()) throw Error("feature row out of range");
  if (!std::isfinite(value)) throw Error("non-finite feature value in " + std::string(column));
  values_[ensure_column(column)][row] = value;
}

void FeatureTable::add_rows(std::span<const DailyFeatureRow> rows) {
  for (const auto& r : rows) {
    auto idx = row_of(r.date);
    if (!idx) throw Error("feature row for unknown date " + format_date(r.date));
    std::string prefix = column_prefix(r.family, r.text_type);
    for (std::size_t i = 0; i < r.names.size(); ++i) set(prefix + r.names[i], *idx, r.values[i]);
  }
}

bool FeatureTable::has_column(std::string_view column) const {
  return column_index_.count(std::string(column)) > 0;
}

std::span<const double> FeatureTable::column(std::string_view column) const {
  auto it = column_index_.find(std::string(column));
  if (it == column_index_.end()) throw Error("unknown feature column '" + std::string(column) + "'");
  return values_[it->second];
}

std::optional<std::size_t> FeatureTable::row_of(Date date) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
  if (it == dates_.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::vector<std::string> FeatureTable::columns_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (std::string_view(c).substr(0, prefix.size()) == prefix) out.push_back(c);
  return out;
}

void FeatureTable::write_csv(std::ostream& out, std::string_view provenance) const {
  if (!provenance.empty()) out << provenance << '\n';
  std::vector<std::string> header{"date"};
  header.insert(header.end(), columns_.begin(), columns_.end());
  out << csv_line(header) << '\n';
  for (std::size_t r = 0; r < dates_.size(); ++r) {
    out << format_date(dates_[r]);
    for (const auto& col : values_) out << ',' << format_double(col[r]);
    out << '\n';
  }
}

FeatureTable FeatureTable::read_csv(std::istream& in) {
  auto rows = newsload::read_csv(in);
  if (rows.empty() || rows.front().empty() || rows.front().front() != "date")
    throw Error("feature table must start with a 'date' header");
  std::vector<Date> dates;
  for (std::size_t r = 1; r < rows.size(); ++r) dates.push_back(parse_date(rows[r].at(0)));
  FeatureTable table(std::move(dates));
  const auto& header = rows.front();
  for (std::size_t c = 1; c < header.size(); ++c) table.ensure_column(header[c]);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw Error("feature table row " + std::to_string(r) + " has the wrong width");
    for (std::size_t c = 1; c < header.size(); ++c)
      table.values_[c - 1][r - 1] = parse_double(rows[r][c]);
  }
  return table;
}

}  // namespace newsload
