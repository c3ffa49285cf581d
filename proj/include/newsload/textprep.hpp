#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace newsload {

struct Tokenized {
  /// Lowercased maximal letter runs, in text order.
  std::vector<std::string> tokens;
  std::size_t sentences = 0;
};

/// Splits text into lowercase letter runs. Digits, hyphens, apostrophes and
/// all other non-letters separate tokens. Non-ASCII letters count as letters.
/// A sentence ends at a run of '.', '!' or '?' followed by whitespace or the
/// end of text; a trailing unterminated segment with letters or digits counts
/// as one more sentence.
Tokenized tokenize(std::string_view text);

/// Locale-independent lowercasing for ASCII, Latin-1, Latin Extended-A,
/// Greek and Cyrillic; other code points pass through.
std::string to_lower_utf8(std::string_view text);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

class StopwordSet {
 public:
  /// The embedded English list.
  static StopwordSet english();
  /// One word per line; blank lines and '#' comments ignored.
  static StopwordSet from_file(const std::filesystem::path& path);
  explicit StopwordSet(std::vector<std::string> words);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Drops stopwords, tokens under three letters and tokens containing digits.
std::vector<std::string> normalize(std::span<const std::string> raw, const StopwordSet& stopwords);

}  // namespace newsload
