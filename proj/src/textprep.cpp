#include "newsload/textprep.hpp"

#include <fstream>

#include "newsload/common.hpp"

namespace newsload {

namespace {

// NLTK English stopword list.
constexpr std::string_view kEnglishStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't"};

struct Decoded {
  char32_t cp;
  std::size_t len;
};

Decoded decode(std::string_view s, std::size_t i) {
  auto b = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    auto c = static_cast<unsigned char>(s[i + k]);
    return (c & 0xC0) == 0x80 ? (c & 0x3F) : -1;
  };
  if (b < 0x80) return {b, 1};
  if ((b & 0xE0) == 0xC0) {
    int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b & 0x1F) << 6) | c1), 2};
  } else if ((b & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0)
      return {static_cast<char32_t>(((b & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
  }
  return {0xFFFD, 1};  // invalid byte: treated as a separator
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;
  if (cp >= 0x400 && cp <= 0x52F) return !(cp >= 0x482 && cp <= 0x489);
  if (cp >= 0x1E00 && cp <= 0x1EFF) return true;  // Latin Extended Additional
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  return false;
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x3000;
}

char32_t lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    // Mostly even/odd case pairs; the 0x139-0x148 and 0x179-0x17E runs are odd/even.
    if (cp == 0x130) return 'i';
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E))
      return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

}  // namespace

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    auto [cp, len] = decode(text, i);
    if (cp == 0xFFFD && len == 1)
      out.push_back(text[i]);
    else
      encode(lower(cp), out);
    i += len;
  }
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); i += decode(text, i).len) ++n;
  return n;
}

Tokenized tokenize(std::string_view text) {
  Tokenized out;
  std::string current;
  bool segment_has_content = false;
  auto flush = [&] {
    if (!current.empty()) out.tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    auto [cp, len] = decode(text, i);
    if (is_letter(cp)) {
      encode(lower(cp), current);
      segment_has_content = true;
      i += len;
      continue;
    }
    flush();
    if (is_digit(cp)) segment_has_content = true;
    if (cp == '.' || cp == '!' || cp == '?') {
      std::size_t j = i;
      while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
      bool boundary = j == text.size() || is_space(decode(text, j).cp);
      if (boundary && segment_has_content) {
        ++out.sentences;
        segment_has_content = false;
      }
      i = j;
      continue;
    }
    i += len;
  }
  flush();
  if (segment_has_content) ++out.sentences;
  return out;
}

StopwordSet::StopwordSet(std::vector<std::string> words) {
  for (auto& w : words) {
    auto t = trim(w);
    if (t.empty() || t.front() == '#') continue;
    words_.insert(to_lower_utf8(t));
  }
  if (words_.empty()) throw Error("stopword set is empty");
}

StopwordSet StopwordSet::english() {
  std::vector<std::string> words;
  for (auto w : kEnglishStopwords) words.emplace_back(w);
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read stopword file '" + path.string() + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) words.push_back(line);
  return StopwordSet(std::move(words));
}

bool StopwordSet::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

std::vector<std::string> normalize(std::span<const std::string> raw, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& token : raw) {
    std::string word = to_lower_utf8(token);
    bool has_digit = false;
    for (char c : word)
      if (c >= '0' && c <= '9') has_digit = true;
    if (has_digit || utf8_length(word) < 3 || stopwords.contains(word)) continue;
    out.push_back(std::move(word));
  }
  return out;
}

}  // namespace newsload
