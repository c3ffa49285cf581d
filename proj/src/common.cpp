#include "newsload/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace newsload {

namespace {

bool parse_fixed(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Date> try_parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
      !parse_fixed(text.substr(8, 2), d))
    return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

Date parse_date(std::string_view text) {
  auto date = try_parse_date(text);
  if (!date) throw Error("invalid ISO date '" + std::string(text) + "'");
  return *date;
}

std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int day_of_week(Date date) {
  return static_cast<int>(std::chrono::weekday{date}.iso_encoding()) - 1;
}

int day_of_year(Date date) {
  std::chrono::year_month_day ymd{date};
  Date jan1{ymd.year() / std::chrono::January / 1};
  return static_cast<int>((date - jan1).count()) + 1;
}

int days_in_year(Date date) {
  return std::chrono::year_month_day{date}.year().is_leap() ? 366 : 365;
}

unsigned month_of(Date date) {
  return static_cast<unsigned>(std::chrono::year_month_day{date}.month());
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error("invalid number '" + std::string(text) + "'");
  return value;
}

long long parse_int(std::string_view text) {
  text = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error("invalid integer '" + std::string(text) + "'");
  return value;
}

std::string_view trim(std::string_view text) {
  const char* ws = " \t\r\n";
  auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

std::string_view text_type_name(TextType type) {
  switch (type) {
    case TextType::title: return "title";
    case TextType::description: return "description";
    case TextType::body: return "body";
  }
  return "?";
}

char text_type_code(TextType type) {
  switch (type) {
    case TextType::title: return 'T';
    case TextType::description: return 'D';
    case TextType::body: return 'B';
  }
  return '?';
}

TextType parse_text_type(std::string_view name) {
  if (name == "title" || name == "T") return TextType::title;
  if (name == "description" || name == "D") return TextType::description;
  if (name == "body" || name == "B") return TextType::body;
  throw Error("unknown text type '" + std::string(name) + "'");
}

}  // namespace newsload
