#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace newsload {

/// Raised for every contract violation and unreadable input in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Date = std::chrono::sys_days;

/// Number of half-hour settlement periods in a day.
inline constexpr std::size_t kSlots = 48;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Trailing time parts are rejected.
std::optional<Date> try_parse_date(std::string_view text);
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Monday = 0 ... Sunday = 6.
int day_of_week(Date date);
/// 1-based ordinal day within the year.
int day_of_year(Date date);
int days_in_year(Date date);
/// 1..12
unsigned month_of(Date date);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);

enum class TextType { title, description, body };

inline constexpr std::array<TextType, 3> kTextTypes = {TextType::title, TextType::description,
                                                      TextType::body};

std::string_view text_type_name(TextType type);
/// Single-letter code used in group identifiers (T, D, B).
char text_type_code(TextType type);
TextType parse_text_type(std::string_view name);

}  // namespace newsload
