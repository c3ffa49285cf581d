#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace newsload {

using CsvRow = std::vector<std::string>;

/// RFC 4180 style reader: quoted fields may contain separators, doubled quotes
/// and newlines. Lines starting with '#' outside quotes are skipped, as are
/// blank lines.
std::vector<CsvRow> read_csv(std::istream& in, char sep = ',');
std::vector<CsvRow> read_csv_file(const std::filesystem::path& path, char sep = ',');

/// Quotes a field when it contains the separator, a quote, or a line break.
std::string csv_field(std::string_view value, char sep = ',');
std::string csv_line(const std::vector<std::string>& fields, char sep = ',');

/// Provenance line written at the top of every delimited table.
std::string provenance_comment(std::string_view config_hash, unsigned long long seed);

}  // namespace newsload
