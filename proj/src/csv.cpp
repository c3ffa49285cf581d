#include "newsload/csv.hpp"

#include <fstream>
#include <istream>
#include <iterator>

#include "newsload/common.hpp"

namespace newsload {

std::vector<CsvRow> read_csv(std::istream& in, char sep) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool at_line_start = true;
  bool row_has_content = false;

  auto end_row = [&] {
    if (row_has_content || !row.empty() || !field.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    row_has_content = false;
    at_line_start = true;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (at_line_start && c == '#') {
      while (i < data.size() && data[i] != '\n') ++i;
      continue;
    }
    at_line_start = false;
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == sep) {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // tolerated before \n
    } else {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (quoted) throw Error("unterminated quoted field in delimited table");
  end_row();
  return rows;
}

std::vector<CsvRow> read_csv_file(const std::filesystem::path& path, char sep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  return read_csv(in, sep);
}

std::string csv_field(std::string_view value, char sep) {
  bool needs = value.find_first_of(std::string{sep, '"', '\n', '\r'}) != std::string_view::npos ||
               (!value.empty() && value.front() == '#');
  if (!needs) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(sep);
    out += csv_field(fields[i], sep);
  }
  return out;
}

std::string provenance_comment(std::string_view config_hash, unsigned long long seed) {
  return "# newsload config_hash=" + std::string(config_hash) + " seed=" + std::to_string(seed);
}

}  // namespace newsload
