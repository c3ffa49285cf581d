#include "newsload/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "newsload/csv.hpp"

namespace newsload {

namespace fs = std::filesystem;
using nlohmann::json;

int section_index(std::string_view section) {
  for (std::size_t i = 0; i < kSections.size(); ++i)
    if (kSections[i] == section) return static_cast<int>(i);
  return -1;
}

const std::string& NewsItem::text(TextType type) const {
  switch (type) {
    case TextType::title: return title;
    case TextType::description: return description;
    case TextType::body: return body;
  }
  return title;
}

const AlignedDay* AlignedDataset::find(Date date) const {
  auto idx = index_of(date);
  return idx ? &days[*idx] : nullptr;
}

std::optional<std::size_t> AlignedDataset::index_of(Date date) const {
  auto it = std::lower_bound(days.begin(), days.end(), date,
                             [](const AlignedDay& d, Date v) { return d.date < v; });
  if (it == days.end() || it->date != date) return std::nullopt;
  return static_cast<std::size_t>(it - days.begin());
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl" || name == "lines") return CorpusFormat::jsonl;
  if (name == "table" || name == "csv") return CorpusFormat::table;
  throw Error("unknown corpus format '" + std::string(name) + "'");
}

namespace {

struct RawRecord {
  std::string date, section, title, description, body;
};

void accept_record(RawRecord rec, const std::optional<DateWindow>& window, std::size_t line,
                   CorpusLoad& out) {
  ++out.raw_records;
  auto skip = [&](const std::string& why) {
    ++out.skipped;
    out.skip_reasons.push_back("record " + std::to_string(line) + ": " + why);
  };
  auto date = try_parse_date(rec.date);
  if (!date) return skip("unparseable date '" + rec.date + "'");
  if (window && !window->contains(*date)) return skip("date " + rec.date + " outside window");
  if (trim(rec.title).empty()) return skip("empty title");
  NewsItem item;
  item.date = *date;
  std::string section{trim(rec.section)};
  item.section = section_index(section) >= 0 ? section : std::string(kOtherSection);
  item.title = std::move(rec.title);
  item.description = std::move(rec.description);
  item.body = std::move(rec.body);
  item.empty_description = trim(item.description).empty();
  item.empty_body = trim(item.body).empty();
  out.items.push_back(std::move(item));
}

std::string json_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

}  // namespace

CorpusLoad parse_corpus(std::istream& in, CorpusFormat format, std::optional<DateWindow> window) {
  CorpusLoad out;
  if (format == CorpusFormat::jsonl) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        ++out.raw_records;
        ++out.skipped;
        out.skip_reasons.push_back("record " + std::to_string(lineno) + ": malformed JSON");
        continue;
      }
      accept_record({json_string(obj, "date"), json_string(obj, "section"),
                     json_string(obj, "title"), json_string(obj, "description"),
                     json_string(obj, "body")},
                    window, lineno, out);
    }
  } else {
    auto rows = read_csv(in);
    if (rows.empty()) throw Error("corpus table has no header");
    const auto& header = rows.front();
    auto col = [&](std::string_view name) -> std::ptrdiff_t {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : it - header.begin();
    };
    std::ptrdiff_t c_date = col("date"), c_section = col("section"), c_title = col("title"),
                   c_desc = col("description"), c_body = col("body");
    if (c_date < 0 || c_title < 0) throw Error("corpus table needs 'date' and 'title' columns");
    auto get = [](const CsvRow& row, std::ptrdiff_t c) {
      return c >= 0 && static_cast<std::size_t>(c) < row.size() ? row[c] : std::string{};
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      accept_record({get(row, c_date), get(row, c_section), get(row, c_title), get(row, c_desc),
                     get(row, c_body)},
                    window, r, out);
    }
  }
  if (out.items.empty()) throw Error("corpus contains zero valid records");
  return out;
}

CorpusLoad ingest_corpus(const fs::path& path, CorpusFormat format,
                         std::optional<DateWindow> window) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read corpus '" + path.string() + "'");
  return parse_corpus(in, format, window);
}

// ---------------------------------------------------------------- demand

namespace {

struct Timestamp {
  Date wall_date{};
  int wall_minutes = 0;     // minutes after local midnight
  long long utc_minutes = 0;  // minutes since epoch
};

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 16) return std::nullopt;
  auto date = try_parse_date(text.substr(0, 10));
  if (!date || (text[10] != 'T' && text[10] != ' ')) return std::nullopt;
  auto two = [&](std::size_t pos) -> int {
    if (pos + 2 > text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])) ||
        !std::isdigit(static_cast<unsigned char>(text[pos + 1])))
      return -1;
    return (text[pos] - '0') * 10 + (text[pos + 1] - '0');
  };
  int hh = two(11), mm = two(14);
  if (hh < 0 || mm < 0 || text[13] != ':' || hh > 23 || mm > 59) return std::nullopt;
  std::size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    int ss = two(pos + 1);
    if (ss != 0) return std::nullopt;
    pos += 3;
  }
  int offset = 0;
  if (pos < text.size()) {
    char c = text[pos];
    if (c == 'Z' && pos + 1 == text.size()) {
      offset = 0;
    } else if ((c == '+' || c == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
      int oh = two(pos + 1), om = two(pos + 4);
      if (oh < 0 || om < 0) return std::nullopt;
      offset = (oh * 60 + om) * (c == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }
  Timestamp ts;
  ts.wall_date = *date;
  ts.wall_minutes = hh * 60 + mm;
  ts.utc_minutes =
      static_cast<long long>(date->time_since_epoch().count()) * 1440 + ts.wall_minutes - offset;
  return ts;
}

}  // namespace

std::vector<double> repair_day_slots(std::span<const std::optional<double>> slots) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i]) present.push_back(i);
  if (present.empty()) throw Error("cannot repair a day with no observed slots");
  std::vector<double> out(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out[i] = *slots[i];
      continue;
    }
    auto hi = std::lower_bound(present.begin(), present.end(), i);
    if (hi == present.begin()) {
      out[i] = *slots[*hi];
    } else if (hi == present.end()) {
      out[i] = *slots[present.back()];
    } else {
      std::size_t a = *(hi - 1), b = *hi;
      double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = *slots[a] + t * (*slots[b] - *slots[a]);
    }
  }
  return out;
}

DemandSeries parse_demand(std::istream& in) {
  auto rows = read_csv(in);
  DemandSeries out;
  struct Cell {
    double sum = 0.0;
    int count = 0;
  };
  std::map<Date, std::array<Cell, kSlots>> grid;
  std::optional<long long> prev_utc;
  std::array<Cell, kSlots>* prev_day = nullptr;
  int prev_slot = -1;

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2) throw Error("demand row " + std::to_string(r + 1) + " needs timestamp,MW");
    auto ts = parse_timestamp(row[0]);
    if (!ts) {
      if (r == 0) continue;  // header
      throw Error("demand row " + std::to_string(r + 1) + ": bad timestamp '" + row[0] + "'");
    }
    double mw = 0.0;
    try {
      mw = parse_double(row[1]);
    } catch (const Error&) {
      throw Error("demand at " + row[0] + ": unparseable value '" + row[1] + "'");
    }
    if (!std::isfinite(mw)) throw Error("demand at " + row[0] + " is not finite");
    if (mw < 0.0) throw Error("negative demand " + row[1] + " MW at " + row[0]);
    if (ts->wall_minutes % 30 != 0)
      throw Error("demand timestamp " + row[0] + " is not on a half-hour boundary");

    if (prev_utc && ts->utc_minutes < *prev_utc)
      throw Error("non-monotonic demand timestamps at " + row[0]);
    if (prev_utc && ts->utc_minutes == *prev_utc) {
      out.warnings.push_back("duplicate timestamp " + row[0] + " averaged");
      Cell& cell = (*prev_day)[prev_slot];
      cell.sum += mw;
      cell.count += 1;
      continue;
    }
    auto& day = grid[ts->wall_date];
    int slot = ts->wall_minutes / 30;
    Cell& cell = day[slot];
    cell.sum += mw;
    cell.count += 1;
    prev_utc = ts->utc_minutes;
    prev_day = &day;
    prev_slot = slot;
  }

  // Duplicated UTC instants are collapsed into one observation; repeated
  // wall-clock slots (autumn clock change) are averaged and flagged.
  for (auto& [date, cells] : grid) {
    std::vector<std::optional<double>> slots(kSlots);
    int present = 0;
    bool repeated = false;
    for (std::size_t s = 0; s < kSlots; ++s) {
      if (cells[s].count > 0) {
        slots[s] = cells[s].sum / cells[s].count;
        ++present;
        if (cells[s].count > 1) repeated = true;
      }
    }
    if (present < 46) {
      out.warnings.push_back("incomplete demand day " + format_date(date) + " (" +
                             std::to_string(present) + " slots) dropped");
      continue;
    }
    DemandDay day;
    day.date = date;
    auto filled = repair_day_slots(slots);
    std::copy(filled.begin(), filled.end(), day.mw.begin());
    if (present < static_cast<int>(kSlots)) {
      day.repair = DayRepair::interpolated;
      out.warnings.push_back("demand day " + format_date(date) + " had " +
                             std::to_string(present) + " slots; interpolated to 48");
    } else if (repeated) {
      day.repair = DayRepair::averaged;
      out.warnings.push_back("demand day " + format_date(date) +
                             " had repeated wall-clock slots; averaged to 48");
    }
    out.days.push_back(day);
  }
  return out;
}

DemandSeries ingest_demand(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read demand file '" + path.string() + "'");
  return parse_demand(in);
}

// ---------------------------------------------------------------- temperature, holidays

TemperatureSeries parse_temperature(std::istream& in) {
  TemperatureSeries out;
  auto rows = read_csv(in);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2) throw Error("temperature row " + std::to_string(r + 1) + " needs date,value");
    auto date = try_parse_date(row[0]);
    if (!date) {
      if (r == 0) continue;
      throw Error("temperature row " + std::to_string(r + 1) + ": bad date '" + row[0] + "'");
    }
    double v = parse_double(row[1]);
    if (!std::isfinite(v)) throw Error("temperature on " + row[0] + " is not finite");
    if (!out.by_date.emplace(*date, v).second)
      throw Error("duplicate temperature date " + row[0]);
  }
  return out;
}

TemperatureSeries ingest_temperature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read temperature file '" + path.string() + "'");
  return parse_temperature(in);
}

std::set<Date> parse_holidays(std::istream& in) {
  std::set<Date> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(parse_date(t.substr(0, std::min<std::size_t>(10, t.size()))));
  }
  return out;
}

std::set<Date> ingest_holidays(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read holidays file '" + path.string() + "'");
  return parse_holidays(in);
}

CalendarRecord calendar_for(Date date, const std::set<Date>& holidays) {
  CalendarRecord rec;
  rec.day_of_week = day_of_week(date);
  rec.day_of_year = day_of_year(date);
  rec.is_weekend = rec.day_of_week >= 5;
  rec.is_holiday = holidays.count(date) > 0;
  return rec;
}

// ---------------------------------------------------------------- align

AlignedDataset align(const CorpusLoad& corpus, const DemandSeries& demand,
                     const TemperatureSeries& temperature, const std::set<Date>& holidays,
                     DateWindow window) {
  std::map<Date, const DemandDay*> demand_by_date;
  for (const auto& d : demand.days) demand_by_date[d.date] = &d;
  std::map<Date, std::vector<const NewsItem*>> news_by_date;
  for (const auto& item : corpus.items)
    if (window.contains(item.date)) news_by_date[item.date].push_back(&item);

  AlignedDataset out;
  for (Date d = window.first; d <= window.last; d += std::chrono::days{1}) {
    auto dem = demand_by_date.find(d);
    auto tmp = temperature.by_date.find(d);
    std::string missing;
    if (dem == demand_by_date.end()) missing += " demand";
    if (tmp == temperature.by_date.end()) missing += " temperature";
    if (!missing.empty()) {
      out.gaps.push_back(d);
      out.report.push_back("dropped " + format_date(d) + ": missing" + missing);
      continue;
    }
    AlignedDay day;
    day.date = d;
    day.demand = dem->second->mw;
    day.temperature = tmp->second;
    day.calendar = calendar_for(d, holidays);
    if (auto it = news_by_date.find(d); it != news_by_date.end())
      for (const NewsItem* item : it->second) day.news.push_back(*item);
    out.days.push_back(std::move(day));
  }
  if (out.days.empty()) throw Error("aligned dataset is empty: no date has every input");
  return out;
}

void write_aligned(const AlignedDataset& data, const fs::path& dir) {
  if (data.days.empty()) throw Error("cannot write an empty dataset");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "corpus.jsonl", std::ios::binary);
    for (const auto& day : data.days)
      for (const auto& item : day.news) {
        json rec = {{"date", format_date(item.date)}, {"section", item.section},
                    {"title", item.title},            {"description", item.description},
                    {"body", item.body}};
        out << rec.dump() << '\n';
      }
  }
  {
    std::ofstream out(dir / "demand.csv", std::ios::binary);
    out << "timestamp,mw\n";
    for (const auto& day : data.days)
      for (std::size_t s = 0; s < kSlots; ++s) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "T%02zu:%02zuZ", s / 2, (s % 2) * 30);
        out << format_date(day.date) << buf << ',' << format_double(day.demand[s]) << '\n';
      }
  }
  {
    std::ofstream out(dir / "temperature.csv", std::ios::binary);
    out << "date,celsius\n";
    for (const auto& day : data.days)
      out << format_date(day.date) << ',' << format_double(day.temperature) << '\n';
  }
  {
    std::ofstream out(dir / "holidays.txt", std::ios::binary);
    for (const auto& day : data.days)
      if (day.calendar.is_holiday) out << format_date(day.date) << '\n';
  }
  {
    std::ofstream out(dir / "window.txt", std::ios::binary);
    Date first = data.days.front().date, last = data.days.back().date;
    if (!data.gaps.empty()) {
      first = std::min(first, data.gaps.front());
      last = std::max(last, data.gaps.back());
    }
    out << format_date(first) << ',' << format_date(last) << '\n';
  }
}

AlignedDataset read_aligned(const fs::path& dir) {
  std::ifstream win(dir / "window.txt");
  std::string line;
  if (!win || !std::getline(win, line) || line.size() < 21)
    throw Error("missing or malformed window.txt in '" + dir.string() + "'");
  DateWindow window{parse_date(line.substr(0, 10)), parse_date(line.substr(11, 10))};
  CorpusLoad corpus;
  if (fs::exists(dir / "corpus.jsonl") && fs::file_size(dir / "corpus.jsonl") > 0)
    corpus = ingest_corpus(dir / "corpus.jsonl", CorpusFormat::jsonl, window);
  return align(corpus, ingest_demand(dir / "demand.csv"), ingest_temperature(dir / "temperature.csv"),
               ingest_holidays(dir / "holidays.txt"), window);
}

}  // namespace newsload
