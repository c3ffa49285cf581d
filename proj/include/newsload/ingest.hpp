#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "newsload/common.hpp"

namespace newsload {

/// Section labels used for the section-proportion count features.
inline constexpr std::array<std::string_view, 18> kSections = {
    "Africa",          "Asia",        "Australia",    "Business",
    "England",         "Entertainment & Arts",        "Europe",
    "Health",          "Latin America",               "Middle East",
    "Northern Ireland", "Science & Environment",       "Scotland",
    "Technology",      "UK",          "UK Politics",  "US & Canada",
    "Wales"};

inline constexpr std::string_view kOtherSection = "other";

/// Index into kSections, or -1 for anything else.
int section_index(std::string_view section);

struct NewsItem {
  Date date{};
  std::string section;
  std::string title;
  std::string description;
  std::string body;
  bool empty_description = false;
  bool empty_body = false;

  const std::string& text(TextType type) const;
  bool operator==(const NewsItem&) const = default;
};

struct DateWindow {
  Date first{};
  Date last{};

  bool contains(Date d) const { return d >= first && d <= last; }
  std::size_t days() const { return static_cast<std::size_t>((last - first).count()) + 1; }
};

enum class CorpusFormat { jsonl, table };

CorpusFormat parse_corpus_format(std::string_view name);

struct CorpusLoad {
  std::vector<NewsItem> items;
  std::size_t raw_records = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;
};

/// Reads a news corpus. JSONL records carry fields date, section, title,
/// description, body; the delimited table has a header row with the same
/// column names. Records with bad dates, empty titles, or dates outside the
/// window are skipped and counted. Throws when nothing valid remains.
CorpusLoad ingest_corpus(const std::filesystem::path& path, CorpusFormat format,
                         std::optional<DateWindow> window = std::nullopt);
CorpusLoad parse_corpus(std::istream& in, CorpusFormat format,
                        std::optional<DateWindow> window = std::nullopt);

enum class DayRepair { none, interpolated, averaged };

struct DemandDay {
  Date date{};
  std::array<double, kSlots> mw{};
  DayRepair repair = DayRepair::none;
};

/// Demand normalized to 48 wall-clock half-hour slots per date.
struct DemandSeries {
  std::vector<DemandDay> days;
  std::vector<std::string> warnings;
};

/// Reads rows of (timestamp, MW). Timestamps are ISO-8601 date-times with an
/// optional UTC offset ("Z", "+01:00"); naive timestamps are taken as UTC.
/// Ordering is checked on the UTC instants; slots are assigned by wall-clock
/// time so clock-change days show up as 46 or 50 slots and get repaired.
DemandSeries ingest_demand(const std::filesystem::path& path);
DemandSeries parse_demand(std::istream& in);

/// Fills missing slots by linear interpolation between the nearest present
/// neighbours (constant extension at the edges). Needs at least one value.
std::vector<double> repair_day_slots(std::span<const std::optional<double>> slots);

struct TemperatureSeries {
  std::map<Date, double> by_date;
};

TemperatureSeries ingest_temperature(const std::filesystem::path& path);
TemperatureSeries parse_temperature(std::istream& in);

std::set<Date> ingest_holidays(const std::filesystem::path& path);
std::set<Date> parse_holidays(std::istream& in);

struct CalendarRecord {
  int day_of_week = 0;  // Monday = 0
  int day_of_year = 1;
  bool is_weekend = false;
  bool is_holiday = false;

  bool operator==(const CalendarRecord&) const = default;
};

CalendarRecord calendar_for(Date date, const std::set<Date>& holidays);

struct AlignedDay {
  Date date{};
  std::array<double, kSlots> demand{};
  double temperature = 0.0;
  CalendarRecord calendar;
  std::vector<NewsItem> news;

  bool operator==(const AlignedDay&) const = default;
};

struct AlignedDataset {
  std::vector<AlignedDay> days;
  /// Window dates dropped because some input was missing.
  std::vector<Date> gaps;
  std::vector<std::string> report;

  /// nullptr when the date is not present.
  const AlignedDay* find(Date date) const;
  std::optional<std::size_t> index_of(Date date) const;
};

/// Per-date join. Every date of the window must carry demand and temperature
/// to be kept; missing ones are listed in `gaps`. Days without news are kept.
AlignedDataset align(const CorpusLoad& corpus, const DemandSeries& demand,
                     const TemperatureSeries& temperature, const std::set<Date>& holidays,
                     DateWindow window);

/// Writes corpus.jsonl, demand.csv, temperature.csv and holidays.txt into `dir`
/// using the same formats the ingest functions read.
void write_aligned(const AlignedDataset& data, const std::filesystem::path& dir);
AlignedDataset read_aligned(const std::filesystem::path& dir);

}  // namespace newsload
