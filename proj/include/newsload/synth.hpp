#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "newsload/ingest.hpp"

namespace newsload {

struct SynthConfig {
  Date first = parse_date("2017-01-01");
  Date last = parse_date("2020-12-31");

  // Daily level in MW before the intraday template is applied.
  double base_load = 30000.0;
  double weekly_amplitude = 1000.0;
  double annual_amplitude = 2000.0;
  double holiday_effect = -2000.0;
  /// MW per degree C above the reference temperature (negative: heating load).
  double temperature_sensitivity = -100.0;
  double reference_temperature = 15.0;

  double temperature_mean = 11.0;
  double temperature_amplitude = 7.0;
  double temperature_noise = 1.5;

  std::vector<std::string> event_keywords = {"blizzard"};
  /// Added to every half-hour of day e + lag after an event day e.
  double event_effect = -500.0;
  int event_lag = 2;
  double event_probability = 0.3;
  /// Share of event-day articles that mention a keyword in title and body.
  double keyword_rate = 0.7;
  /// Share of other days' articles that mention a keyword anyway.
  double background_rate = 0.005;

  double daily_noise = 100.0;
  double slot_noise = 60.0;

  int articles_per_day = 8;
  int topic_pools = 4;
  int words_per_pool = 40;
  int embedding_dim = 16;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Everything needed to recompute the noiseless demand and to score
/// recovery of the planted effect.
struct SynthTruth {
  SynthConfig config;
  std::vector<Date> event_days;
  std::vector<Date> effect_days;
  std::set<Date> holidays;
  std::array<double, kSlots> template_shape{};

  /// Demand without noise for a date given its realized temperature.
  std::array<double, kSlots> noiseless_demand(Date date, double temperature) const;
  /// The seasonal daily level (no event, noise or template).
  double daily_level(Date date, double temperature) const;
};

struct SynthOutput {
  AlignedDataset data;
  SynthTruth truth;
  /// word -> vector for every word the generator can emit.
  std::vector<std::pair<std::string, std::vector<double>>> embeddings;
};

/// Two-peak (morning, evening) intraday shape with mean exactly 1.
std::array<double, kSlots> intraday_template();

SynthOutput generate(const SynthConfig& config);

/// Writes corpus.jsonl, demand.csv, temperature.csv, holidays.txt,
/// embeddings.txt and truth.json into `dir`.
void write_synth(const SynthOutput& out, const std::filesystem::path& dir);

std::string synth_config_json(const SynthConfig& c);
SynthConfig parse_synth_config(std::string_view json);

}  // namespace newsload
