#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsload/explain.hpp"
#include "newsload/features.hpp"
#include "newsload/forecast.hpp"
#include "newsload/ingest.hpp"
#include "newsload/select.hpp"
#include "newsload/synth.hpp"
#include "newsload/topics.hpp"

namespace newsload {

struct PipelinePaths {
  std::filesystem::path corpus, demand, temperature, holidays, embeddings;
  std::filesystem::path lexicon, modifiers, stopwords;
  /// Optional third-party day-ahead forecast (date,h1..h48) for Table-1 comparison.
  std::filesystem::path official_forecast;
  CorpusFormat corpus_format = CorpusFormat::jsonl;
};

struct ForecastSettings {
  /// Empty means the default grid.
  std::vector<ExtraTreesConfig> grid;
  std::size_t folds = 5;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  /// "key" persists D, D+C+T, M0 and M6 for the first seed; "all" persists every fit.
  std::string persist = "key";
};

struct ExplainSettings {
  std::vector<std::string> features;  // empty: selected features of M6's groups
  std::size_t max_features = 5;
  std::size_t pearson_min_days = 10;
  std::size_t lime_days = 3;
  LimeOptions lime;
  DmlConfig dml;
  std::string lime_model = "M6";
};

struct PipelineConfig {
  PipelinePaths paths;
  DateWindow window;
  /// First target day of the test period.
  Date split{};
  /// Family code -> enabled text types, e.g. "WF" -> {title, body}.
  std::map<Family, std::vector<TextType>> families;
  WordFreqConfig wordfreq;
  std::map<TextType, LdaConfig> lda;
  /// Candidate topic counts; when non-empty the count is chosen by coherence.
  std::vector<int> topic_candidates;
  std::size_t embedding_dim = 300;
  GrangerConfig granger;
  ForecastSettings forecast;
  ExplainSettings explain;
  std::optional<SynthConfig> synth;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// SHA-256 of the canonical config, excluding output_dir.
  std::string hash;
  std::string provenance() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                            const ConfigOverrides& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::string sha256_hex(std::string_view data);

enum class Stage { synth, features, select, train, evaluate, explain, report };
Stage parse_stage(std::string_view name);
std::string_view stage_name(Stage s);
inline constexpr std::array<Stage, 7> kStages = {Stage::synth, Stage::features, Stage::select,
                                                 Stage::train, Stage::evaluate, Stage::explain,
                                                 Stage::report};

/// A named model of the battery: benchmark sets, single text groups and the
/// M0-M8 combinations.
struct ModelSpec {
  std::string name;
  FeatureSetSpec features;
};

/// D, D+C, D+T, D+C+T.
std::vector<ModelSpec> benchmark_models();
/// D+C+T plus one text group each, for all 15 family x text-type groups.
std::vector<ModelSpec> group_models();
/// M0..M8 on top of D+C+T.
std::vector<ModelSpec> combination_models();

/// Runs one stage; progress and timings go to `log`.
void run_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

}  // namespace newsload
