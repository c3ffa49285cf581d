#include "newsload/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "newsload/csv.hpp"
#include "newsload/evaluate.hpp"
#include "newsload/parallel.hpp"
#include "newsload/random.hpp"
#include "newsload/stats.hpp"
#include "newsload/textprep.hpp"

namespace newsload {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

std::string PipelineConfig::provenance() const { return provenance_comment(hash, seed); }

// ---------------------------------------------------------------- config

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error("config: " + what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      config_error("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void get_to(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

constexpr std::array<int, 3> kDefaultTopics = {87, 100, 69};  // title, description, body

LdaConfig parse_lda(const json& j, LdaConfig base, const std::string& where) {
  get_to(j, "topics", base.topics, where);
  get_to(j, "alpha", base.alpha, where);
  get_to(j, "beta", base.beta, where);
  get_to(j, "sweeps", base.sweeps, where);
  get_to(j, "burn_in", base.burn_in, where);
  get_to(j, "infer_sweeps", base.infer_sweeps, where);
  get_to(j, "infer_burn_in", base.infer_burn_in, where);
  return base;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"paths", "window", "split_date", "features", "wordfreq", "lda", "topic_candidates",
              "embedding_dim", "granger", "forecast", "explain", "synth", "seed", "output_dir"});
  PipelineConfig c;
  get_to(j, "seed", c.seed, "config");
  if (overrides.seed) c.seed = *overrides.seed;
  std::string out_dir = "out";
  get_to(j, "output_dir", out_dir, "config");
  c.output_dir = overrides.output_dir ? *overrides.output_dir : base_dir / out_dir;

  if (j.contains("synth")) c.synth = parse_synth_config(j["synth"].dump());

  const json paths = j.value("paths", json::object());
  check_keys(paths, "paths",
             {"corpus", "corpus_format", "demand", "temperature", "holidays", "embeddings", "lexicon",
              "modifiers", "stopwords", "official_forecast"});
  auto path_of = [&](const char* key, const fs::path& fallback) -> fs::path {
    std::string v;
    get_to(paths, key, v, "paths");
    if (v.empty()) return fallback;
    fs::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  const fs::path synth_dir = c.synth ? c.output_dir / "synth" : fs::path();
  auto synth_file = [&](const char* name) { return c.synth ? synth_dir / name : fs::path(); };
  c.paths.corpus = path_of("corpus", synth_file("corpus.jsonl"));
  c.paths.demand = path_of("demand", synth_file("demand.csv"));
  c.paths.temperature = path_of("temperature", synth_file("temperature.csv"));
  c.paths.holidays = path_of("holidays", synth_file("holidays.txt"));
  c.paths.embeddings = path_of("embeddings", synth_file("embeddings.txt"));
  c.paths.lexicon = path_of("lexicon", fs::path(NEWSLOAD_DATA_DIR) / "lexicon.csv");
  c.paths.modifiers = path_of("modifiers", fs::path(NEWSLOAD_DATA_DIR) / "modifiers.csv");
  c.paths.stopwords = path_of("stopwords", {});
  c.paths.official_forecast = path_of("official_forecast", {});
  std::string fmt = "jsonl";
  get_to(paths, "corpus_format", fmt, "paths");
  c.paths.corpus_format = parse_corpus_format(fmt);
  if (c.paths.corpus.empty() || c.paths.demand.empty() || c.paths.temperature.empty())
    config_error("paths.corpus, paths.demand and paths.temperature are required without a synth section");

  const json window = j.value("window", json::object());
  check_keys(window, "window", {"first", "last"});
  std::string first, last;
  if (c.synth) {
    first = format_date(c.synth->first);
    last = format_date(c.synth->last);
  }
  get_to(window, "first", first, "window");
  get_to(window, "last", last, "window");
  if (first.empty() || last.empty()) config_error("window.first and window.last are required");
  c.window = {parse_date(first), parse_date(last)};
  if (c.window.last < c.window.first) config_error("window is empty");
  std::string split;
  get_to(j, "split_date", split, "config");
  if (split.empty()) config_error("split_date is required");
  c.split = parse_date(split);
  if (!(c.split > c.window.first && c.split <= c.window.last)) config_error("split_date must lie inside the window");

  if (j.contains("features")) {
    const json& f = j["features"];
    if (!f.is_object()) config_error("features must be an object");
    for (auto it = f.begin(); it != f.end(); ++it) {
      Family fam;
      try {
        fam = parse_family(it.key());
      } catch (const Error&) {
        config_error("unknown feature family '" + it.key() + "'");
      }
      std::vector<TextType> types;
      for (const auto& t : it.value()) {
        if (!t.is_string()) config_error("features." + it.key() + " must list text types");
        types.push_back(parse_text_type(t.get<std::string>()));
      }
      c.families[fam] = types;
    }
  } else {
    for (Family fam : kFamilies) c.families[fam] = {kTextTypes.begin(), kTextTypes.end()};
  }

  const json wf = j.value("wordfreq", json::object());
  check_keys(wf, "wordfreq", {"title", "description", "body", "normalize"});
  get_to(wf, "title", c.wordfreq.title, "wordfreq");
  get_to(wf, "description", c.wordfreq.description, "wordfreq");
  get_to(wf, "body", c.wordfreq.body, "wordfreq");
  get_to(wf, "normalize", c.wordfreq.normalize, "wordfreq");
  c.wordfreq.validate();

  const json lda = j.value("lda", json::object());
  check_keys(lda, "lda",
             {"topics", "alpha", "beta", "sweeps", "burn_in", "infer_sweeps", "infer_burn_in", "title",
              "description", "body"});
  LdaConfig base = parse_lda(lda, LdaConfig{}, "lda");
  for (TextType t : kTextTypes) {
    const std::string key(text_type_name(t));
    LdaConfig typed = base;
    // Per-type topic counts apply unless the shared section sets one.
    if (!lda.contains("topics")) typed.topics = kDefaultTopics[static_cast<std::size_t>(t)];
    LdaConfig cfg = lda.contains(key) ? parse_lda(lda[key], typed, "lda." + key) : typed;
    cfg.seed = derive_seed(c.seed, 0x7D0 + static_cast<std::uint64_t>(t));
    cfg.validate();
    c.lda[t] = cfg;
  }
  get_to(j, "topic_candidates", c.topic_candidates, "config");
  get_to(j, "embedding_dim", c.embedding_dim, "config");
  if (c.synth && !j.contains("embedding_dim")) c.embedding_dim = static_cast<std::size_t>(c.synth->embedding_dim);

  const json gr = j.value("granger", json::object());
  check_keys(gr, "granger", {"lags", "alpha"});
  get_to(gr, "lags", c.granger.lags, "granger");
  get_to(gr, "alpha", c.granger.alpha, "granger");
  c.granger.validate();

  const json fc = j.value("forecast", json::object());
  check_keys(fc, "forecast", {"grid", "folds", "seeds", "persist"});
  if (fc.contains("grid")) {
    for (const auto& g : fc["grid"]) {
      check_keys(g, "forecast.grid[]", {"trees", "max_features", "min_samples_split"});
      ExtraTreesConfig e;
      get_to(g, "trees", e.trees, "forecast.grid[]");
      get_to(g, "max_features", e.max_features, "forecast.grid[]");
      get_to(g, "min_samples_split", e.min_samples_split, "forecast.grid[]");
      c.forecast.grid.push_back(e);
    }
    if (c.forecast.grid.empty()) config_error("forecast.grid must not be empty when given");
  }
  get_to(fc, "folds", c.forecast.folds, "forecast");
  get_to(fc, "seeds", c.forecast.seeds, "forecast");
  get_to(fc, "persist", c.forecast.persist, "forecast");
  if (c.forecast.seeds.empty()) config_error("forecast.seeds must not be empty");
  if (c.forecast.persist != "key" && c.forecast.persist != "all") config_error("forecast.persist must be 'key' or 'all'");

  const json ex = j.value("explain", json::object());
  check_keys(ex, "explain",
             {"features", "max_features", "pearson_min_days", "lime_days", "lime_samples", "lime_kernel_width",
              "lime_model", "dml_trees", "dml_min_samples_split", "cross_fit"});
  get_to(ex, "features", c.explain.features, "explain");
  get_to(ex, "max_features", c.explain.max_features, "explain");
  get_to(ex, "pearson_min_days", c.explain.pearson_min_days, "explain");
  get_to(ex, "lime_days", c.explain.lime_days, "explain");
  get_to(ex, "lime_samples", c.explain.lime.samples, "explain");
  get_to(ex, "lime_kernel_width", c.explain.lime.kernel_width, "explain");
  get_to(ex, "lime_model", c.explain.lime_model, "explain");
  get_to(ex, "dml_trees", c.explain.dml.trees, "explain");
  get_to(ex, "dml_min_samples_split", c.explain.dml.min_samples_split, "explain");
  get_to(ex, "cross_fit", c.explain.dml.cross_fit, "explain");
  c.explain.lime.seed = derive_seed(c.seed, 0x11);
  c.explain.dml.seed = derive_seed(c.seed, 0xD3);

  json canonical = j;
  canonical.erase("output_dir");
  canonical["seed"] = c.seed;
  c.hash = sha256_hex(canonical.dump());
  return c;
}

PipelineConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), overrides);
}

Stage parse_stage(std::string_view name) {
  for (Stage s : kStages)
    if (stage_name(s) == name) return s;
  throw Error("unknown subcommand '" + std::string(name) + "'");
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::synth: return "synth";
    case Stage::features: return "features";
    case Stage::select: return "select";
    case Stage::train: return "train";
    case Stage::evaluate: return "evaluate";
    case Stage::explain: return "explain";
    case Stage::report: return "report";
  }
  return "?";
}

// ---------------------------------------------------------------- battery

std::vector<ModelSpec> benchmark_models() {
  return {{"D", {true, false, false, {}}},
          {"D+C", {true, true, false, {}}},
          {"D+T", {true, false, true, {}}},
          {"D+C+T", {true, true, true, {}}}};
}

std::vector<ModelSpec> group_models() {
  std::vector<ModelSpec> out;
  for (Family f : kFamilies)
    for (TextType t : kTextTypes) {
      FeatureSetSpec s{true, true, true, {group_id(f, t)}};
      out.push_back({s.label(), s});
    }
  return out;
}

std::vector<ModelSpec> combination_models() {
  const std::vector<std::vector<std::string>> sets = {
      {"WF_T"},
      {"WF_T", "WF_D", "WF_B"},
      {"WF_T", "SE_B"},
      {"WF_T", "TD_B"},
      {"WF_T", "GWE_B"},
      {"WF_T", "SE_B", "TD_B"},
      {"WF_T", "SE_B", "GWE_B"},
      {"WF_T", "TD_B", "GWE_B"},
      {"WF_T", "SE_B", "TD_B", "GWE_B"}};
  std::vector<ModelSpec> out;
  for (std::size_t i = 0; i < sets.size(); ++i)
    out.push_back({"M" + std::to_string(i), {true, true, true, sets[i]}});
  return out;
}

// ---------------------------------------------------------------- helpers

namespace {

using Clock = std::chrono::steady_clock;

fs::path stage_dir(const PipelineConfig& c, std::string_view stage) { return c.output_dir / std::string(stage); }

void require(const fs::path& p, std::string_view producer) {
  if (!fs::exists(p))
    throw Error("missing artifact " + p.string() + "; run the '" + std::string(producer) + "' subcommand first");
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

std::string file_stem(std::string_view name) {
  std::string s(name);
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-' && ch != '.' && ch != '+') ch = '_';
  return s;
}

FeatureTable load_features(const PipelineConfig& c) {
  const fs::path p = stage_dir(c, "features") / "features.csv";
  require(p, "features");
  std::ifstream in(p, std::ios::binary);
  return FeatureTable::read_csv(in);
}

AlignedDataset load_aligned(const PipelineConfig& c) {
  const fs::path p = stage_dir(c, "features") / "aligned";
  require(p / "demand.csv", "features");
  return read_aligned(p);
}

std::map<std::string, std::vector<std::string>> load_selected(const PipelineConfig& c) {
  const fs::path p = stage_dir(c, "select") / "selected.json";
  require(p, "select");
  return read_json(p).at("groups").get<std::map<std::string, std::vector<std::string>>>();
}

std::vector<std::string> columns_for(const FeatureSetSpec& spec,
                                     const std::map<std::string, std::vector<std::string>>& selected) {
  std::vector<std::string> cols;
  for (const auto& g : spec.text_groups) {
    auto it = selected.find(g);
    if (it != selected.end()) cols.insert(cols.end(), it->second.begin(), it->second.end());
  }
  return cols;
}

struct Split {
  DesignMatrix train, test;
};

Split split_design(const DesignMatrix& m, const PipelineConfig& c) {
  Split s{m.subset_by_target(c.window.first, c.split - std::chrono::days{1}),
          m.subset_by_target(c.split, c.window.last)};
  if (s.train.X.rows() == 0) throw Error("no training rows before split_date " + format_date(c.split));
  if (s.test.X.rows() == 0) throw Error("no test rows on or after split_date " + format_date(c.split));
  return s;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- stages

void run_synth(const PipelineConfig& c, std::ostream& log) {
  if (!c.synth) throw Error("config has no 'synth' section");
  SynthOutput out = generate(*c.synth);
  const fs::path dir = stage_dir(c, "synth");
  fs::create_directories(dir);
  write_synth(out, dir);
  log << "synth: " << out.data.days.size() << " days, " << out.truth.event_days.size() << " event days\n";
}

void run_features(const PipelineConfig& c, std::ostream& log) {
  CorpusLoad corpus = ingest_corpus(c.paths.corpus, c.paths.corpus_format, c.window);
  DemandSeries demand = ingest_demand(c.paths.demand);
  TemperatureSeries temperature = ingest_temperature(c.paths.temperature);
  std::set<Date> holidays;
  if (!c.paths.holidays.empty()) holidays = ingest_holidays(c.paths.holidays);
  AlignedDataset data = align(corpus, demand, temperature, holidays, c.window);
  const fs::path dir = stage_dir(c, "features");
  fs::create_directories(dir);
  write_aligned(data, dir / "aligned");
  {
    auto rep = open_out(dir / "ingest_report.txt");
    rep << "raw_records " << corpus.raw_records << "\naccepted " << corpus.items.size() << "\nskipped "
        << corpus.skipped << '\n';
    std::map<std::string, std::size_t> reasons;
    for (const auto& r : corpus.skip_reasons) ++reasons[r];
    for (const auto& [r, n] : reasons) rep << "skip_reason " << r << ' ' << n << '\n';
    for (const auto& w : demand.warnings) rep << "demand_warning " << w << '\n';
    for (Date g : data.gaps) rep << "gap " << format_date(g) << '\n';
    for (const auto& line : data.report) rep << "align " << line << '\n';
  }
  log << "features: " << data.days.size() << " aligned days, " << corpus.skipped << " skipped records\n";

  const StopwordSet stop = c.paths.stopwords.empty() ? StopwordSet::english() : StopwordSet::from_file(c.paths.stopwords);
  std::vector<Date> dates;
  for (const auto& d : data.days) dates.push_back(d.date);
  FeatureTable table(dates);
  json groups = json::object();

  std::set<TextType> used_types;
  for (const auto& [fam, types] : c.families) used_types.insert(types.begin(), types.end());

  std::optional<SentimentLexicon> lexicon;
  std::optional<EmbeddingTable> embeddings;

  for (TextType type : used_types) {
    auto t0 = Clock::now();
    std::vector<std::vector<ArticleText>> texts(data.days.size());
    for (std::size_t i = 0; i < data.days.size(); ++i)
      for (const NewsItem& n : data.days[i].news) texts[i].push_back(prepare_text(n.section, n.text(type), stop));
    const std::string meta = "meta." + std::string(text_type_name(type)) + ".no_articles";
    for (std::size_t i = 0; i < texts.size(); ++i) table.set(meta, i, texts[i].empty() ? 1.0 : 0.0);

    std::vector<Document> training_docs;
    for (std::size_t i = 0; i < texts.size(); ++i)
      if (data.days[i].date < c.split)
        for (const auto& a : texts[i])
          if (!a.tokens.empty()) training_docs.push_back(a.tokens);

    auto enabled = [&](Family f) {
      auto it = c.families.find(f);
      return it != c.families.end() && std::find(it->second.begin(), it->second.end(), type) != it->second.end();
    };
    auto add_family = [&](Family f, const std::vector<DailyFeatureRow>& rows) {
      table.add_rows(rows);
      groups[group_id(f, type)] = table.columns_with_prefix(column_prefix(f, type));
    };

    if (enabled(Family::count)) {
      std::vector<DailyFeatureRow> rows;
      for (std::size_t i = 0; i < texts.size(); ++i) rows.push_back(count_features(dates[i], type, texts[i]));
      add_family(Family::count, rows);
    }
    if (enabled(Family::wordfreq)) {
      Vocabulary vocab = build_vocabulary(training_docs, c.wordfreq.threshold(type));
      auto out = open_out(dir / ("vocab_" + std::string(text_type_name(type)) + ".txt"));
      for (std::size_t k = 0; k < vocab.words.size(); ++k) out << vocab.words[k] << ' ' << vocab.counts[k] << '\n';
      std::vector<DailyFeatureRow> rows;
      for (std::size_t i = 0; i < texts.size(); ++i)
        rows.push_back(word_frequency_features(dates[i], type, texts[i], vocab, c.wordfreq.normalize));
      add_family(Family::wordfreq, rows);
    }
    if (enabled(Family::sentiment)) {
      if (!lexicon) lexicon = SentimentLexicon::load(c.paths.lexicon, c.paths.modifiers);
      std::vector<DailyFeatureRow> rows;
      for (std::size_t i = 0; i < texts.size(); ++i) {
        std::vector<SentimentScore> scores;
        for (const auto& a : texts[i]) scores.push_back(sentiment_scores(a.raw, *lexicon));
        rows.push_back(sentiment_features(dates[i], type, scores));
      }
      add_family(Family::sentiment, rows);
    }
    if (enabled(Family::embedding)) {
      if (c.paths.embeddings.empty()) throw Error("paths.embeddings is required for the GWE family");
      if (!embeddings) embeddings = EmbeddingTable::load(c.paths.embeddings, c.embedding_dim);
      std::vector<DailyFeatureRow> rows;
      for (std::size_t i = 0; i < texts.size(); ++i)
        rows.push_back(embedding_features(dates[i], type, texts[i], *embeddings));
      add_family(Family::embedding, rows);
    }
    if (enabled(Family::topic)) {
      LdaConfig cfg = c.lda.at(type);
      if (!c.topic_candidates.empty()) {
        auto sel = select_topic_count(training_docs, c.topic_candidates, cfg);
        auto out = open_out(dir / ("topic_count_" + std::string(text_type_name(type)) + ".csv"));
        out << "topics,coherence\n";
        for (auto [k, s] : sel.scores) out << k << ',' << format_double(s) << '\n';
        cfg.topics = sel.best;
      }
      LdaModel model = fit_lda(training_docs, cfg);
      {
        auto out = open_out(dir / ("lda_" + std::string(text_type_name(type)) + ".txt"));
        model.save(out);
      }
      std::vector<DailyFeatureRow> rows(texts.size());
      parallel_for(texts.size(), [&](std::size_t i) { rows[i] = daily_topic_features(dates[i], type, model, texts[i]); });
      add_family(Family::topic, rows);
    }
    log << "features: " << text_type_name(type) << " done in " << std::fixed << std::setprecision(2)
        << seconds_since(t0) << " s\n";
  }
  {
    auto out = open_out(dir / "features.csv");
    table.write_csv(out, c.provenance());
  }
  write_json(dir / "groups.json", json{{"provenance", c.provenance()}, {"groups", groups}});
}

void run_select(const PipelineConfig& c, std::ostream& log) {
  AlignedDataset data = load_aligned(c);
  FeatureTable table = load_features(c);
  const fs::path gp = stage_dir(c, "features") / "groups.json";
  require(gp, "features");
  auto groups = read_json(gp).at("groups").get<std::map<std::string, std::vector<std::string>>>();

  std::vector<double> target;
  std::vector<std::size_t> rows;
  for (const auto& d : data.days) {
    if (d.date >= c.split) continue;
    auto r = table.row_of(d.date);
    if (!r) continue;
    rows.push_back(*r);
    double s = 0.0;
    for (double v : d.demand) s += v;
    target.push_back(s / static_cast<double>(kSlots));
  }
  std::vector<NamedSeries> series;
  std::vector<std::string> series_group;
  for (const auto& [g, cols] : groups)
    for (const auto& col : cols) {
      auto values = table.column(col);
      NamedSeries s{col, {}};
      for (std::size_t r : rows) s.values.push_back(values[r]);
      series.push_back(std::move(s));
      series_group.push_back(g);
    }
  GrangerSelection sel = bilateral_select(series, target, c.granger);
  std::map<std::string, std::vector<std::string>> selected;
  for (const auto& [g, cols] : groups) selected[g];
  {
    auto out = open_out(stage_dir(c, "select") / "granger.csv");
    out << c.provenance() << "\ngroup,feature,p_xy,p_yx,selected,reason\n";
    for (std::size_t i = 0; i < sel.outcomes.size(); ++i) {
      const auto& o = sel.outcomes[i];
      out << series_group[i] << ',' << csv_field(o.feature) << ',' << format_double(o.p_xy) << ','
          << format_double(o.p_yx) << ',' << (o.selected ? 1 : 0) << ',' << o.reason << '\n';
      if (o.selected) selected[series_group[i]].push_back(o.feature);
    }
  }
  json counts = json::object();
  for (const auto& [g, cols] : groups) counts[g] = {{"original", cols.size()}, {"selected", selected[g].size()}};
  write_json(stage_dir(c, "select") / "selected.json",
             json{{"provenance", c.provenance()}, {"groups", selected}, {"counts", counts}});
  log << "select: " << sel.selected.size() << " of " << series.size() << " features kept\n";
}

void write_grid(const fs::path& p, const GridSearchResult& g, const PipelineConfig& c, std::size_t p_features) {
  auto out = open_out(p);
  out << c.provenance() << "\ntrees,max_features,min_samples_split,mean_rmse";
  const std::size_t folds = g.table.empty() ? 0 : g.table.front().fold_rmse.size();
  for (std::size_t f = 0; f < folds; ++f) out << ",fold" << f + 1;
  out << ",best\n";
  for (const auto& s : g.table) {
    out << s.config.trees << ',' << s.config.resolved_max_features(p_features) << ','
        << s.config.min_samples_split << ',' << format_double(s.mean_rmse);
    for (double v : s.fold_rmse) out << ',' << format_double(v);
    out << ',' << (s.config == g.best ? 1 : 0) << '\n';
  }
}

bool persisted(const PipelineConfig& c, const std::string& name, std::size_t seed_index) {
  if (c.forecast.persist == "all") return true;
  return seed_index == 0 && (name == "D" || name == "D+C+T" || name == "M0" || name == "M6" ||
                             name == c.explain.lime_model);
}

std::vector<ModelSpec> all_models() {
  auto models = benchmark_models();
  for (auto& m : group_models()) models.push_back(m);
  for (auto& m : combination_models()) models.push_back(m);
  return models;
}

void run_train(const PipelineConfig& c, std::ostream& log) {
  AlignedDataset data = load_aligned(c);
  FeatureTable table = load_features(c);
  auto selected = load_selected(c);
  const fs::path dir = stage_dir(c, "train");
  fs::create_directories(dir / "predictions");
  fs::create_directories(dir / "models");

  FeatureSetSpec dct{true, true, true, {}};
  Split base = split_design(build_design(data, table, dct, {}), c);
  auto t0 = Clock::now();
  std::vector<ExtraTreesConfig> grid = c.forecast.grid;
  if (grid.empty()) grid = default_grid(static_cast<std::size_t>(base.train.X.cols()), 0);
  for (auto& g : grid) g.seed = derive_seed(c.seed, 0x6A1D);
  GridSearchResult gs = grid_search_cv(base.train.X, base.train.Y, grid, c.forecast.folds);
  write_grid(dir / "grid.csv", gs, c, static_cast<std::size_t>(base.train.X.cols()));
  const double k_share = static_cast<double>(gs.best.resolved_max_features(static_cast<std::size_t>(base.train.X.cols()))) /
                         static_cast<double>(base.train.X.cols());
  log << "train: grid search picked trees=" << gs.best.trees
      << " K=" << gs.best.resolved_max_features(static_cast<std::size_t>(base.train.X.cols()))
      << " n_min=" << gs.best.min_samples_split << " in " << std::fixed << std::setprecision(2)
      << seconds_since(t0) << " s\n";

  json models = json::array();
  std::vector<Date> test_dates;
  for (Eigen::Index r = 0; r < base.test.X.rows(); ++r) test_dates.push_back(base.test.target_day(static_cast<std::size_t>(r)));

  {
    // Same half-hour one week before the target day.
    Eigen::MatrixXd pers(base.test.X.rows(), static_cast<Eigen::Index>(kSlots));
    std::vector<Date> kept;
    Eigen::Index n = 0;
    for (Date t : test_dates) {
      const AlignedDay* p = data.find(t - std::chrono::days{7});
      if (!p) continue;
      for (std::size_t h = 0; h < kSlots; ++h) pers(n, static_cast<Eigen::Index>(h)) = p->demand[h];
      kept.push_back(t);
      ++n;
    }
    auto out = open_out(dir / "predictions" / "Persistence.csv");
    write_predictions(out, kept, pers.topRows(n), c.provenance());
  }

  for (const ModelSpec& spec : all_models()) {
    auto t1 = Clock::now();
    const auto cols = columns_for(spec.features, selected);
    const bool text_model = !spec.features.text_groups.empty();
    json entry{{"name", spec.name},
               {"label", spec.features.label()},
               {"groups", spec.features.text_groups},
               {"text_columns", cols.size()},
               {"empty", text_model && cols.empty()}};
    if (text_model && cols.empty()) {
      // Nothing survived selection: the model is D+C+T.
      entry["predictions_from"] = "D+C+T";
      models.push_back(entry);
      log << "train: " << spec.name << " has no selected text features, reusing D+C+T\n";
      continue;
    }
    Split s = split_design(build_design(data, table, spec.features, cols), c);
    const auto p = static_cast<std::size_t>(s.train.X.cols());
    json files = json::array();
    for (std::size_t si = 0; si < c.forecast.seeds.size(); ++si) {
      ExtraTreesConfig cfg = gs.best;
      cfg.max_features = std::clamp(static_cast<int>(std::lround(k_share * static_cast<double>(p))), 1, static_cast<int>(p));
      cfg.seed = derive_seed(c.seed, 1000 + c.forecast.seeds[si]);
      ExtraTreesModel model = fit_extratrees(s.train.X, s.train.Y, cfg, s.train.columns);
      Eigen::MatrixXd pred = model.predict(s.test.X);
      std::vector<Date> targets;
      for (Eigen::Index r = 0; r < s.test.X.rows(); ++r) targets.push_back(s.test.target_day(static_cast<std::size_t>(r)));
      const std::string stem = file_stem(spec.name) + ".seed" + std::to_string(c.forecast.seeds[si]);
      {
        auto out = open_out(dir / "predictions" / (stem + ".csv"));
        write_predictions(out, targets, pred, c.provenance());
      }
      json f{{"seed", c.forecast.seeds[si]}, {"predictions", "predictions/" + stem + ".csv"}};
      if (persisted(c, spec.name, si)) {
        auto out = open_out(dir / "models" / (stem + ".etm"));
        model.save(out, c.provenance());
        f["model"] = "models/" + stem + ".etm";
      }
      files.push_back(f);
    }
    entry["fits"] = files;
    entry["max_features"] = std::clamp(static_cast<int>(std::lround(k_share * static_cast<double>(p))), 1, static_cast<int>(p));
    models.push_back(entry);
    log << "train: " << spec.name << " (" << p << " features) in " << std::fixed << std::setprecision(2)
        << seconds_since(t1) << " s\n";
  }
  json best{{"trees", gs.best.trees},
            {"max_features_share", k_share},
            {"min_samples_split", gs.best.min_samples_split}};
  write_json(dir / "models.json",
             json{{"provenance", c.provenance()}, {"best", best}, {"models", models},
                  {"split", format_date(c.split)}});
}

struct ModelPredictions {
  std::string name;
  std::vector<PredictionTable> seeds;
};

PredictionTable read_prediction_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return read_predictions(in);
}

std::map<std::string, ModelPredictions> load_predictions(const PipelineConfig& c, json& models_json) {
  const fs::path dir = stage_dir(c, "train");
  require(dir / "models.json", "train");
  models_json = read_json(dir / "models.json");
  std::map<std::string, ModelPredictions> out;
  for (const auto& m : models_json.at("models")) {
    const std::string name = m.at("name");
    if (m.value("empty", false)) continue;
    ModelPredictions mp{name, {}};
    for (const auto& f : m.at("fits")) mp.seeds.push_back(read_prediction_file(dir / f.at("predictions").get<std::string>()));
    out[name] = std::move(mp);
  }
  for (const auto& m : models_json.at("models"))
    if (m.value("empty", false)) {
      ModelPredictions copy = out.at(m.at("predictions_from").get<std::string>());
      copy.name = m.at("name");
      out[copy.name] = std::move(copy);
    }
  return out;
}

Eigen::MatrixXd truth_for(const AlignedDataset& data, const std::vector<Date>& dates) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(kSlots));
  for (std::size_t r = 0; r < dates.size(); ++r) {
    const AlignedDay* d = data.find(dates[r]);
    if (!d) throw Error("no observed demand for " + format_date(dates[r]));
    for (std::size_t h = 0; h < kSlots; ++h) y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h)) = d->demand[h];
  }
  return y;
}

json score_json(const std::vector<PeriodScore>& per_seed) {
  json j;
  for (const char* metric : {"rmse", "mae", "smape"}) {
    std::vector<double> v;
    for (const auto& s : per_seed)
      v.push_back(metric[0] == 'r' ? s.rmse : metric[0] == 'm' ? s.mae : s.smape);
    j[metric] = {{"mean", stats::mean(v)}, {"std", v.size() > 1 ? stats::sample_std(v) : 0.0}, {"per_seed", v}};
  }
  j["days"] = per_seed.front().days;
  return j;
}

void run_evaluate(const PipelineConfig& c, std::ostream& log) {
  json models_json;
  auto preds = load_predictions(c, models_json);
  AlignedDataset data = load_aligned(c);
  const fs::path dir = stage_dir(c, "evaluate");
  fs::create_directories(dir);

  json metrics{{"provenance", c.provenance()}, {"models", json::object()}};
  for (const auto& [name, mp] : preds) {
    std::vector<PeriodScore> per_seed;
    for (const auto& t : mp.seeds) per_seed.push_back(period_metrics(score_days(t.dates, truth_for(data, t.dates), t.values)));
    metrics["models"][name] = score_json(per_seed);
  }
  auto score_file = [&](const fs::path& p) {
    PredictionTable t = read_prediction_file(p);
    const Date first = c.split;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < t.dates.size(); ++r)
      if (t.dates[r] >= first && t.dates[r] <= c.window.last && data.find(t.dates[r])) keep.push_back(r);
    if (keep.empty()) throw Error(p.string() + " has no rows in the test period");
    std::vector<Date> dates;
    Eigen::MatrixXd v(static_cast<Eigen::Index>(keep.size()), t.values.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      dates.push_back(t.dates[keep[i]]);
      v.row(static_cast<Eigen::Index>(i)) = t.values.row(static_cast<Eigen::Index>(keep[i]));
    }
    return score_json({period_metrics(score_days(dates, truth_for(data, dates), v))});
  };
  metrics["persistence"] = score_file(stage_dir(c, "train") / "predictions" / "Persistence.csv");
  if (!c.paths.official_forecast.empty()) metrics["official"] = score_file(c.paths.official_forecast);

  const std::vector<std::string> dm_models = {"D", "D+C+T", "M0", "M6"};
  std::vector<std::vector<double>> losses;
  for (const auto& m : dm_models) {
    const auto& t = preds.at(m).seeds.front();
    losses.push_back(daily_squared_loss(truth_for(data, t.dates), t.values));
  }
  json dm = json::array();
  {
    auto out = open_out(dir / "dm.csv");
    out << c.provenance() << "\nrow,column,statistic,p_value\n";
    for (std::size_t r = 0; r < dm_models.size(); ++r) {
      json row = json::array();
      for (std::size_t col = 0; col < dm_models.size(); ++col) {
        if (r == col) {
          row.push_back(1.0);
          out << dm_models[r] << ',' << dm_models[col] << ",,1\n";
          continue;
        }
        try {
          auto rep = dm_test(losses[col], losses[r]);
          row.push_back(rep.p_value);
          out << dm_models[r] << ',' << dm_models[col] << ',' << format_double(rep.statistic) << ','
              << format_double(rep.p_value) << '\n';
        } catch (const Error&) {
          row.push_back(nullptr);
          out << dm_models[r] << ',' << dm_models[col] << ",,NA\n";
        }
      }
      dm.push_back(row);
    }
  }
  metrics["dm"] = {{"models", dm_models}, {"p_column_better_than_row", dm}};

  auto hourly = open_out(dir / "hourly_errors.csv");
  auto daytype = open_out(dir / "daytype_errors.csv");
  hourly << c.provenance() << "\nmodel,hour,rmse,mae,smape\n";
  daytype << c.provenance() << "\nmodel,daytype,days,rmse,mae,smape\n";
  json daytype_json = json::object();
  for (const std::string m : {"D+C+T", "M6"}) {
    const auto& t = preds.at(m).seeds.front();
    std::vector<bool> weekend_flags;
    for (Date d : t.dates) weekend_flags.push_back(data.find(d)->calendar.is_weekend);
    std::unique_ptr<bool[]> flags(new bool[weekend_flags.size()]);
    for (std::size_t i = 0; i < weekend_flags.size(); ++i) flags[i] = weekend_flags[i];
    auto dec = error_decomposition(truth_for(data, t.dates), t.values, {flags.get(), weekend_flags.size()});
    for (const auto& r : dec.hourly)
      hourly << m << ',' << r.key << ',' << format_double(r.rmse) << ',' << format_double(r.mae) << ','
             << format_double(r.smape) << '\n';
    for (const auto& r : dec.daytype) {
      daytype << m << ',' << r.key << ',' << r.days << ',' << format_double(r.rmse) << ','
              << format_double(r.mae) << ',' << format_double(r.smape) << '\n';
      daytype_json[m][r.key] = {{"rmse", r.rmse}, {"mae", r.mae}, {"smape", r.smape}, {"days", r.days}};
    }
  }
  metrics["daytype"] = daytype_json;
  write_json(dir / "metrics.json", metrics);
  log << "evaluate: scored " << preds.size() << " models\n";
}

std::vector<std::string> explained_features(const PipelineConfig& c,
                                            const std::map<std::string, std::vector<std::string>>& selected,
                                            const FeatureTable& table) {
  std::vector<std::string> out = c.explain.features;
  if (out.empty()) {
    for (const auto& spec : combination_models())
      if (spec.name == "M6")
        out = columns_for(spec.features, selected);
  }
  for (const auto& f : out)
    if (!table.has_column(f)) throw Error("explain feature '" + f + "' is not in the feature table");
  if (out.size() > c.explain.max_features) out.resize(c.explain.max_features);
  return out;
}

ModelSpec find_model(const std::string& name) {
  for (const auto& m : all_models())
    if (m.name == name) return m;
  throw Error("unknown model '" + name + "'");
}

bool is_text_column(const std::string& name) {
  return !(name.starts_with("D.") || name.starts_with("C.") || name.starts_with("T."));
}

// Calendar and temperature of the target day plus the daily means of the
// three demand lags.
Eigen::MatrixXd confounders(const DesignMatrix& m, std::vector<std::string>& names) {
  std::vector<Eigen::Index> direct;
  for (std::size_t i = 0; i < m.columns.size(); ++i)
    if (m.columns[i].starts_with("C.") || m.columns[i] == "T.temp") direct.push_back(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd X(m.X.rows(), static_cast<Eigen::Index>(direct.size() + kDemandLags.size()));
  names.clear();
  for (std::size_t j = 0; j < direct.size(); ++j) {
    X.col(static_cast<Eigen::Index>(j)) = m.X.col(direct[j]);
    names.push_back(m.columns[static_cast<std::size_t>(direct[j])]);
  }
  for (std::size_t l = 0; l < kDemandLags.size(); ++l) {
    const std::string prefix = "D.lag" + std::to_string(kDemandLags[l]) + ".";
    auto it = std::find_if(m.columns.begin(), m.columns.end(), [&](const std::string& s) { return s.starts_with(prefix); });
    if (it == m.columns.end()) throw Error("design lacks demand lag columns " + prefix);
    const auto first = static_cast<Eigen::Index>(it - m.columns.begin());
    X.col(static_cast<Eigen::Index>(direct.size() + l)) =
        m.X.middleCols(first, static_cast<Eigen::Index>(kSlots)).rowwise().mean();
    names.push_back(prefix + "mean");
  }
  return X;
}

void run_explain(const PipelineConfig& c, std::ostream& log) {
  AlignedDataset data = load_aligned(c);
  FeatureTable table = load_features(c);
  auto selected = load_selected(c);
  const fs::path mj = stage_dir(c, "train") / "models.json";
  require(mj, "train");
  const json models_json = read_json(mj);
  const fs::path dir = stage_dir(c, "explain");
  fs::create_directories(dir / "heatmaps");
  const auto features = explained_features(c, selected, table);
  log << "explain: " << features.size() << " features\n";

  {
    std::vector<PearsonCell> all;
    for (const auto& f : features) {
      auto cells = pearson_grid(f, table, data, c.explain.pearson_min_days);
      auto svg = open_out(dir / "heatmaps" / (file_stem(f) + ".svg"));
      write_pearson_svg(svg, cells, f);
      all.insert(all.end(), cells.begin(), cells.end());
    }
    auto out = open_out(dir / "pearson_grid.csv");
    write_pearson_csv(out, all, c.provenance());
  }

  {
    auto out = open_out(dir / "lime.csv");
    out << c.provenance()
        << "\ndate,feature,coefficient,raw_coefficient,std_error,r2,kernel_width,samples,ridge_increased\n";
    const json* entry = nullptr;
    for (const auto& m : models_json.at("models"))
      if (m.at("name") == c.explain.lime_model) entry = &m;
    if (!entry) throw Error("unknown LIME model '" + c.explain.lime_model + "'");
    if (entry->value("empty", false)) {
      log << "explain: " << c.explain.lime_model << " has no text features; LIME skipped\n";
    } else {
      const json& fit = entry->at("fits").front();
      if (!fit.contains("model"))
        throw Error("model " + c.explain.lime_model + " was not persisted; rerun the 'train' subcommand");
      std::ifstream min(stage_dir(c, "train") / fit.at("model").get<std::string>(), std::ios::binary);
      ExtraTreesModel model = ExtraTreesModel::load(min);
      const ModelSpec spec = find_model(c.explain.lime_model);
      Split s = split_design(build_design(data, table, spec.features, columns_for(spec.features, selected)), c);
      if (s.train.columns != model.feature_names())
        throw Error("persisted model " + c.explain.lime_model + " does not match the current features; rerun 'train'");
      const Standardizer st = Standardizer::fit(s.train.X);
      const auto days = std::min<std::size_t>(c.explain.lime_days, static_cast<std::size_t>(s.test.X.rows()));
      for (std::size_t r = 0; r < days; ++r) {
        Eigen::VectorXd row = s.test.X.row(static_cast<Eigen::Index>(r)).transpose();
        LimeOptions opt = c.explain.lime;
        opt.seed = derive_seed(c.explain.lime.seed, r);
        LimeReport rep = lime_explain(model, {row.data(), static_cast<std::size_t>(row.size())}, st, opt);
        const std::string date = format_date(s.test.target_day(r));
        for (std::size_t j = 0; j < rep.features.size(); ++j) {
          if (!is_text_column(rep.features[j])) continue;
          out << date << ',' << csv_field(rep.features[j]) << ',' << format_double(rep.coefficients[j]) << ','
              << format_double(rep.raw_coefficients[j]) << ',' << format_double(rep.std_errors[j]) << ','
              << format_double(rep.r2) << ',' << format_double(rep.kernel_width) << ',' << rep.samples << ','
              << (rep.ridge_increased ? 1 : 0) << '\n';
        }
      }
    }
  }

  {
    std::vector<EffectReport> reports;
    const FeatureSetSpec dct{true, true, true, {}};
    for (const auto& f : features) {
      const std::vector<std::string> one{f};
      Split s = split_design(build_design(data, table, dct, one), c);
      std::vector<std::string> names;
      Eigen::MatrixXd X = confounders(s.train, names);
      Eigen::VectorXd T = s.train.X.col(s.train.X.cols() - 1);
      DmlConfig cfg = c.explain.dml;
      cfg.seed = derive_seed(c.explain.dml.seed, reports.size());
      reports.push_back(effect_profile(f, X, T, s.train.Y, cfg));
      std::size_t kept = 0;
      for (const auto& e : reports.back().entries) kept += e.retained ? 1 : 0;
      log << "explain: " << f << " significant in " << kept << " of 48 half-hours\n";
    }
    auto out = open_out(dir / "effects.csv");
    write_effects_csv(out, reports, c.provenance());
  }
}

std::string fmt2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string metric_cell(const json& m, const char* metric, bool with_std) {
  const json& v = m.at(metric);
  std::string out = fmt2(v.at("mean").get<double>());
  if (with_std) out += " ± " + fmt2(v.at("std").get<double>());
  return out;
}

void run_report(const PipelineConfig& c, std::ostream& log) {
  const fs::path mp = stage_dir(c, "evaluate") / "metrics.json";
  require(mp, "evaluate");
  const fs::path sp = stage_dir(c, "select") / "selected.json";
  require(sp, "select");
  const json metrics = read_json(mp);
  const json sel = read_json(sp);
  const json& models = metrics.at("models");
  const bool multi = c.forecast.seeds.size() > 1;

  std::ostringstream r;
  r << "# Day-ahead load forecasting report\n\n";
  r << "config_hash: `" << c.hash << "`  \nseed: " << c.seed << "  \nwindow: " << format_date(c.window.first)
    << " to " << format_date(c.window.last) << "  \ntest period starts: " << format_date(c.split) << "  \n";
  if (multi) r << "Metrics are mean ± std over " << c.forecast.seeds.size() << " training seeds.\n";
  r << '\n';

  r << "## Benchmark models\n\n| Model | RMSE (MW) | MAE (MW) | SMAPE (%) |\n|---|---|---|---|\n";
  for (const auto& m : benchmark_models())
    r << "| " << m.name << " | " << metric_cell(models.at(m.name), "rmse", multi) << " | "
      << metric_cell(models.at(m.name), "mae", multi) << " | " << metric_cell(models.at(m.name), "smape", multi)
      << " |\n";
  if (metrics.contains("official"))
    r << "| Official | " << metric_cell(metrics["official"], "rmse", false) << " | "
      << metric_cell(metrics["official"], "mae", false) << " | " << metric_cell(metrics["official"], "smape", false)
      << " |\n";
  r << "\nSame-half-hour persistence from one week earlier: RMSE "
    << metric_cell(metrics.at("persistence"), "rmse", false) << " MW, MAE "
    << metric_cell(metrics.at("persistence"), "mae", false) << " MW, SMAPE "
    << metric_cell(metrics.at("persistence"), "smape", false) << " %.\n\n";

  r << "## Textual feature groups added to D+C+T\n\n"
    << "| Group | #original | #selected | RMSE (MW) | MAE (MW) | SMAPE (%) |\n|---|---|---|---|---|---|\n";
  const json& counts = sel.at("counts");
  for (const auto& m : group_models()) {
    const std::string g = m.features.text_groups.front();
    const std::size_t orig = counts.contains(g) ? counts[g].at("original").get<std::size_t>() : 0;
    const std::size_t kept = counts.contains(g) ? counts[g].at("selected").get<std::size_t>() : 0;
    r << "| " << g << " | " << orig << " | " << kept << " | " << metric_cell(models.at(m.name), "rmse", multi)
      << " | " << metric_cell(models.at(m.name), "mae", multi) << " | "
      << metric_cell(models.at(m.name), "smape", multi) << " |\n";
  }

  r << "\n## Feature combinations\n\n| Model | Groups | RMSE (MW) | MAE (MW) | SMAPE (%) |\n|---|---|---|---|---|\n";
  for (const auto& m : combination_models()) {
    std::string groups;
    for (const auto& g : m.features.text_groups) groups += (groups.empty() ? "" : "+") + g;
    r << "| " << m.name << " | " << groups << " | " << metric_cell(models.at(m.name), "rmse", multi) << " | "
      << metric_cell(models.at(m.name), "mae", multi) << " | " << metric_cell(models.at(m.name), "smape", multi)
      << " |\n";
  }

  r << "\n## Errors by day type (first seed)\n\n"
    << "| Day type | RMSE D+C+T | RMSE M6 | MAE D+C+T | MAE M6 | SMAPE D+C+T | SMAPE M6 |\n|---|---|---|---|---|---|---|\n";
  const json& dt = metrics.at("daytype");
  for (const char* key : {"weekday", "weekend"}) {
    const char* label = key[4] == 'd' ? "Weekdays" : "Weekends";
    r << "| " << label;
    for (const char* metric : {"rmse", "mae", "smape"})
      r << " | " << fmt2(dt.at("D+C+T").at(key).at(metric).get<double>()) << " | "
        << fmt2(dt.at("M6").at(key).at(metric).get<double>());
    r << " |\n";
  }

  r << "\n## Diebold-Mariano p-values\n\nOne-sided; a small p-value means the column model is more accurate than "
       "the row model.\n\n|";
  const auto dm_models = metrics.at("dm").at("models").get<std::vector<std::string>>();
  for (const auto& m : dm_models) r << " | " << m;
  r << " |\n|---";
  for (std::size_t i = 0; i < dm_models.size(); ++i) r << "|---";
  r << "|\n";
  const json& p = metrics.at("dm").at("p_column_better_than_row");
  for (std::size_t i = 0; i < dm_models.size(); ++i) {
    r << "| " << dm_models[i];
    for (std::size_t j = 0; j < dm_models.size(); ++j) {
      const json& v = p[i][j];
      if (v.is_null()) {
        r << " | n/a";
        continue;
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << v.get<double>();
      const double pv = v.get<double>();
      const std::string stars = i == j ? "" : pv < 0.01 ? "\\*\\*" : pv < 0.05 ? "\\*" : "";
      r << " | " << (stars.empty() ? cell.str() : "**" + cell.str() + "**" + stars);
    }
    r << " |\n";
  }
  auto out = open_out(c.output_dir / "report.md");
  out << r.str();
  log << "report: wrote " << (c.output_dir / "report.md").string() << '\n';
}

}  // namespace

void run_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
  auto t0 = Clock::now();
  switch (stage) {
    case Stage::synth: run_synth(config, log); break;
    case Stage::features: run_features(config, log); break;
    case Stage::select: run_select(config, log); break;
    case Stage::train: run_train(config, log); break;
    case Stage::evaluate: run_evaluate(config, log); break;
    case Stage::explain: run_explain(config, log); break;
    case Stage::report: run_report(config, log); break;
  }
  log << stage_name(stage) << ": finished in " << std::fixed << std::setprecision(2) << seconds_since(t0) << " s\n";
}

}  // namespace newsload
