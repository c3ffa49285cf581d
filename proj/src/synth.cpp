#include "newsload/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "newsload/random.hpp"
#include "newsload/textprep.hpp"

namespace newsload {

using nlohmann::json;

void SynthConfig::validate() const {
  if (last < first) throw Error("synth date range is empty");
  if (event_lag < 1) throw Error("synth event lag must be >= 1 so text precedes demand");
  if (weekly_amplitude < 0 || annual_amplitude < 0 || temperature_amplitude < 0)
    throw Error("synth amplitudes must be >= 0");
  if (daily_noise < 0 || slot_noise < 0 || temperature_noise < 0) throw Error("synth noise must be >= 0");
  for (double p : {event_probability, keyword_rate, background_rate})
    if (!(p >= 0 && p <= 1)) throw Error("synth probabilities must lie in [0, 1]");
  if (articles_per_day < 1) throw Error("synth needs at least one article per day");
  if (topic_pools < 1 || words_per_pool < 5) throw Error("synth vocabulary pools are too small");
  if (embedding_dim < 1) throw Error("synth embedding dimension must be >= 1");
  for (const auto& k : event_keywords)
    if (k.size() < 3 || to_lower_utf8(k) != k)
      throw Error("synth keyword '" + k + "' must be lowercase with at least 3 letters");
}

std::array<double, kSlots> intraday_template() {
  std::array<double, kSlots> t{};
  double sum = 0.0;
  for (std::size_t h = 0; h < kSlots; ++h) {
    const double hour = (static_cast<double>(h) + 0.5) / 2.0;
    const double day = 1.0 / (1.0 + std::exp(-(hour - 6.5) * 1.5)) - 1.0 / (1.0 + std::exp(-(hour - 22.5) * 1.5));
    t[h] = 0.7 + 0.2 * day + 0.12 * std::exp(-std::pow(hour - 8.5, 2) / 4.5) +
           0.22 * std::exp(-std::pow(hour - 18.0, 2) / 6.0);
    sum += t[h];
  }
  const double mean = sum / static_cast<double>(kSlots);
  for (double& v : t) v /= mean;
  return t;
}

double SynthTruth::daily_level(Date date, double temperature) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const SynthConfig& c = config;
  double level = c.base_load;
  level += c.weekly_amplitude * std::cos(two_pi * (day_of_week(date) - 2) / 7.0);
  level += c.annual_amplitude * std::cos(two_pi * (day_of_year(date) - 15) / 365.25);
  if (holidays.count(date)) level += c.holiday_effect;
  level += c.temperature_sensitivity * (temperature - c.reference_temperature);
  return level;
}

std::array<double, kSlots> SynthTruth::noiseless_demand(Date date, double temperature) const {
  const double level = daily_level(date, temperature);
  const bool effect = std::binary_search(effect_days.begin(), effect_days.end(), date);
  std::array<double, kSlots> out{};
  for (std::size_t h = 0; h < kSlots; ++h)
    out[h] = level * template_shape[h] + (effect ? config.event_effect : 0.0);
  return out;
}

namespace {

const std::vector<std::string> kSentimentWords = {
    "amazing", "awful", "bad", "best", "calm", "cold", "dangerous", "difficult", "disappointing",
    "easy", "excellent", "fine", "good", "great", "happy", "horrible", "nice", "poor", "sad",
    "safe", "serious", "strong", "successful", "terrible", "warm", "weak", "wonderful", "worst"};

const std::vector<std::string> kGlue = {"the", "and", "of", "in", "to", "for", "with", "on"};

std::vector<std::vector<std::string>> make_pools(const SynthConfig& c) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                 "br", "tr", "pl", "gr", "st", "sk"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::unordered_set<std::string> used(kSentimentWords.begin(), kSentimentWords.end());
  used.insert(c.event_keywords.begin(), c.event_keywords.end());
  const StopwordSet& stop = StopwordSet::english();
  Rng rng(derive_seed(c.seed, 0x9001));
  std::vector<std::vector<std::string>> pools(static_cast<std::size_t>(c.topic_pools));
  for (auto& pool : pools) {
    while (pool.size() < static_cast<std::size_t>(c.words_per_pool)) {
      std::string w;
      const std::size_t syllables = 2 + uniform_index(rng, 2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += onsets[uniform_index(rng, std::size(onsets))];
        w += vowels[uniform_index(rng, std::size(vowels))];
      }
      if (w.size() < 4 || stop.contains(w) || !used.insert(w).second) continue;
      pool.push_back(w);
    }
  }
  return pools;
}

struct ArticleWriter {
  const SynthConfig& c;
  const std::vector<std::vector<std::string>>& pools;
  Rng& rng;

  const std::string& pick(const std::vector<std::string>& v) { return v[uniform_index(rng, v.size())]; }

  std::vector<std::string> words(std::size_t pool, std::size_t count, double sentiment_rate) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) {
      const double u = uniform01(rng);
      if (u < sentiment_rate) {
        out.push_back(pick(kSentimentWords));
      } else if (u < sentiment_rate + 0.15) {
        out.push_back(pick(kGlue));
      } else if (uniform01(rng) < 0.85) {
        out.push_back(pick(pools[pool]));
      } else {
        out.push_back(pick(pools[uniform_index(rng, pools.size())]));
      }
    }
    return out;
  }

  void insert_keyword(std::vector<std::string>& ws) {
    ws.insert(ws.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, ws.size() + 1)),
              pick(c.event_keywords));
  }

  static std::string join(const std::vector<std::string>& ws, bool capitalize) {
    std::string s;
    for (const auto& w : ws) {
      if (!s.empty()) s += ' ';
      s += w;
    }
    if (capitalize && !s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
  }

  NewsItem article(Date date, bool mention) {
    NewsItem item;
    item.date = date;
    item.section = std::string(kSections[uniform_index(rng, kSections.size())]);
    const std::size_t pool = uniform_index(rng, pools.size());
    auto title = words(pool, 5 + uniform_index(rng, 4), 0.15);
    if (mention) insert_keyword(title);
    item.title = join(title, true);
    if (uniform01(rng) < 0.02) {
      item.empty_description = true;
    } else {
      item.description = join(words(pool, 12 + uniform_index(rng, 8), 0.08), true) + ".";
    }
    const std::size_t sentences = 3 + uniform_index(rng, 3);
    const std::size_t keyword_sentence = uniform_index(rng, sentences);
    for (std::size_t s = 0; s < sentences; ++s) {
      auto ws = words(pool, 8 + uniform_index(rng, 7), 0.06);
      if (mention && s == keyword_sentence) insert_keyword(ws);
      if (!item.body.empty()) item.body += ' ';
      item.body += join(ws, true) + (uniform01(rng) < 0.1 ? "!" : ".");
    }
    return item;
  }
};

}  // namespace

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  SynthTruth& truth = out.truth;
  truth.config = config;
  truth.template_shape = intraday_template();
  const int first_year = static_cast<int>(std::chrono::year_month_day{config.first}.year());
  const int last_year = static_cast<int>(std::chrono::year_month_day{config.last}.year());
  for (int y = first_year; y <= last_year; ++y)
    for (auto [m, d] : {std::pair{1u, 1u}, {12u, 25u}, {12u, 26u}}) {
      Date h = std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
      if (h >= config.first && h <= config.last) truth.holidays.insert(h);
    }

  const auto pools = make_pools(config);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::vector<Date> dates;
  for (Date d = config.first; d <= config.last; d += std::chrono::days{1}) dates.push_back(d);
  std::vector<bool> event(dates.size());
  {
    Rng rng(derive_seed(config.seed, 0xE7E));
    for (std::size_t i = 0; i < dates.size(); ++i) event[i] = uniform01(rng) < config.event_probability;
  }
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!event[i]) continue;
    truth.event_days.push_back(dates[i]);
    Date e = dates[i] + std::chrono::days{config.event_lag};
    if (e <= config.last) truth.effect_days.push_back(e);
  }

  for (std::size_t i = 0; i < dates.size(); ++i) {
    const Date d = dates[i];
    Rng rng(derive_seed(config.seed, 0x100000 + i));
    AlignedDay day;
    day.date = d;
    day.calendar = calendar_for(d, truth.holidays);
    day.temperature = config.temperature_mean +
                      config.temperature_amplitude * std::cos(two_pi * (day_of_year(d) - 200) / 365.25) +
                      config.temperature_noise * standard_normal(rng);
    const auto clean = truth.noiseless_demand(d, day.temperature);
    const double shift = config.daily_noise * standard_normal(rng);
    for (std::size_t h = 0; h < kSlots; ++h)
      day.demand[h] = std::max(0.0, clean[h] + shift + config.slot_noise * standard_normal(rng));
    ArticleWriter writer{config, pools, rng};
    for (int a = 0; a < config.articles_per_day; ++a) {
      const double rate = event[i] ? config.keyword_rate : config.background_rate;
      day.news.push_back(writer.article(d, uniform01(rng) < rate));
    }
    out.data.days.push_back(std::move(day));
  }

  std::vector<std::string> vocab(config.event_keywords.begin(), config.event_keywords.end());
  for (const auto& pool : pools) vocab.insert(vocab.end(), pool.begin(), pool.end());
  vocab.insert(vocab.end(), kSentimentWords.begin(), kSentimentWords.end());
  vocab.insert(vocab.end(), kGlue.begin(), kGlue.end());
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  Rng erng(derive_seed(config.seed, 0xE3B));
  for (const auto& w : vocab) {
    std::vector<double> v(static_cast<std::size_t>(config.embedding_dim));
    for (double& x : v) x = std::round(standard_normal(erng) * 1e4) / 1e4;
    out.embeddings.emplace_back(w, std::move(v));
  }
  return out;
}

namespace {

json config_to_json(const SynthConfig& c) {
  return json{{"first", format_date(c.first)},
              {"last", format_date(c.last)},
              {"base_load", c.base_load},
              {"weekly_amplitude", c.weekly_amplitude},
              {"annual_amplitude", c.annual_amplitude},
              {"holiday_effect", c.holiday_effect},
              {"temperature_sensitivity", c.temperature_sensitivity},
              {"reference_temperature", c.reference_temperature},
              {"temperature_mean", c.temperature_mean},
              {"temperature_amplitude", c.temperature_amplitude},
              {"temperature_noise", c.temperature_noise},
              {"event_keywords", c.event_keywords},
              {"event_effect", c.event_effect},
              {"event_lag", c.event_lag},
              {"event_probability", c.event_probability},
              {"keyword_rate", c.keyword_rate},
              {"background_rate", c.background_rate},
              {"daily_noise", c.daily_noise},
              {"slot_noise", c.slot_noise},
              {"articles_per_day", c.articles_per_day},
              {"topic_pools", c.topic_pools},
              {"words_per_pool", c.words_per_pool},
              {"embedding_dim", c.embedding_dim},
              {"seed", c.seed}};
}

template <typename T>
void read_field(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      field = it->get<T>();
    } catch (const json::exception&) {
      throw Error(std::string("synth config field '") + key + "' has the wrong type");
    }
  }
}

}  // namespace

std::string synth_config_json(const SynthConfig& c) { return config_to_json(c).dump(2); }

SynthConfig parse_synth_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("synth config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("synth config must be a JSON object");
  const json defaults = config_to_json(SynthConfig{});
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!defaults.contains(it.key())) throw Error("unknown synth config field '" + it.key() + "'");
  SynthConfig c;
  std::string first = format_date(c.first), last = format_date(c.last);
  read_field(j, "first", first);
  read_field(j, "last", last);
  c.first = parse_date(first);
  c.last = parse_date(last);
  read_field(j, "base_load", c.base_load);
  read_field(j, "weekly_amplitude", c.weekly_amplitude);
  read_field(j, "annual_amplitude", c.annual_amplitude);
  read_field(j, "holiday_effect", c.holiday_effect);
  read_field(j, "temperature_sensitivity", c.temperature_sensitivity);
  read_field(j, "reference_temperature", c.reference_temperature);
  read_field(j, "temperature_mean", c.temperature_mean);
  read_field(j, "temperature_amplitude", c.temperature_amplitude);
  read_field(j, "temperature_noise", c.temperature_noise);
  read_field(j, "event_keywords", c.event_keywords);
  read_field(j, "event_effect", c.event_effect);
  read_field(j, "event_lag", c.event_lag);
  read_field(j, "event_probability", c.event_probability);
  read_field(j, "keyword_rate", c.keyword_rate);
  read_field(j, "background_rate", c.background_rate);
  read_field(j, "daily_noise", c.daily_noise);
  read_field(j, "slot_noise", c.slot_noise);
  read_field(j, "articles_per_day", c.articles_per_day);
  read_field(j, "topic_pools", c.topic_pools);
  read_field(j, "words_per_pool", c.words_per_pool);
  read_field(j, "embedding_dim", c.embedding_dim);
  read_field(j, "seed", c.seed);
  c.validate();
  return c;
}

void write_synth(const SynthOutput& out, const std::filesystem::path& dir) {
  write_aligned(out.data, dir);
  {
    std::ofstream f(dir / "embeddings.txt", std::ios::binary);
    for (const auto& [word, vec] : out.embeddings) {
      f << word;
      for (double v : vec) f << ' ' << format_double(v);
      f << '\n';
    }
    if (!f) throw Error("failed to write " + (dir / "embeddings.txt").string());
  }
  json truth;
  truth["config"] = config_to_json(out.truth.config);
  std::vector<std::string> events, effects;
  for (Date d : out.truth.event_days) events.push_back(format_date(d));
  for (Date d : out.truth.effect_days) effects.push_back(format_date(d));
  truth["event_days"] = events;
  truth["effect_days"] = effects;
  truth["tau_mw"] = out.truth.config.event_effect;
  truth["lag_days"] = out.truth.config.event_lag;
  truth["keywords"] = out.truth.config.event_keywords;
  truth["template"] = out.truth.template_shape;
  std::ofstream f(dir / "truth.json", std::ios::binary);
  f << truth.dump(2) << '\n';
  if (!f) throw Error("failed to write " + (dir / "truth.json").string());
}

}  // namespace newsload
