#include "newsload/topics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "newsload/parallel.hpp"
#include "newsload/random.hpp"

namespace newsload {

namespace {

constexpr const char* kLdaMagic = "newsload-lda";
constexpr int kLdaVersion = 1;
constexpr std::uint64_t kInferStream = 0x1F0D;

void normalize_row(std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  for (double& v : row) v /= s;
}

std::size_t sample_discrete(const std::vector<double>& weights, double total, Rng& rng) {
  double u = uniform01(rng) * total;
  std::size_t k = 0;
  for (; k + 1 < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0) break;
  }
  return k;
}

}  // namespace

void LdaConfig::validate() const {
  if (topics < 1) throw Error("LDA topic count must be >= 1");
  if (!(beta > 0)) throw Error("LDA beta must be > 0");
  if (sweeps <= burn_in || burn_in < 0) throw Error("LDA sweeps must exceed burn-in");
  if (infer_sweeps <= infer_burn_in || infer_burn_in < 0)
    throw Error("LDA inference sweeps must exceed inference burn-in");
}

LdaModel fit_lda(std::span<const Document> documents, const LdaConfig& config) {
  config.validate();
  if (documents.empty()) throw Error("LDA needs at least one document");
  if (static_cast<std::size_t>(config.topics) > documents.size())
    throw Error("LDA topic count exceeds the number of documents");

  LdaModel model;
  {
    std::set<std::string> words;
    for (const auto& d : documents) words.insert(d.begin(), d.end());
    if (words.empty()) throw Error("LDA corpus has no tokens");
    model.vocabulary_.assign(words.begin(), words.end());
    for (std::size_t i = 0; i < model.vocabulary_.size(); ++i)
      model.word_index_.emplace(model.vocabulary_[i], i);
  }
  const std::size_t K = static_cast<std::size_t>(config.topics);
  const std::size_t V = model.vocabulary_.size();
  const std::size_t D = documents.size();
  const double alpha = config.resolved_alpha();
  const double beta = config.beta;
  const double vbeta = beta * static_cast<double>(V);

  std::vector<std::vector<std::uint32_t>> words(D);
  for (std::size_t d = 0; d < D; ++d) {
    words[d].reserve(documents[d].size());
    for (const auto& w : documents[d])
      words[d].push_back(static_cast<std::uint32_t>(model.word_index_.at(w)));
  }

  Rng rng(config.seed);
  std::vector<std::vector<std::uint32_t>> z(D);
  std::vector<std::int32_t> n_wk(V * K, 0), n_dk(D * K, 0), n_k(K, 0);
  for (std::size_t d = 0; d < D; ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      auto k = static_cast<std::uint32_t>(uniform_index(rng, K));
      z[d][i] = k;
      ++n_wk[words[d][i] * K + k];
      ++n_dk[d * K + k];
      ++n_k[k];
    }
  }

  std::vector<std::vector<double>> phi_sum(K, std::vector<double>(V, 0.0));
  std::vector<std::vector<double>> theta_sum(D, std::vector<double>(K, 0.0));
  std::vector<double> p(K);

  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      std::int32_t* doc_counts = &n_dk[d * K];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::uint32_t w = words[d][i];
        std::uint32_t k = z[d][i];
        std::int32_t* word_counts = &n_wk[w * K];
        --word_counts[k];
        --doc_counts[k];
        --n_k[k];
        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          p[t] = (doc_counts[t] + alpha) * (word_counts[t] + beta) / (n_k[t] + vbeta);
          total += p[t];
        }
        k = static_cast<std::uint32_t>(sample_discrete(p, total, rng));
        z[d][i] = k;
        ++word_counts[k];
        ++doc_counts[k];
        ++n_k[k];
      }
    }
    if (sweep >= config.burn_in) {
      for (std::size_t k = 0; k < K; ++k) {
        double denom = n_k[k] + vbeta;
        for (std::size_t w = 0; w < V; ++w) phi_sum[k][w] += (n_wk[w * K + k] + beta) / denom;
      }
      for (std::size_t d = 0; d < D; ++d) {
        double denom = static_cast<double>(words[d].size()) + static_cast<double>(K) * alpha;
        for (std::size_t k = 0; k < K; ++k) theta_sum[d][k] += (n_dk[d * K + k] + alpha) / denom;
      }
    }
  }

  for (auto& row : phi_sum) normalize_row(row);
  for (auto& row : theta_sum) normalize_row(row);
  model.phi_ = std::move(phi_sum);
  model.theta_ = std::move(theta_sum);
  model.alpha_ = alpha;
  model.beta_ = beta;
  model.seed_ = config.seed;
  model.infer_sweeps_ = config.infer_sweeps;
  model.infer_burn_in_ = config.infer_burn_in;
  return model;
}

TopicInference LdaModel::infer(std::span<const std::string> tokens) const {
  const std::size_t K = phi_.size();
  TopicInference out;
  std::vector<std::size_t> ids;
  for (const auto& t : tokens)
    if (auto it = word_index_.find(t); it != word_index_.end()) ids.push_back(it->second);
  if (ids.empty()) {
    out.distribution.assign(K, 1.0 / static_cast<double>(K));
    out.out_of_vocabulary = true;
    return out;
  }
  Rng rng(derive_seed(seed_, kInferStream));
  std::vector<std::uint32_t> z(ids.size());
  std::vector<std::int32_t> n_k(K, 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(uniform_index(rng, K));
    ++n_k[z[i]];
  }
  std::vector<double> p(K), acc(K, 0.0);
  const double denom = static_cast<double>(ids.size()) + static_cast<double>(K) * alpha_;
  for (int sweep = 0; sweep < infer_sweeps_; ++sweep) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --n_k[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        p[k] = (n_k[k] + alpha_) * phi_[k][ids[i]];
        total += p[k];
      }
      z[i] = static_cast<std::uint32_t>(sample_discrete(p, total, rng));
      ++n_k[z[i]];
    }
    if (sweep >= infer_burn_in_)
      for (std::size_t k = 0; k < K; ++k) acc[k] += (n_k[k] + alpha_) / denom;
  }
  normalize_row(acc);
  out.distribution = std::move(acc);
  return out;
}

std::vector<std::size_t> LdaModel::top_words(int topic, std::size_t n) const {
  const auto& row = phi_.at(static_cast<std::size_t>(topic));
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return row[a] != row[b] ? row[a] > row[b] : a < b;
                    });
  idx.resize(n);
  return idx;
}

void LdaModel::save(std::ostream& out) const {
  out << kLdaMagic << ' ' << kLdaVersion << '\n';
  out << "topics " << phi_.size() << '\n';
  out << "vocabulary " << vocabulary_.size() << '\n';
  out << "alpha " << format_double(alpha_) << '\n';
  out << "beta " << format_double(beta_) << '\n';
  out << "seed " << seed_ << '\n';
  out << "infer " << infer_sweeps_ << ' ' << infer_burn_in_ << '\n';
  out << "words\n";
  for (const auto& w : vocabulary_) out << w << '\n';
  out << "phi\n";
  for (const auto& row : phi_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_double(row[i]);
    out << '\n';
  }
}

LdaModel LdaModel::load(std::istream& in) {
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw Error("LDA artifact: expected '" + key + "'");
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kLdaMagic) throw Error("not an LDA model artifact");
  if (version != kLdaVersion) throw Error("unsupported LDA artifact version " + std::to_string(version));
  std::size_t K = 0, V = 0;
  std::string alpha, beta;
  LdaModel m;
  expect("topics");
  in >> K;
  expect("vocabulary");
  in >> V;
  expect("alpha");
  in >> alpha;
  expect("beta");
  in >> beta;
  expect("seed");
  in >> m.seed_;
  expect("infer");
  in >> m.infer_sweeps_ >> m.infer_burn_in_;
  expect("words");
  m.alpha_ = parse_double(alpha);
  m.beta_ = parse_double(beta);
  m.vocabulary_.resize(V);
  for (std::size_t i = 0; i < V; ++i) {
    if (!(in >> m.vocabulary_[i])) throw Error("LDA artifact truncated in vocabulary");
    m.word_index_.emplace(m.vocabulary_[i], i);
  }
  expect("phi");
  m.phi_.assign(K, std::vector<double>(V));
  std::string tok;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w) {
      if (!(in >> tok)) throw Error("LDA artifact truncated in phi");
      m.phi_[k][w] = parse_double(tok);
    }
  return m;
}

DailyFeatureRow daily_topic_features(Date date, TextType type, const LdaModel& model,
                                     std::span<const ArticleText> articles) {
  const auto K = static_cast<std::size_t>(model.topics());
  DailyFeatureRow row{date, type, Family::topic, {}, {}, articles.empty()};
  std::vector<double> mean(K, 0.0);
  if (articles.empty()) {
    std::fill(mean.begin(), mean.end(), 1.0 / static_cast<double>(K));
  } else {
    for (const auto& a : articles) {
      auto inf = model.infer(a.tokens);
      for (std::size_t k = 0; k < K; ++k) mean[k] += inf.distribution[k];
    }
    for (double& v : mean) v /= static_cast<double>(articles.size());
  }
  for (std::size_t k = 0; k < K; ++k) row.add("topic" + std::to_string(k + 1), mean[k]);
  return row;
}

double topic_coherence(const LdaModel& model, std::span<const Document> documents,
                       std::size_t top_n) {
  const auto& vocab = model.vocabulary();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
  std::vector<std::vector<std::uint32_t>> postings(vocab.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    std::set<std::size_t> seen;
    for (const auto& w : documents[d])
      if (auto it = index.find(w); it != index.end()) seen.insert(it->second);
    for (auto w : seen) postings[w].push_back(static_cast<std::uint32_t>(d));
  }
  auto co_docs = [&](std::size_t a, std::size_t b) {
    const auto& pa = postings[a];
    const auto& pb = postings[b];
    std::size_t i = 0, j = 0, n = 0;
    while (i < pa.size() && j < pb.size()) {
      if (pa[i] < pb[j]) ++i;
      else if (pb[j] < pa[i]) ++j;
      else { ++n; ++i; ++j; }
    }
    return static_cast<double>(n);
  };
  double total = 0.0;
  for (int k = 0; k < model.topics(); ++k) {
    auto top = model.top_words(k, top_n);
    double score = 0.0;
    for (std::size_t m = 1; m < top.size(); ++m)
      for (std::size_t l = 0; l < m; ++l) {
        double dl = static_cast<double>(postings[top[l]].size());
        if (dl == 0) continue;
        score += std::log((co_docs(top[m], top[l]) + 1.0) / dl);
      }
    total += score;
  }
  return total / model.topics();
}

TopicCountSelection select_topic_count(std::span<const Document> documents,
                                       std::span<const int> candidates, const LdaConfig& base) {
  if (candidates.empty()) throw Error("topic-count selection needs at least one candidate");
  TopicCountSelection out;
  if (candidates.size() == 1) {
    out.best = candidates.front();
    return out;
  }
  std::vector<double> scores(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    LdaConfig cfg = base;
    cfg.topics = candidates[i];
    scores[i] = topic_coherence(fit_lda(documents, cfg), documents);
  });
  for (std::size_t i = 0; i < candidates.size(); ++i) out.scores.emplace_back(candidates[i], scores[i]);
  auto best = out.scores.front();
  for (const auto& s : out.scores)
    if (s.second > best.second || (s.second == best.second && s.first < best.first)) best = s;
  out.best = best.first;
  return out;
}

double held_out_log_likelihood(const LdaModel& model, std::span<const Document> documents) {
  std::unordered_map<std::string, std::size_t> index;
  const auto& vocab = model.vocabulary();
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
  double ll = 0.0;
  for (const auto& doc : documents) {
    auto theta = model.infer(doc).distribution;
    for (const auto& w : doc) {
      auto it = index.find(w);
      if (it == index.end()) continue;
      double p = 0.0;
      for (int k = 0; k < model.topics(); ++k) p += theta[k] * model.phi()[k][it->second];
      ll += std::log(p);
    }
  }
  return ll;
}

}  // namespace newsload
