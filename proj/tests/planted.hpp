#pragma once

// Generators with known ground truth, shared by unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "newsload/random.hpp"
#include "newsload/topics.hpp"

namespace planted {

struct TopicCorpus {
  std::vector<newsload::Document> docs;
  std::vector<int> doc_pool;
  /// Pool of every vocabulary word, keyed by word.
  std::vector<std::pair<std::string, int>> word_pool;
};

inline std::string pool_word(int pool, int i) {
  return std::string(pool == 0 ? "alpha" : "omega") + static_cast<char>('a' + i / 26) +
         static_cast<char>('a' + i % 26);
}

/// Each document draws all its tokens uniformly from one of two disjoint pools.
inline TopicCorpus two_pool_corpus(std::size_t docs, int words_per_pool, std::size_t doc_length,
                                   std::uint64_t seed) {
  TopicCorpus out;
  newsload::Rng rng(seed);
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < words_per_pool; ++i) out.word_pool.emplace_back(pool_word(p, i), p);
  for (std::size_t d = 0; d < docs; ++d) {
    int pool = static_cast<int>(d % 2);
    newsload::Document doc;
    for (std::size_t t = 0; t < doc_length; ++t)
      doc.push_back(pool_word(pool, static_cast<int>(newsload::uniform_index(rng, words_per_pool))));
    out.docs.push_back(std::move(doc));
    out.doc_pool.push_back(pool);
  }
  return out;
}

/// Share of vocabulary words whose most likely topic matches their pool under
/// the best one-to-one topic-to-pool matching (two topics, two pools).
inline double topic_purity(const newsload::LdaModel& model, const TopicCorpus& corpus) {
  const auto& vocab = model.vocabulary();
  std::array<std::array<int, 2>, 2> hits{};  // [topic][pool]
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    int best = model.phi()[0][w] >= model.phi()[1][w] ? 0 : 1;
    auto it = std::find_if(corpus.word_pool.begin(), corpus.word_pool.end(),
                           [&](const auto& wp) { return wp.first == vocab[w]; });
    hits[best][it->second] += 1;
  }
  int straight = hits[0][0] + hits[1][1];
  int crossed = hits[0][1] + hits[1][0];
  return static_cast<double>(std::max(straight, crossed)) / static_cast<double>(vocab.size());
}

/// x_t = 0.5 x_{t-1} + e, y_t = 0.5 y_{t-1} + coupling * x_{t-lag} + e.
inline std::pair<std::vector<double>, std::vector<double>> ar1_pair(std::size_t n, double coupling,
                                                                    int lag, std::uint64_t seed,
                                                                    double ar = 0.5) {
  newsload::Rng rng(seed);
  const std::size_t burn = 100;
  std::vector<double> x(n + burn, 0.0), y(n + burn, 0.0);
  for (std::size_t t = 1; t < n + burn; ++t) {
    x[t] = ar * x[t - 1] + newsload::standard_normal(rng);
    double drive = t >= static_cast<std::size_t>(lag) ? coupling * x[t - lag] : 0.0;
    y[t] = ar * y[t - 1] + drive + newsload::standard_normal(rng);
  }
  return {std::vector<double>(x.begin() + burn, x.end()), std::vector<double>(y.begin() + burn, y.end())};
}

struct DmlData {
  Eigen::MatrixXd X;
  Eigen::VectorXd T;
  Eigen::VectorXd Y;
};

/// Y = sin(2 x1) + x2^2 + tau * T + noise with T independent of X.
inline DmlData dml_data(std::size_t n, double tau, std::uint64_t seed, double noise = 0.5) {
  newsload::Rng rng(seed);
  DmlData d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) d.X(i, j) = newsload::standard_normal(rng);
    d.T(i) = newsload::standard_normal(rng);
    d.Y(i) = std::sin(2.0 * d.X(i, 0)) + d.X(i, 1) * d.X(i, 1) + tau * d.T(i) +
             noise * newsload::standard_normal(rng);
  }
  return d;
}

}  // namespace planted
