#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsload/features.hpp"

namespace newsload {

using Document = std::vector<std::string>;

struct LdaConfig {
  int topics = 10;
  /// Document-topic prior; non-positive means 50 / topics.
  double alpha = 0.0;
  double beta = 0.01;
  int sweeps = 1000;
  int burn_in = 500;
  std::uint64_t seed = 1;
  /// Fold-in sweeps used when inferring unseen documents.
  int infer_sweeps = 60;
  int infer_burn_in = 20;

  double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / topics; }
  void validate() const;
};

struct TopicInference {
  std::vector<double> distribution;
  /// True when no token was in the model vocabulary (uniform returned).
  bool out_of_vocabulary = false;
};

class LdaModel {
 public:
  int topics() const { return static_cast<int>(phi_.size()); }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  /// Topic-word distributions, topics() rows of vocabulary_size().
  const std::vector<std::vector<double>>& phi() const { return phi_; }
  /// Document-topic distributions of the training documents.
  const std::vector<std::vector<double>>& theta() const { return theta_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }

  /// Fold-in Gibbs inference with phi held fixed. Deterministic per document.
  TopicInference infer(std::span<const std::string> tokens) const;

  /// Indices of the `n` most probable words of a topic.
  std::vector<std::size_t> top_words(int topic, std::size_t n) const;

  /// Versioned text artifact; theta is not persisted.
  void save(std::ostream& out) const;
  static LdaModel load(std::istream& in);

 private:
  friend LdaModel fit_lda(std::span<const Document>, const LdaConfig&);

  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<std::vector<double>> phi_;
  std::vector<std::vector<double>> theta_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::uint64_t seed_ = 0;
  int infer_sweeps_ = 60;
  int infer_burn_in_ = 20;
};

/// Collapsed Gibbs sampling. phi and theta are averages of the smoothed
/// estimates over all post-burn-in sweeps.
LdaModel fit_lda(std::span<const Document> documents, const LdaConfig& config);

/// Mean of the articles' topic distributions; uniform with the missing flag
/// on days without articles.
DailyFeatureRow daily_topic_features(Date date, TextType type, const LdaModel& model,
                                     std::span<const ArticleText> articles);

/// Average UMass coherence of the topics' top-`top_n` words, using document
/// co-occurrence counts from `documents`.
double topic_coherence(const LdaModel& model, std::span<const Document> documents,
                       std::size_t top_n = 10);

struct TopicCountSelection {
  int best = 0;
  std::vector<std::pair<int, double>> scores;
};

/// Fits one model per candidate and keeps the highest coherence; ties go to
/// the smaller topic count.
TopicCountSelection select_topic_count(std::span<const Document> documents,
                                       std::span<const int> candidates, const LdaConfig& base);

/// Sum over documents of log p(w | theta_d, phi) with theta_d from fold-in.
double held_out_log_likelihood(const LdaModel& model, std::span<const Document> documents);

}  // namespace newsload
