#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "newsload/features.hpp"
#include "newsload/ingest.hpp"

namespace newsload {

/// Which blocks enter a forecasting model: demand lags (D), calendar (C),
/// temperature (T) and textual feature groups such as "WF_T".
struct FeatureSetSpec {
  bool demand = true;
  bool calendar = true;
  bool temperature = true;
  std::vector<std::string> text_groups;

  /// "D+C+T", "D+C+T+WF_T", ...
  std::string label() const;
  void validate() const;
};

/// Demand lags in days before the issue day.
inline constexpr std::array<int, 3> kDemandLags = {1, 2, 7};

/// One row per issue day d: features known by d, target = demand of d+1.
struct DesignMatrix {
  std::vector<Date> issue_days;
  std::vector<std::string> columns;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;  // rows x 48

  Date target_day(std::size_t row) const { return issue_days[row] + std::chrono::days{1}; }
  /// Rows whose target day lies in [first, last].
  DesignMatrix subset_by_target(Date first, Date last) const;
  DesignMatrix rows(std::span<const std::size_t> indices) const;
};

/// Builds the day-ahead design. Text columns are read from `text` at day d-1.
/// Rows lacking any lag day, the target day or text row are dropped.
DesignMatrix build_design(const AlignedDataset& data, const FeatureTable& text,
                          const FeatureSetSpec& spec, std::span<const std::string> text_columns);

struct ExtraTreesConfig {
  int trees = 100;
  /// Candidate features per split (K); 0 means round(sqrt(p)).
  int max_features = 0;
  int min_samples_split = 2;
  std::uint64_t seed = 0;

  int resolved_max_features(std::size_t n_features) const;
  void validate(std::size_t n_features) const;
  bool operator==(const ExtraTreesConfig&) const = default;
};

/// Extremely randomized regression trees with vector-valued leaves. Each tree
/// sees the full training set; each split draws K non-constant candidate
/// features and one uniform threshold per feature, keeping the candidate
/// with the largest variance reduction summed over outputs.
class ExtraTreesModel {
 public:
  const ExtraTreesConfig& config() const { return config_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_outputs() const { return n_outputs_; }
  std::size_t n_trees() const { return trees_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  Eigen::VectorXd predict(std::span<const double> row) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_tree(std::size_t tree, std::span<const double> row) const;
  /// Maps the named row onto the model's features; throws naming the first
  /// feature the row lacks.
  Eigen::VectorXd predict_named(std::span<const std::string> names,
                                std::span<const double> values) const;

  /// Leaf row-sets of a tree; every training row appears exactly once.
  std::vector<std::vector<std::uint32_t>> leaf_rows(std::size_t tree) const;

  /// Binary artifact: config, feature manifest, training targets and tree
  /// structure. Leaf means are recomputed on load, bit-identically.
  void save(std::ostream& out, std::string_view provenance = {}) const;
  static ExtraTreesModel load(std::istream& in);

  bool operator==(const ExtraTreesModel&) const;

 private:
  friend ExtraTreesModel fit_extratrees(const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                                        const ExtraTreesConfig&, std::vector<std::string>);

  struct Node {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0.0;
    std::int32_t left = -1;     // child index, or leaf index for leaves
    std::int32_t right = -1;
    std::uint32_t begin = 0;    // leaf row range in Tree::rows
    std::uint32_t end = 0;
    bool operator==(const Node&) const = default;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> rows;
    std::vector<double> leaf_values;  // leaf count x outputs
  };

  void compute_leaf_values(Tree& tree) const;
  const double* leaf_for(const Tree& tree, std::span<const double> row) const;

  ExtraTreesConfig config_;
  std::size_t n_features_ = 0;
  std::size_t n_outputs_ = 0;
  std::vector<std::string> feature_names_;
  std::vector<double> targets_;  // row-major n x outputs
  std::vector<Tree> trees_;
};

/// Trees are grown in parallel; tree t uses a seed derived from (seed, t).
ExtraTreesModel fit_extratrees(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const ExtraTreesConfig& config,
                               std::vector<std::string> feature_names = {});

struct GridScore {
  ExtraTreesConfig config;
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;
};

struct GridSearchResult {
  ExtraTreesConfig best;
  std::vector<GridScore> table;
};

/// [begin, end) row ranges of `folds` contiguous, time-ordered folds.
std::vector<std::pair<std::size_t, std::size_t>> contiguous_folds(std::size_t rows,
                                                                  std::size_t folds);

/// Contiguous k-fold CV; score = mean over folds of the validation rows'
/// mean per-row RMSE. Ties prefer fewer trees, then smaller K.
GridSearchResult grid_search_cv(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                std::span<const ExtraTreesConfig> grid, std::size_t folds = 5);

/// Default grid: trees {100, 300}, K {sqrt(p), p/3}, min split {2, 5}.
std::vector<ExtraTreesConfig> default_grid(std::size_t n_features, std::uint64_t seed);

void write_predictions(std::ostream& out, std::span<const Date> dates, const Eigen::MatrixXd& values,
                       std::string_view provenance = {});

struct PredictionTable {
  std::vector<Date> dates;
  Eigen::MatrixXd values;
};

PredictionTable read_predictions(std::istream& in);

}  // namespace newsload
