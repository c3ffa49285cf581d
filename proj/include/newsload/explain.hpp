#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "newsload/features.hpp"
#include "newsload/forecast.hpp"
#include "newsload/ingest.hpp"

namespace newsload {

enum class Season { spring, summer, autumn, winter };
inline constexpr std::array<Season, 4> kSeasons = {Season::spring, Season::summer, Season::autumn,
                                                  Season::winter};
/// Meteorological seasons: Mar-May spring, Jun-Aug summer, Sep-Nov autumn.
Season season_of(Date date);
std::string_view season_name(Season s);

struct PearsonCell {
  std::string feature;
  int hour = 0;  // 0..23
  Season season = Season::winter;
  bool weekend = false;
  std::size_t days = 0;
  bool insufficient = false;
  double r = 0.0;  // NaN when insufficient or a series is constant
  double p = 1.0;
  bool significant = false;
};

/// For each (hour, season, day type) of the target day d+1 with at least
/// `min_days` days, correlates the feature at d-1 with the hourly mean demand
/// at d+1. Cells with too few days are kept and marked insufficient.
std::vector<PearsonCell> pearson_grid(const std::string& feature, const FeatureTable& table,
                                      const AlignedDataset& data, std::size_t min_days = 10,
                                      double alpha = 0.05);

void write_pearson_csv(std::ostream& out, std::span<const PearsonCell> cells,
                       std::string_view provenance = {});
/// Heatmap of one feature: rows are season x day type, columns hours;
/// non-significant cells are grey.
void write_pearson_svg(std::ostream& out, std::span<const PearsonCell> cells, const std::string& feature);

struct LimeOptions {
  std::size_t samples = 5000;
  /// <= 0 means 0.75 * sqrt(feature count).
  double kernel_width = 0.0;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  /// Explain one half-hour (0-based) instead of the daily mean.
  int slot = -1;
};

struct LimeReport {
  std::string label;
  std::vector<std::string> features;
  /// Per standardized unit, and per raw unit (0 for constant features).
  std::vector<double> coefficients;
  std::vector<double> raw_coefficients;
  std::vector<double> std_errors;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
  double kernel_width = 0.0;
  double ridge = 0.0;
  bool ridge_increased = false;
};

/// Feature means and population standard deviations of the training rows.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  static Standardizer fit(const Eigen::MatrixXd& X);
};

struct SurrogateFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  double r2 = 0.0;
  double ridge = 0.0;
  bool ridge_increased = false;
};

/// Weighted least squares y ~ 1 + Z with an unpenalized intercept and ridge
/// lambda * sum(w) on the slopes; lambda grows until the system is solvable.
SurrogateFit weighted_surrogate(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, double ridge = 0.0);

/// Any scalar-valued black box over raw feature rows.
using ScalarModel = std::function<double(std::span<const double>)>;

LimeReport lime_explain(const ScalarModel& model, std::span<const double> instance,
                        const Standardizer& standardizer, std::span<const std::string> names,
                        const LimeOptions& options = {});

/// Convenience overload explaining an ExtraTrees model's daily-mean (or
/// single-slot) prediction.
LimeReport lime_explain(const ExtraTreesModel& model, std::span<const double> instance,
                        const Standardizer& standardizer, const LimeOptions& options = {});

struct DmlConfig {
  bool cross_fit = true;
  int folds = 2;
  int trees = 100;
  /// 0 means all confounders.
  int max_features = 0;
  /// Coarser leaves keep the treatment nuisance from fitting noise, which otherwise inflates false positives.
  int min_samples_split = 10;
  std::uint64_t seed = 0;
};

struct DmlResult {
  double tau = 0.0;
  double std_error = 0.0;
  double p = 1.0;
  std::size_t rows = 0;
  /// Fold of each row (all 0 without cross-fitting) and, per fold, the rows
  /// its nuisance models were trained on.
  std::vector<int> fold_of_row;
  std::vector<std::vector<std::size_t>> nuisance_train_rows;
  Eigen::VectorXd outcome_residuals;
  Eigen::VectorXd treatment_residuals;
};

/// Partially linear model Y = tau*T + g(X) + e with ExtraTrees nuisances.
/// tau is the no-intercept least-squares slope of the pooled outcome
/// residuals on the treatment residuals; p is two-sided with an HC0 error.
DmlResult double_ml(const Eigen::MatrixXd& X, const Eigen::VectorXd& T, const Eigen::VectorXd& Y,
                    const DmlConfig& config = {});

struct EffectEntry {
  int slot = 0;
  double tau = 0.0;
  double p = 1.0;
  bool retained = false;
  /// tau when retained, else 0.
  double plotted = 0.0;
  std::string error;
};

struct EffectReport {
  std::string feature;
  std::vector<EffectEntry> entries;  // 48
};

/// Double ML per half-hour of Y (rows x 48). Per-slot failures are recorded
/// in the entry rather than aborting the profile.
EffectReport effect_profile(const std::string& feature, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& T, const Eigen::MatrixXd& Y,
                            const DmlConfig& config = {}, double alpha = 0.05);

void write_effects_csv(std::ostream& out, std::span<const EffectReport> reports,
                       std::string_view provenance = {});

}  // namespace newsload
