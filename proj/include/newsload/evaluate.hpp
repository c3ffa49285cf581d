#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "newsload/common.hpp"

namespace newsload {

struct DailyScore {
  Date date{};
  double rmse = 0.0;
  double mae = 0.0;
  double smape = 0.0;  // percent, in [0, 200]
};

/// RMSE, MAE and SMAPE over one horizon. SMAPE uses |y + yhat| / 2 as the
/// denominator; a zero denominator throws naming the (1-based) slot.
DailyScore day_metrics(std::span<const double> actual, std::span<const double> forecast);

struct PeriodScore {
  double rmse = 0.0;
  double mae = 0.0;
  double smape = 0.0;
  std::size_t days = 0;
};

PeriodScore period_metrics(std::span<const DailyScore> days);

/// Per-row scores of a forecast matrix against the truth.
std::vector<DailyScore> score_days(std::span<const Date> dates, const Eigen::MatrixXd& actual,
                                   const Eigen::MatrixXd& forecast);

/// Daily mean squared error per row, the loss used for DM comparisons.
std::vector<double> daily_squared_loss(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast);

struct DmOptions {
  bool one_sided = true;
  /// Harvey-Leybourne-Newbold small-sample correction.
  bool small_sample = false;
};

struct ComparisonReport {
  std::string model_a;
  std::string model_b;
  double statistic = 0.0;
  /// One-sided: H1 "A has lower expected loss than B". Two-sided otherwise.
  double p_value = 1.0;
  std::size_t lags = 0;
};

/// Diebold-Mariano test on d = lossA - lossB with a Bartlett-window
/// (Newey-West) long-run variance truncated at ceil(n^(1/3)) lags.
ComparisonReport dm_test(std::span<const double> loss_a, std::span<const double> loss_b,
                         const DmOptions& options = {});

struct ErrorRow {
  std::string key;
  double rmse = 0.0;
  double mae = 0.0;
  double smape = 0.0;
  std::size_t days = 0;
};

struct ErrorDecomposition {
  std::vector<ErrorRow> hourly;   // 24 rows, "00".."23"
  std::vector<ErrorRow> daytype;  // "weekday", "weekend"
};

/// Hourly rows score the two half-hours of each hour per day and average
/// over days; day-type rows average daily scores within each type.
ErrorDecomposition error_decomposition(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast,
                                       std::span<const bool> is_weekend);

}  // namespace newsload
