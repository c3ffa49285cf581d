#include "newsload/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "newsload/stats.hpp"

namespace newsload {

DailyScore day_metrics(std::span<const double> actual, std::span<const double> forecast) {
  if (actual.size() != forecast.size()) throw Error("actual and forecast lengths differ");
  if (actual.empty()) throw Error("cannot score an empty horizon");
  const auto h = static_cast<double>(actual.size());
  double se = 0.0, ae = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double y = actual[i], f = forecast[i];
    if (!std::isfinite(y) || !std::isfinite(f))
      throw Error("non-finite value at slot " + std::to_string(i + 1));
    const double e = y - f;
    const double denom = std::abs(y + f) / 2.0;
    if (denom == 0.0) throw Error("SMAPE denominator is zero at slot " + std::to_string(i + 1));
    se += e * e;
    ae += std::abs(e);
    sp += std::abs(e) / denom;
  }
  DailyScore s;
  s.rmse = std::sqrt(se / h);
  s.mae = ae / h;
  s.smape = 100.0 / h * sp;
  return s;
}

PeriodScore period_metrics(std::span<const DailyScore> days) {
  if (days.empty()) throw Error("period metrics need at least one day");
  PeriodScore p;
  for (const auto& d : days) {
    p.rmse += d.rmse;
    p.mae += d.mae;
    p.smape += d.smape;
  }
  const auto n = static_cast<double>(days.size());
  p.rmse /= n;
  p.mae /= n;
  p.smape /= n;
  p.days = days.size();
  return p;
}

std::vector<DailyScore> score_days(std::span<const Date> dates, const Eigen::MatrixXd& actual,
                                   const Eigen::MatrixXd& forecast) {
  if (actual.rows() != forecast.rows() || actual.cols() != forecast.cols())
    throw Error("actual and forecast matrices differ in shape");
  if (static_cast<std::size_t>(actual.rows()) != dates.size())
    throw Error("score dates do not match forecast rows");
  std::vector<DailyScore> out;
  for (Eigen::Index r = 0; r < actual.rows(); ++r) {
    Eigen::VectorXd a = actual.row(r).transpose(), f = forecast.row(r).transpose();
    try {
      DailyScore s = day_metrics({a.data(), static_cast<std::size_t>(a.size())},
                                 {f.data(), static_cast<std::size_t>(f.size())});
      s.date = dates[static_cast<std::size_t>(r)];
      out.push_back(s);
    } catch (const Error& e) {
      throw Error(format_date(dates[static_cast<std::size_t>(r)]) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> daily_squared_loss(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast) {
  if (actual.rows() != forecast.rows() || actual.cols() != forecast.cols())
    throw Error("actual and forecast matrices differ in shape");
  std::vector<double> out;
  for (Eigen::Index r = 0; r < actual.rows(); ++r)
    out.push_back((actual.row(r) - forecast.row(r)).squaredNorm() / static_cast<double>(actual.cols()));
  return out;
}

ComparisonReport dm_test(std::span<const double> loss_a, std::span<const double> loss_b,
                         const DmOptions& options) {
  if (loss_a.size() != loss_b.size()) throw Error("DM test needs equal-length loss series");
  const std::size_t n = loss_a.size();
  if (n < 10) throw Error("DM test needs at least 10 observations, got " + std::to_string(n));
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = loss_a[i] - loss_b[i];
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; }))
    throw Error("DM test is degenerate: the loss differential has zero variance");

  const double mean = stats::mean(d);
  const auto lags = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-12));
  auto autocov = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t t = k; t < n; ++t) acc += (d[t] - mean) * (d[t - k] - mean);
    return acc / static_cast<double>(n);
  };
  double lrv = autocov(0);
  for (std::size_t k = 1; k <= lags && k < n; ++k)
    lrv += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(lags + 1)) * autocov(k);
  if (!(lrv > 0)) throw Error("DM test is degenerate: non-positive long-run variance");

  ComparisonReport r;
  r.lags = lags;
  const auto nd = static_cast<double>(n);
  r.statistic = mean / std::sqrt(lrv / nd);
  if (options.small_sample) {
    r.statistic *= std::sqrt((nd - 1.0) / nd);
    const double df = nd - 1.0;
    r.p_value = options.one_sided ? stats::t_cdf(r.statistic, df) : stats::t_two_sided(r.statistic, df);
  } else {
    r.p_value = options.one_sided ? stats::normal_cdf(r.statistic)
                                  : 2.0 * stats::normal_cdf(-std::abs(r.statistic));
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

ErrorDecomposition error_decomposition(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast,
                                       std::span<const bool> is_weekend) {
  if (actual.rows() != forecast.rows() || actual.cols() != forecast.cols())
    throw Error("actual and forecast matrices differ in shape");
  if (actual.cols() != static_cast<Eigen::Index>(kSlots)) throw Error("error decomposition needs 48 slots");
  if (static_cast<std::size_t>(actual.rows()) != is_weekend.size())
    throw Error("day-type flags do not match forecast rows");
  if (actual.rows() == 0) throw Error("error decomposition needs at least one day");
  ErrorDecomposition out;
  const auto n = static_cast<double>(actual.rows());
  for (int hour = 0; hour < 24; ++hour) {
    ErrorRow row;
    char key[4];
    std::snprintf(key, sizeof key, "%02d", hour);
    row.key = key;
    for (Eigen::Index r = 0; r < actual.rows(); ++r) {
      const double a[2] = {actual(r, 2 * hour), actual(r, 2 * hour + 1)};
      const double f[2] = {forecast(r, 2 * hour), forecast(r, 2 * hour + 1)};
      DailyScore s = day_metrics(a, f);
      row.rmse += s.rmse;
      row.mae += s.mae;
      row.smape += s.smape;
    }
    row.rmse /= n;
    row.mae /= n;
    row.smape /= n;
    row.days = static_cast<std::size_t>(actual.rows());
    out.hourly.push_back(row);
  }
  for (bool weekend : {false, true}) {
    std::vector<DailyScore> days;
    for (Eigen::Index r = 0; r < actual.rows(); ++r) {
      if (is_weekend[static_cast<std::size_t>(r)] != weekend) continue;
      Eigen::VectorXd a = actual.row(r).transpose(), f = forecast.row(r).transpose();
      days.push_back(day_metrics({a.data(), kSlots}, {f.data(), kSlots}));
    }
    ErrorRow row;
    row.key = weekend ? "weekend" : "weekday";
    if (!days.empty()) {
      PeriodScore p = period_metrics(days);
      row.rmse = p.rmse;
      row.mae = p.mae;
      row.smape = p.smape;
      row.days = p.days;
    }
    out.daytype.push_back(row);
  }
  return out;
}

}  // namespace newsload
