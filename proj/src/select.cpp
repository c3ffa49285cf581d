#include "newsload/select.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "newsload/parallel.hpp"
#include "newsload/stats.hpp"

namespace newsload {

void GrangerConfig::validate() const {
  if (lags < 1) throw Error("Granger lag order must be >= 1");
  if (!(alpha > 0 && alpha < 1)) throw Error("Granger significance level must be in (0, 1)");
}

namespace {

std::vector<double> difference_and_standardize(std::span<const double> series, const char* which) {
  std::vector<double> d(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) d[i - 1] = series[i] - series[i - 1];
  double m = stats::mean(d);
  double sd = stats::population_std(d);
  if (!(sd > 0))
    throw GrangerError("zero_variance",
                       std::string(which) + " series has zero variance after differencing");
  for (double& v : d) v = (v - m) / sd;
  return d;
}

double residual_ss(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < A.cols())
    throw GrangerError("collinear", "regressors are collinear (rank " + std::to_string(qr.rank()) +
                                        " < " + std::to_string(A.cols()) + ")");
  Eigen::VectorXd coef = qr.solve(b);
  return (b - A * coef).squaredNorm();
}

}  // namespace

double granger_p(std::span<const double> x, std::span<const double> y, int lags) {
  if (lags < 1) throw Error("Granger lag order must be >= 1");
  if (x.size() != y.size()) throw Error("Granger series must have equal length");
  const std::size_t T = static_cast<std::size_t>(lags);
  if (x.size() <= 2 * T + 10)
    throw GrangerError("too_short", "series of length " + std::to_string(x.size()) +
                                        " too short for " + std::to_string(lags) + " lags");
  auto dx = difference_and_standardize(x, "cause");
  auto dy = difference_and_standardize(y, "effect");
  const std::size_t m = dy.size();
  const std::size_t rows = m - T;

  Eigen::MatrixXd full(rows, 1 + 2 * T);
  Eigen::VectorXd target(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + T;
    target(r) = dy[t];
    full(r, 0) = 1.0;
    for (std::size_t i = 1; i <= T; ++i) {
      full(r, i) = dy[t - i];
      full(r, T + i) = dx[t - i];
    }
  }
  const double rss_r = residual_ss(full.leftCols(1 + T), target);
  const double rss_u = residual_ss(full, target);
  const double df1 = static_cast<double>(T);
  const double df2 = static_cast<double>(rows) - 2.0 * static_cast<double>(T) - 1.0;
  if (!(rss_u > 0)) return 0.0;
  const double f = ((rss_r - rss_u) / df1) / (rss_u / df2);
  return stats::f_survival(f, df1, df2);
}

GrangerSelection bilateral_select(std::span<const NamedSeries> features,
                                  std::span<const double> target, const GrangerConfig& config) {
  config.validate();
  std::vector<GrangerOutcome> outcomes(features.size());
  parallel_for(features.size(), [&](std::size_t i) {
    GrangerOutcome& o = outcomes[i];
    o.feature = features[i].name;
    try {
      if (features[i].values.size() != target.size())
        throw GrangerError("length_mismatch", "feature and target lengths differ");
      o.p_xy = granger_p(features[i].values, target, config.lags);
      o.p_yx = granger_p(target, features[i].values, config.lags);
      o.selected = o.p_xy < config.alpha && o.p_yx >= config.alpha;
      if (!o.selected) o.reason = o.p_xy >= config.alpha ? "no_forward_effect" : "reverse_effect";
    } catch (const GrangerError& e) {
      o.selected = false;
      o.p_xy = o.p_yx = 1.0;
      o.reason = e.reason();
    }
  });
  GrangerSelection out;
  for (auto& o : outcomes)
    if (o.selected) out.selected.push_back(o.feature);
  out.outcomes = std::move(outcomes);
  return out;
}

}  // namespace newsload
