#pragma once

#include <span>
#include <string>
#include <vector>

#include "newsload/common.hpp"

namespace newsload {

struct GrangerConfig {
  int lags = 30;
  double alpha = 0.05;

  void validate() const;
};

/// Why a Granger test could not be run on a feature.
class GrangerError : public Error {
 public:
  GrangerError(std::string reason, const std::string& message)
      : Error(message), reason_(std::move(reason)) {}
  /// Short machine-readable code: "too_short", "zero_variance" or "collinear".
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// p-value of the F test that lags 1..`lags` of x add nothing to an
/// autoregression of y on its own lags (with intercept). Both series are
/// first-differenced and standardized before fitting.
double granger_p(std::span<const double> x, std::span<const double> y, int lags);

struct GrangerOutcome {
  std::string feature;
  double p_xy = 1.0;  // feature -> target
  double p_yx = 1.0;  // target -> feature
  bool selected = false;
  std::string reason;
};

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct GrangerSelection {
  std::vector<std::string> selected;
  std::vector<GrangerOutcome> outcomes;
};

/// Keeps features with p_xy < alpha and p_yx >= alpha. Features whose tests
/// fail are reported unselected with the failure reason.
GrangerSelection bilateral_select(std::span<const NamedSeries> features,
                                  std::span<const double> target, const GrangerConfig& config);

}  // namespace newsload
