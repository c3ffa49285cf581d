#pragma once

#include <span>

namespace newsload::stats {

double mean(std::span<const double> x);
/// Population standard deviation (divides by n).
double population_std(std::span<const double> x);
/// Sample standard deviation (divides by n - 1).
double sample_std(std::span<const double> x);

double normal_cdf(double z);
/// Upper tail P(F > f) of the F distribution.
double f_survival(double f, double df1, double df2);
/// Two-sided p-value of a Student-t statistic.
double t_two_sided(double t, double df);
double t_cdf(double t, double df);

/// Pearson correlation; NaN when either series has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace newsload::stats
