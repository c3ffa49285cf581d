#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "newsload/evaluate.hpp"
#include "newsload/random.hpp"
#include "test_util.hpp"

using namespace newsload;

namespace {

// Direct transcription of the three formulas, kept separate from the library.
struct Brute {
  double rmse, mae, smape;
};

Brute brute_metrics(const std::vector<double>& y, const std::vector<double>& f) {
  const double H = static_cast<double>(y.size());
  double se = 0, ae = 0, sp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    se += (y[i] - f[i]) * (y[i] - f[i]);
    ae += std::fabs(y[i] - f[i]);
    sp += std::fabs(y[i] - f[i]) / (std::fabs(y[i] + f[i]) / 2.0);
  }
  return {std::sqrt(se / H), ae / H, 100.0 / H * sp};
}

std::vector<double> normals(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * standard_normal(rng);
  return v;
}

}  // namespace

TEST(DayMetrics, IdenticalIsZero) {
  std::vector<double> y = {5, 6, 7};
  auto s = day_metrics(y, y);
  EXPECT_EQ(s.rmse, 0.0);
  EXPECT_EQ(s.mae, 0.0);
  EXPECT_EQ(s.smape, 0.0);
}

TEST(DayMetrics, HandComputedTwoSlotExample) {
  std::vector<double> y = {100, 300}, f = {110, 290};
  auto s = day_metrics(y, f);
  EXPECT_DOUBLE_EQ(s.rmse, 10.0);
  EXPECT_DOUBLE_EQ(s.mae, 10.0);
  EXPECT_NEAR(s.smape, 50.0 * (10.0 / 105.0 + 10.0 / 295.0), 1e-12);
  EXPECT_NEAR(s.smape, 6.457, 5e-4);
}

TEST(DayMetrics, MatchesBruteForceAndJensen) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> y(48), f(48);
    for (int i = 0; i < 48; ++i) {
      y[i] = 20000 + 10000 * uniform01(rng);
      f[i] = y[i] + 2000 * standard_normal(rng);
    }
    auto s = day_metrics(y, f);
    auto b = brute_metrics(y, f);
    ASSERT_NEAR(s.rmse, b.rmse, 1e-9);
    ASSERT_NEAR(s.mae, b.mae, 1e-9);
    ASSERT_NEAR(s.smape, b.smape, 1e-9);
    EXPECT_GE(s.rmse, s.mae);
    EXPECT_LE(s.smape, 200.0);
  }
}

TEST(DayMetrics, ZeroDenominatorNamesSlot) {
  std::vector<double> y = {1, 2, 3}, f = {1, -2, 3};
  auto msg = testutil::error_of([&] { day_metrics(y, f); });
  EXPECT_NE(msg.find("slot 2"), std::string::npos) << msg;
  std::vector<double> shorter = {1, 2};
  EXPECT_THROW(day_metrics(y, shorter), Error);
}

TEST(PeriodMetrics, MeansAndPermutationInvariance) {
  std::vector<DailyScore> days = {{{}, 1, 2, 3}, {{}, 3, 4, 5}, {{}, 8, 0, 1}};
  auto p = period_metrics(days);
  EXPECT_DOUBLE_EQ(p.rmse, 4.0);
  EXPECT_DOUBLE_EQ(p.mae, 2.0);
  EXPECT_DOUBLE_EQ(p.smape, 3.0);
  EXPECT_EQ(p.days, 3u);
  std::vector<DailyScore> one(days.begin(), days.begin() + 1);
  auto q = period_metrics(one);
  EXPECT_EQ(q.rmse, 1.0);
  EXPECT_EQ(q.smape, 3.0);
  Rng rng(2);
  std::vector<DailyScore> many(50);
  for (auto& d : many) d = {{}, uniform01(rng), uniform01(rng), uniform01(rng)};
  auto base = period_metrics(many);
  std::shuffle(many.begin(), many.end(), rng);
  auto shuffled = period_metrics(many);
  EXPECT_NEAR(base.rmse, shuffled.rmse, 1e-12);
  EXPECT_NEAR(base.smape, shuffled.smape, 1e-12);
}

TEST(ScoreDays, RowsMatchDayMetrics) {
  Rng rng(4);
  Eigen::MatrixXd a(3, 48), f(3, 48);
  for (int i = 0; i < 3; ++i)
    for (int h = 0; h < 48; ++h) {
      a(i, h) = 100 + uniform01(rng);
      f(i, h) = 100 + uniform01(rng);
    }
  std::vector<Date> dates = {parse_date("2020-01-01"), parse_date("2020-01-02"), parse_date("2020-01-03")};
  auto scores = score_days(dates, a, f);
  auto loss = daily_squared_loss(a, f);
  for (int i = 0; i < 3; ++i) {
    Eigen::RowVectorXd ar = a.row(i), fr = f.row(i);
    auto s = day_metrics(std::span<const double>(ar.data(), 48), std::span<const double>(fr.data(), 48));
    EXPECT_EQ(scores[i].rmse, s.rmse);
    EXPECT_EQ(scores[i].date, dates[i]);
    EXPECT_NEAR(loss[i], s.rmse * s.rmse, 1e-9);
  }
}

TEST(DieboldMariano, AntisymmetricOneSided) {
  Rng rng(5);
  auto a = normals(100, rng), b = normals(100, rng);
  for (auto& v : a) v = v * v;
  for (auto& v : b) v = v * v * 1.1;
  auto ab = dm_test(a, b), ba = dm_test(b, a);
  EXPECT_NEAR(ab.p_value, 1.0 - ba.p_value, 1e-12);
  EXPECT_NEAR(ab.statistic, -ba.statistic, 1e-12);
  EXPECT_EQ(ab.lags, 5u);  // ceil(100^(1/3))
  auto two = dm_test(a, b, {false, false});
  EXPECT_NEAR(two.p_value, 2.0 * std::min(ab.p_value, ba.p_value), 1e-12);
  auto hln = dm_test(a, b, {true, true});
  EXPECT_GE(hln.p_value, 0.0);
  EXPECT_LE(hln.p_value, 1.0);
}

TEST(DieboldMariano, DegenerateAndShortInputs) {
  std::vector<double> a(20, 1.5);
  auto msg = testutil::error_of([&] { dm_test(a, a); });
  EXPECT_NE(msg.find("degenerate"), std::string::npos) << msg;
  std::vector<double> b(9, 1.0), c(9, 2.0);
  EXPECT_THROW(dm_test(b, c), Error);
  EXPECT_THROW(dm_test(a, std::vector<double>(19, 1.0)), Error);
}

TEST(DieboldMariano, DetectsPlantedInferiority) {
  int detected = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int n = 200;
    Eigen::MatrixXd truth(n, 48), fa(n, 48), fb(n, 48);
    for (int i = 0; i < n; ++i)
      for (int h = 0; h < 48; ++h) {
        truth(i, h) = 30000 + 500 * standard_normal(rng);
        fa(i, h) = truth(i, h) + 300 * standard_normal(rng);
        fb(i, h) = fa(i, h) + 300 * standard_normal(rng);
      }
    auto la = daily_squared_loss(truth, fa), lb = daily_squared_loss(truth, fb);
    if (dm_test(la, lb).p_value < 0.05) ++detected;
  }
  EXPECT_GE(detected, 45);
}

TEST(DieboldMariano, NullPValuesRoughlyUniform) {
  std::vector<double> ps;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(1000 + seed);
    std::vector<double> a(250), b(250);
    for (int i = 0; i < 250; ++i) {
      double za = standard_normal(rng), zb = standard_normal(rng);
      a[i] = za * za;
      b[i] = zb * zb;
    }
    ps.push_back(dm_test(a, b).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double n = static_cast<double>(ps.size());
    ks = std::max({ks, std::fabs(ps[i] - i / n), std::fabs(ps[i] - (i + 1) / n)});
  }
  EXPECT_LT(ks, 0.1);
}

TEST(ErrorDecomposition, IdenticalForecastsAreZero) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(4, 48, 500.0);
  bool w[4] = {false, true, false, false};
  auto dec = error_decomposition(a, a, std::span<const bool>(w, 4));
  ASSERT_EQ(dec.hourly.size(), 24u);
  ASSERT_EQ(dec.daytype.size(), 2u);
  for (const auto& r : dec.hourly) {
    EXPECT_EQ(r.rmse, 0.0);
    EXPECT_EQ(r.mae, 0.0);
    EXPECT_EQ(r.smape, 0.0);
  }
  EXPECT_EQ(dec.hourly[0].key, "00");
  EXPECT_EQ(dec.hourly[23].key, "23");
  EXPECT_EQ(dec.daytype[0].key, "weekday");
  EXPECT_EQ(dec.daytype[0].days + dec.daytype[1].days, 4u);
  EXPECT_EQ(dec.daytype[1].days, 1u);
}

TEST(ErrorDecomposition, SingleDayHourTableMatchesPerHourErrors) {
  Rng rng(6);
  Eigen::MatrixXd a(1, 48), f(1, 48);
  for (int h = 0; h < 48; ++h) {
    a(0, h) = 1000 + 100 * uniform01(rng);
    f(0, h) = 1000 + 100 * uniform01(rng);
  }
  bool w[1] = {true};
  auto dec = error_decomposition(a, f, std::span<const bool>(w, 1));
  for (int hour = 0; hour < 24; ++hour) {
    std::vector<double> y = {a(0, 2 * hour), a(0, 2 * hour + 1)};
    std::vector<double> g = {f(0, 2 * hour), f(0, 2 * hour + 1)};
    auto b = brute_metrics(y, g);
    EXPECT_NEAR(dec.hourly[hour].rmse, b.rmse, 1e-9);
    EXPECT_NEAR(dec.hourly[hour].mae, b.mae, 1e-9);
    EXPECT_NEAR(dec.hourly[hour].smape, b.smape, 1e-9);
  }
  EXPECT_EQ(dec.daytype[0].days, 0u);
  EXPECT_EQ(dec.daytype[1].days, 1u);
}
