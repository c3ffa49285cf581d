#include "newsload/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "newsload/csv.hpp"
#include "newsload/parallel.hpp"
#include "newsload/random.hpp"
#include "newsload/stats.hpp"

namespace newsload {

Season season_of(Date date) {
  switch (month_of(date)) {
    case 3: case 4: case 5: return Season::spring;
    case 6: case 7: case 8: return Season::summer;
    case 9: case 10: case 11: return Season::autumn;
    default: return Season::winter;
  }
}

std::string_view season_name(Season s) {
  switch (s) {
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::autumn: return "autumn";
    case Season::winter: return "winter";
  }
  return "?";
}

std::vector<PearsonCell> pearson_grid(const std::string& feature, const FeatureTable& table,
                                      const AlignedDataset& data, std::size_t min_days, double alpha) {
  if (!table.has_column(feature)) throw Error("unknown feature for Pearson grid: " + feature);
  auto values = table.column(feature);
  // [season][weekend][hour] -> (feature, demand) pairs
  std::vector<double> xs[4][2][24], ys[4][2][24];
  for (const AlignedDay& target : data.days) {
    auto row = table.row_of(target.date - std::chrono::days{2});
    if (!row || !std::isfinite(values[*row])) continue;
    const auto s = static_cast<std::size_t>(season_of(target.date));
    const std::size_t w = target.calendar.is_weekend ? 1 : 0;
    for (int h = 0; h < 24; ++h) {
      xs[s][w][h].push_back(values[*row]);
      ys[s][w][h].push_back((target.demand[2 * h] + target.demand[2 * h + 1]) / 2.0);
    }
  }
  std::vector<PearsonCell> cells;
  for (Season season : kSeasons)
    for (int w = 0; w < 2; ++w)
      for (int h = 0; h < 24; ++h) {
        const auto s = static_cast<std::size_t>(season);
        PearsonCell c;
        c.feature = feature;
        c.hour = h;
        c.season = season;
        c.weekend = w == 1;
        c.days = xs[s][w][h].size();
        c.r = std::numeric_limits<double>::quiet_NaN();
        if (c.days < std::max<std::size_t>(min_days, 3)) {
          c.insufficient = true;
        } else {
          c.r = stats::pearson(xs[s][w][h], ys[s][w][h]);
          if (std::isfinite(c.r)) {
            const double df = static_cast<double>(c.days) - 2.0;
            if (std::abs(c.r) >= 1.0) {
              c.p = 0.0;
            } else {
              c.p = stats::t_two_sided(c.r * std::sqrt(df / (1.0 - c.r * c.r)), df);
            }
            c.significant = c.p < alpha;
          }
        }
        cells.push_back(c);
      }
  return cells;
}

void write_pearson_csv(std::ostream& out, std::span<const PearsonCell> cells, std::string_view provenance) {
  if (!provenance.empty()) out << provenance << '\n';
  out << "feature,hour,season,daytype,days,r,p,significant\n";
  for (const auto& c : cells) {
    out << csv_field(c.feature) << ',' << c.hour << ',' << season_name(c.season) << ','
        << (c.weekend ? "weekend" : "weekday") << ',' << c.days << ','
        << (c.insufficient ? std::string("insufficient") : format_double(c.r)) << ','
        << format_double(c.p) << ',' << (c.significant ? 1 : 0) << '\n';
  }
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Diverging blue-white-red ramp over r in [-1, 1].
std::string ramp(double r) {
  r = std::clamp(r, -1.0, 1.0);
  int red, green, blue;
  if (r >= 0) {
    red = 255;
    green = blue = static_cast<int>(std::lround(255 * (1.0 - r)));
  } else {
    blue = 255;
    red = green = static_cast<int>(std::lround(255 * (1.0 + r)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, blue);
  return buf;
}

}  // namespace

void write_pearson_svg(std::ostream& out, std::span<const PearsonCell> cells, const std::string& feature) {
  constexpr int cell = 20, left = 130, top = 40;
  const int width = left + 24 * cell + 10, height = top + 8 * cell + 30;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<text x=\"" << left << "\" y=\"20\" font-size=\"12\">" << xml_escape(feature) << "</text>\n";
  for (int h = 0; h < 24; h += 3)
    out << "<text x=\"" << left + h * cell + 4 << "\" y=\"" << top + 8 * cell + 14 << "\">" << h
        << "</text>\n";
  for (const auto& c : cells) {
    if (c.feature != feature) continue;
    const int row = static_cast<int>(c.season) * 2 + (c.weekend ? 1 : 0);
    const int x = left + c.hour * cell, y = top + row * cell;
    const std::string fill = c.significant ? ramp(c.r) : "#dddddd";
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"" << fill << "\" stroke=\"#ffffff\"><title>r=" << (c.insufficient ? "n/a" : format_double(c.r))
        << " p=" << format_double(c.p) << "</title></rect>\n";
  }
  for (int row = 0; row < 8; ++row)
    out << "<text x=\"4\" y=\"" << top + row * cell + 14 << "\">" << season_name(kSeasons[row / 2]) << ' '
        << (row % 2 ? "weekend" : "weekday") << "</text>\n";
  out << "</svg>\n";
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw Error("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    s.scale(c) = std::sqrt((X.col(c).array() - s.mean(c)).square().mean());
  return s;
}

SurrogateFit weighted_surrogate(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, double ridge) {
  const Eigen::Index n = Z.rows(), p = Z.cols();
  if (y.size() != n || w.size() != n) throw Error("surrogate inputs differ in length");
  if (n == 0) throw Error("surrogate needs at least one sample");
  const double wsum = w.sum();
  if (!(wsum > 0)) throw Error("surrogate weights sum to zero");
  Eigen::MatrixXd D(n, p + 1);
  D.col(0).setOnes();
  D.rightCols(p) = Z;
  const Eigen::MatrixXd DtW = D.transpose() * w.asDiagonal();
  const Eigen::MatrixXd gram = DtW * D;
  const Eigen::VectorXd rhs = DtW * y;

  SurrogateFit fit;
  fit.ridge = ridge;
  Eigen::VectorXd beta;
  Eigen::MatrixXd A;
  for (int attempt = 0;; ++attempt) {
    A = gram;
    for (Eigen::Index j = 1; j <= p; ++j) A(j, j) += fit.ridge * wsum;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() == A.cols()) {
      beta = qr.solve(rhs);
      if (beta.allFinite()) break;
    }
    if (attempt > 30) throw Error("surrogate system stays singular after ridge damping");
    fit.ridge = fit.ridge > 0 ? fit.ridge * 10.0 : 1e-8;
    fit.ridge_increased = true;
  }
  fit.intercept = beta(0);
  fit.coefficients = beta.tail(p);
  const Eigen::VectorXd resid = y - D * beta;
  const double sse = (w.array() * resid.array().square()).sum();
  const double ybar = w.dot(y) / wsum;
  const double sst = (w.array() * (y.array() - ybar).square()).sum();
  fit.r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
  const double dof = static_cast<double>(n - p - 1);
  fit.std_errors = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (dof > 0) {
    const Eigen::MatrixXd cov = (sse / dof) * A.inverse();
    for (Eigen::Index j = 0; j < p; ++j) fit.std_errors(j) = std::sqrt(std::max(cov(j + 1, j + 1), 0.0));
  }
  return fit;
}

LimeReport lime_explain(const ScalarModel& model, std::span<const double> instance,
                        const Standardizer& standardizer, std::span<const std::string> names,
                        const LimeOptions& options) {
  const std::size_t p = instance.size();
  if (p == 0) throw Error("LIME needs at least one feature");
  if (static_cast<std::size_t>(standardizer.mean.size()) != p || names.size() != p)
    throw Error("LIME instance, names and standardizer differ in feature count");
  if (options.samples < 2) throw Error("LIME needs at least 2 samples");
  const double width = options.kernel_width > 0 ? options.kernel_width
                                                : 0.75 * std::sqrt(static_cast<double>(p));
  const auto n = static_cast<Eigen::Index>(options.samples);

  Rng rng(derive_seed(options.seed, 0x11E));
  Eigen::MatrixXd noise(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) noise(i, static_cast<Eigen::Index>(j)) = standard_normal(rng);

  Eigen::VectorXd y(n), w(n);
  parallel_for(options.samples, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      const double sd = standardizer.scale(c);
      x[j] = sd > 0 ? instance[j] + noise(r, c) * sd : instance[j];
    }
    y(r) = model(x);
    w(r) = std::exp(-noise.row(r).squaredNorm() / (width * width));
  });

  SurrogateFit fit = weighted_surrogate(noise, y, w, options.ridge);
  LimeReport rep;
  rep.features.assign(names.begin(), names.end());
  rep.intercept = fit.intercept;
  rep.r2 = fit.r2;
  rep.samples = options.samples;
  rep.kernel_width = width;
  rep.ridge = fit.ridge;
  rep.ridge_increased = fit.ridge_increased;
  for (std::size_t j = 0; j < p; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    rep.coefficients.push_back(fit.coefficients(c));
    rep.std_errors.push_back(fit.std_errors(c));
    const double sd = standardizer.scale(c);
    rep.raw_coefficients.push_back(sd > 0 ? fit.coefficients(c) / sd : 0.0);
  }
  return rep;
}

LimeReport lime_explain(const ExtraTreesModel& model, std::span<const double> instance,
                        const Standardizer& standardizer, const LimeOptions& options) {
  if (options.slot >= static_cast<int>(model.n_outputs()))
    throw Error("LIME slot " + std::to_string(options.slot) + " outside the model outputs");
  ScalarModel f = [&](std::span<const double> row) {
    Eigen::VectorXd out = model.predict(row);
    return options.slot >= 0 ? out(options.slot) : out.mean();
  };
  return lime_explain(f, instance, standardizer, model.feature_names(), options);
}

DmlResult double_ml(const Eigen::MatrixXd& X, const Eigen::VectorXd& T, const Eigen::VectorXd& Y,
                    const DmlConfig& config) {
  const Eigen::Index n = X.rows();
  if (T.size() != n || Y.size() != n) throw Error("Double ML inputs differ in length");
  if (X.cols() < 1) throw Error("Double ML needs at least one confounder");
  const int folds = config.cross_fit ? config.folds : 1;
  if (config.cross_fit && folds < 2) throw Error("cross-fitting needs at least 2 folds");
  if (n < 2 * std::max(folds, 1) * config.min_samples_split)
    throw Error("Double ML needs more rows (" + std::to_string(n) + ")");
  const double t_mean = T.mean();
  const double t_ss = (T.array() - t_mean).square().sum();
  if (!(t_ss > 0)) throw Error("treatment has zero variance");

  DmlResult res;
  res.rows = static_cast<std::size_t>(n);
  res.fold_of_row.assign(res.rows, 0);
  if (config.cross_fit) {
    std::vector<std::size_t> perm(res.rows);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(config.seed, 0xD31));
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    for (std::size_t i = 0; i < perm.size(); ++i)
      res.fold_of_row[perm[i]] = static_cast<int>(i * static_cast<std::size_t>(folds) / perm.size());
  }

  const int k = config.max_features > 0 ? static_cast<int>(std::min<Eigen::Index>(config.max_features, X.cols()))
                                        : static_cast<int>(X.cols());
  Eigen::VectorXd y_hat(n), t_hat(n);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, apply;
    for (std::size_t i = 0; i < res.rows; ++i) {
      const bool in_fold = res.fold_of_row[i] == f;
      if (!config.cross_fit || !in_fold) train.push_back(i);
      if (in_fold) apply.push_back(i);
    }
    Eigen::MatrixXd Xt(static_cast<Eigen::Index>(train.size()), X.cols());
    Eigen::MatrixXd Yt(Xt.rows(), 1), Tt(Xt.rows(), 1);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i), s = static_cast<Eigen::Index>(train[i]);
      Xt.row(r) = X.row(s);
      Yt(r, 0) = Y(s);
      Tt(r, 0) = T(s);
    }
    ExtraTreesConfig g_cfg{config.trees, k, config.min_samples_split,
                           derive_seed(config.seed, 2 * static_cast<std::uint64_t>(f) + 1)};
    ExtraTreesConfig h_cfg = g_cfg;
    h_cfg.seed = derive_seed(config.seed, 2 * static_cast<std::uint64_t>(f) + 2);
    auto g = fit_extratrees(Xt, Yt, g_cfg);
    auto h = fit_extratrees(Xt, Tt, h_cfg);
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (std::size_t i : apply) {
      const auto r = static_cast<Eigen::Index>(i);
      for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
      y_hat(r) = g.predict(row)(0);
      t_hat(r) = h.predict(row)(0);
    }
    res.nuisance_train_rows.push_back(std::move(train));
  }

  res.outcome_residuals = Y - y_hat;
  res.treatment_residuals = T - t_hat;
  const Eigen::VectorXd& u = res.outcome_residuals;
  const Eigen::VectorXd& v = res.treatment_residuals;
  const double vv = v.squaredNorm();
  if (!(vv > 1e-10 * t_ss)) throw Error("treatment explained by confounders");
  res.tau = v.dot(u) / vv;
  const Eigen::VectorXd e = u - res.tau * v;
  const double meat = (v.array().square() * e.array().square()).sum();
  res.std_error = std::sqrt(meat) / vv;
  if (res.std_error > 0) {
    res.p = 2.0 * stats::normal_cdf(-std::abs(res.tau / res.std_error));
  } else {
    res.p = res.tau == 0.0 ? 1.0 : 0.0;
  }
  return res;
}

EffectReport effect_profile(const std::string& feature, const Eigen::MatrixXd& X, const Eigen::VectorXd& T,
                            const Eigen::MatrixXd& Y, const DmlConfig& config, double alpha) {
  if (Y.cols() != static_cast<Eigen::Index>(kSlots)) throw Error("effect profile needs 48 outcome columns");
  EffectReport rep;
  rep.feature = feature;
  for (int s = 0; s < static_cast<int>(kSlots); ++s) {
    EffectEntry e;
    e.slot = s;
    try {
      DmlConfig cfg = config;
      cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(s));
      DmlResult r = double_ml(X, T, Y.col(s), cfg);
      e.tau = r.tau;
      e.p = r.p;
      e.retained = r.p < alpha;
      e.plotted = e.retained ? r.tau : 0.0;
    } catch (const Error& err) {
      e.error = err.what();
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

void write_effects_csv(std::ostream& out, std::span<const EffectReport> reports, std::string_view provenance) {
  if (!provenance.empty()) out << provenance << '\n';
  out << "feature,halfhour,tau,p,retained,plotted_tau,error\n";
  for (const auto& rep : reports)
    for (const auto& e : rep.entries)
      out << csv_field(rep.feature) << ',' << e.slot + 1 << ',' << format_double(e.tau) << ','
          << format_double(e.p) << ',' << (e.retained ? 1 : 0) << ',' << format_double(e.plotted) << ','
          << csv_field(e.error) << '\n';
}

}  // namespace newsload
