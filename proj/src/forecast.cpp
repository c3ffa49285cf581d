#include "newsload/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "newsload/csv.hpp"
#include "newsload/parallel.hpp"
#include "newsload/random.hpp"

namespace newsload {

std::string FeatureSetSpec::label() const {
  std::string out;
  auto add = [&](std::string_view part) {
    if (!out.empty()) out += '+';
    out += part;
  };
  if (demand) add("D");
  if (calendar) add("C");
  if (temperature) add("T");
  for (const auto& g : text_groups) add(g);
  return out;
}

void FeatureSetSpec::validate() const {
  if (!demand && !calendar && !temperature && text_groups.empty())
    throw Error("feature set is empty: enable D, C, T or a text group");
}

namespace {

DesignMatrix select_rows(const DesignMatrix& m, const std::vector<std::size_t>& idx) {
  DesignMatrix out;
  out.columns = m.columns;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), m.X.cols());
  out.Y.resize(static_cast<Eigen::Index>(idx.size()), m.Y.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(idx[r]);
    out.X.row(static_cast<Eigen::Index>(r)) = m.X.row(src);
    out.Y.row(static_cast<Eigen::Index>(r)) = m.Y.row(src);
    out.issue_days.push_back(m.issue_days[idx[r]]);
  }
  return out;
}

}  // namespace

DesignMatrix DesignMatrix::subset_by_target(Date first, Date last) const {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < issue_days.size(); ++r) {
    Date t = target_day(r);
    if (t >= first && t <= last) idx.push_back(r);
  }
  return select_rows(*this, idx);
}

DesignMatrix DesignMatrix::rows(std::span<const std::size_t> indices) const {
  return select_rows(*this, std::vector<std::size_t>(indices.begin(), indices.end()));
}

DesignMatrix build_design(const AlignedDataset& data, const FeatureTable& text,
                          const FeatureSetSpec& spec, std::span<const std::string> text_columns) {
  spec.validate();
  DesignMatrix m;
  if (spec.demand)
    for (int lag : kDemandLags)
      for (std::size_t h = 0; h < kSlots; ++h) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "D.lag%d.h%02zu", lag, h + 1);
        m.columns.emplace_back(buf);
      }
  if (spec.calendar)
    for (const char* c : {"C.dow_sin", "C.dow_cos", "C.doy_sin", "C.doy_cos", "C.weekend", "C.holiday"})
      m.columns.emplace_back(c);
  if (spec.temperature) m.columns.emplace_back("T.temp");
  std::vector<std::span<const double>> text_data;
  for (const auto& name : text_columns) {
    if (!text.has_column(name)) throw Error("text feature column not found: " + name);
    text_data.push_back(text.column(name));
    m.columns.push_back(name);
  }

  std::vector<std::vector<double>> xs;
  std::vector<std::array<double, kSlots>> ys;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const AlignedDay& day : data.days) {
    const Date d = day.date;
    const AlignedDay* target = data.find(d + std::chrono::days{1});
    if (!target) continue;
    std::vector<double> row;
    row.reserve(m.columns.size());
    bool ok = true;
    if (spec.demand)
      for (int lag : kDemandLags) {
        const AlignedDay* past = data.find(d - std::chrono::days{lag});
        if (!past) {
          ok = false;
          break;
        }
        row.insert(row.end(), past->demand.begin(), past->demand.end());
      }
    if (!ok) continue;
    if (spec.calendar) {
      const CalendarRecord& c = target->calendar;
      const double dow = two_pi * c.day_of_week / 7.0;
      const double doy = two_pi * (c.day_of_year - 1) / days_in_year(target->date);
      row.insert(row.end(), {std::sin(dow), std::cos(dow), std::sin(doy), std::cos(doy),
                             c.is_weekend ? 1.0 : 0.0, c.is_holiday ? 1.0 : 0.0});
    }
    if (spec.temperature) row.push_back(target->temperature);
    if (!text_data.empty()) {
      auto tr = text.row_of(d - std::chrono::days{1});
      if (!tr) continue;
      for (auto col : text_data) row.push_back(col[*tr]);
    }
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) continue;
    m.issue_days.push_back(d);
    xs.push_back(std::move(row));
    ys.push_back(target->demand);
  }
  if (xs.empty()) throw Error("design matrix is empty after lag trimming");
  const auto n = static_cast<Eigen::Index>(xs.size());
  m.X.resize(n, static_cast<Eigen::Index>(m.columns.size()));
  m.Y.resize(n, kSlots);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m.X.cols(); ++c) m.X(r, c) = xs[r][c];
    for (std::size_t h = 0; h < kSlots; ++h) m.Y(r, static_cast<Eigen::Index>(h)) = ys[r][h];
  }
  return m;
}

int ExtraTreesConfig::resolved_max_features(std::size_t n_features) const {
  if (max_features > 0) return max_features;
  int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_features))));
  return std::clamp(k, 1, static_cast<int>(std::max<std::size_t>(n_features, 1)));
}

void ExtraTreesConfig::validate(std::size_t n_features) const {
  if (trees < 1) throw Error("ExtraTrees needs at least one tree");
  if (min_samples_split < 2) throw Error("ExtraTrees min_samples_split must be >= 2");
  if (n_features == 0) throw Error("ExtraTrees needs at least one feature");
  int k = resolved_max_features(n_features);
  if (k < 1 || static_cast<std::size_t>(k) > n_features)
    throw Error("ExtraTrees max_features " + std::to_string(k) + " outside [1, " +
                std::to_string(n_features) + "]");
}

namespace {

// Mean shifted by the smallest value, clamped to [min, max]: exact for a
// constant input and independent of input order once sorted.
double stable_mean(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  if (lo == hi) return lo;
  double acc = 0.0;
  for (double x : v) acc += x - lo;
  return std::clamp(lo + acc / static_cast<double>(v.size()), lo, hi);
}

}  // namespace

void ExtraTreesModel::compute_leaf_values(Tree& tree) const {
  std::size_t leaves = 0;
  for (const Node& n : tree.nodes)
    if (n.feature < 0) ++leaves;
  tree.leaf_values.assign(leaves * n_outputs_, 0.0);
  std::vector<double> buf;
  for (const Node& n : tree.nodes) {
    if (n.feature >= 0) continue;
    double* out = &tree.leaf_values[static_cast<std::size_t>(n.left) * n_outputs_];
    for (std::size_t j = 0; j < n_outputs_; ++j) {
      buf.clear();
      for (std::uint32_t i = n.begin; i < n.end; ++i)
        buf.push_back(targets_[tree.rows[i] * n_outputs_ + j]);
      out[j] = stable_mean(buf);
    }
  }
}

const double* ExtraTreesModel::leaf_for(const Tree& tree, std::span<const double> row) const {
  std::int32_t i = 0;
  while (tree.nodes[i].feature >= 0) {
    const Node& n = tree.nodes[i];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return &tree.leaf_values[static_cast<std::size_t>(tree.nodes[i].left) * n_outputs_];
}

Eigen::VectorXd ExtraTreesModel::predict_tree(std::size_t tree, std::span<const double> row) const {
  if (row.size() != n_features_) throw Error("prediction row has wrong feature count");
  const double* leaf = leaf_for(trees_.at(tree), row);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_outputs_));
  for (std::size_t j = 0; j < n_outputs_; ++j) out(static_cast<Eigen::Index>(j)) = leaf[j];
  return out;
}

Eigen::VectorXd ExtraTreesModel::predict(std::span<const double> row) const {
  if (row.size() != n_features_)
    throw Error("prediction row has " + std::to_string(row.size()) + " features, model expects " +
                std::to_string(n_features_));
  std::vector<const double*> leaves;
  leaves.reserve(trees_.size());
  for (const Tree& t : trees_) leaves.push_back(leaf_for(t, row));
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_outputs_));
  std::vector<double> buf(leaves.size());
  for (std::size_t j = 0; j < n_outputs_; ++j) {
    for (std::size_t t = 0; t < leaves.size(); ++t) buf[t] = leaves[t][j];
    out(static_cast<Eigen::Index>(j)) = stable_mean(buf);
  }
  return out;
}

Eigen::MatrixXd ExtraTreesModel::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != n_features_)
    throw Error("prediction matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                std::to_string(n_features_));
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(n_outputs_));
  parallel_for(static_cast<std::size_t>(X.rows()), [&](std::size_t r) {
    std::vector<double> row(n_features_);
    for (std::size_t c = 0; c < n_features_; ++c)
      row[c] = X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    out.row(static_cast<Eigen::Index>(r)) = predict(row).transpose();
  });
  return out;
}

Eigen::VectorXd ExtraTreesModel::predict_named(std::span<const std::string> names,
                                               std::span<const double> values) const {
  if (names.size() != values.size()) throw Error("feature names and values differ in length");
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  std::vector<double> row(n_features_);
  for (std::size_t f = 0; f < n_features_; ++f) {
    auto it = index.find(feature_names_[f]);
    if (it == index.end()) throw Error("prediction row lacks model feature '" + feature_names_[f] + "'");
    row[f] = values[it->second];
  }
  return predict(row);
}

std::vector<std::vector<std::uint32_t>> ExtraTreesModel::leaf_rows(std::size_t tree) const {
  const Tree& t = trees_.at(tree);
  std::vector<std::vector<std::uint32_t>> out;
  for (const Node& n : t.nodes)
    if (n.feature < 0) out.emplace_back(t.rows.begin() + n.begin, t.rows.begin() + n.end);
  return out;
}

bool ExtraTreesModel::operator==(const ExtraTreesModel& o) const {
  if (!(config_ == o.config_) || n_features_ != o.n_features_ || n_outputs_ != o.n_outputs_ ||
      feature_names_ != o.feature_names_ || targets_ != o.targets_ || trees_.size() != o.trees_.size())
    return false;
  for (std::size_t t = 0; t < trees_.size(); ++t)
    if (trees_[t].nodes != o.trees_[t].nodes || trees_[t].rows != o.trees_[t].rows ||
        trees_[t].leaf_values != o.trees_[t].leaf_values)
      return false;
  return true;
}

namespace {

constexpr char kMagic[] = "newsload-extratrees 1\n";

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, std::string_view s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("model artifact is truncated");
  return v;
}

std::uint64_t get_count(std::istream& in, std::uint64_t limit) {
  auto n = get<std::uint64_t>(in);
  if (n > limit) throw Error("model artifact is corrupt (count " + std::to_string(n) + ")");
  return n;
}

std::string get_string(std::istream& in) {
  auto n = get_count(in, 1u << 24);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error("model artifact is truncated");
  return s;
}

}  // namespace

void ExtraTreesModel::save(std::ostream& out, std::string_view provenance) const {
  out.write(kMagic, sizeof kMagic - 1);
  put_string(out, provenance);
  put<std::int32_t>(out, config_.trees);
  put<std::int32_t>(out, config_.max_features);
  put<std::int32_t>(out, config_.min_samples_split);
  put<std::uint64_t>(out, config_.seed);
  put<std::uint64_t>(out, n_features_);
  put<std::uint64_t>(out, n_outputs_);
  for (const auto& name : feature_names_) put_string(out, name);
  put<std::uint64_t>(out, targets_.size());
  out.write(reinterpret_cast<const char*>(targets_.data()),
            static_cast<std::streamsize>(targets_.size() * sizeof(double)));
  put<std::uint64_t>(out, trees_.size());
  for (const Tree& t : trees_) {
    put<std::uint64_t>(out, t.nodes.size());
    for (const Node& n : t.nodes) {
      put(out, n.feature);
      put(out, n.threshold);
      put(out, n.left);
      put(out, n.right);
      put(out, n.begin);
      put(out, n.end);
    }
    put<std::uint64_t>(out, t.rows.size());
    out.write(reinterpret_cast<const char*>(t.rows.data()),
              static_cast<std::streamsize>(t.rows.size() * sizeof(std::uint32_t)));
  }
  if (!out) throw Error("failed to write model artifact");
}

ExtraTreesModel ExtraTreesModel::load(std::istream& in) {
  std::string magic(sizeof kMagic - 1, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw Error("not an ExtraTrees model artifact");
  ExtraTreesModel m;
  get_string(in);
  m.config_.trees = get<std::int32_t>(in);
  m.config_.max_features = get<std::int32_t>(in);
  m.config_.min_samples_split = get<std::int32_t>(in);
  m.config_.seed = get<std::uint64_t>(in);
  m.n_features_ = get_count(in, 1u << 24);
  m.n_outputs_ = get_count(in, 1u << 16);
  for (std::size_t i = 0; i < m.n_features_; ++i) m.feature_names_.push_back(get_string(in));
  m.targets_.resize(get_count(in, 1ull << 32));
  in.read(reinterpret_cast<char*>(m.targets_.data()),
          static_cast<std::streamsize>(m.targets_.size() * sizeof(double)));
  if (!in || m.n_outputs_ == 0 || m.targets_.size() % m.n_outputs_ != 0)
    throw Error("model artifact has malformed targets");
  const std::size_t n_rows = m.targets_.size() / m.n_outputs_;
  m.trees_.resize(get_count(in, 1u << 20));
  for (Tree& t : m.trees_) {
    t.nodes.resize(get_count(in, 1ull << 32));
    for (Node& n : t.nodes) {
      n.feature = get<std::int32_t>(in);
      n.threshold = get<double>(in);
      n.left = get<std::int32_t>(in);
      n.right = get<std::int32_t>(in);
      n.begin = get<std::uint32_t>(in);
      n.end = get<std::uint32_t>(in);
    }
    t.rows.resize(get_count(in, 1ull << 32));
    in.read(reinterpret_cast<char*>(t.rows.data()),
            static_cast<std::streamsize>(t.rows.size() * sizeof(std::uint32_t)));
    if (!in) throw Error("model artifact is truncated");
    for (std::uint32_t r : t.rows)
      if (r >= n_rows) throw Error("model artifact references an unknown training row");
    for (const Node& n : t.nodes) {
      const auto count = static_cast<std::int32_t>(t.nodes.size());
      if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= m.n_features_ || n.left <= 0 ||
                             n.left >= count || n.right <= 0 || n.right >= count))
        throw Error("model artifact has a malformed split node");
      if (n.feature < 0 && (n.begin >= n.end || n.end > t.rows.size()))
        throw Error("model artifact has a malformed leaf");
    }
    m.compute_leaf_values(t);
  }
  return m;
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const std::vector<double>& Y;  // row-major
  std::size_t outputs;
  int k;
  int n_min;
  Rng rng;

  bool targets_constant(const std::uint32_t* rows, std::size_t n) const {
    const double* first = &Y[rows[0] * outputs];
    for (std::size_t i = 1; i < n; ++i) {
      const double* y = &Y[rows[i] * outputs];
      if (!std::equal(first, first + outputs, y)) return false;
    }
    return true;
  }

  void grow(std::vector<std::uint32_t>& rows, std::vector<std::int32_t>& features, auto& nodes) {
    struct Task {
      std::int32_t node;
      std::uint32_t begin, end;
    };
    std::vector<Task> stack;
    nodes.emplace_back();
    stack.push_back({0, 0, static_cast<std::uint32_t>(rows.size())});
    std::int32_t leaf_count = 0;
    const auto p = static_cast<std::size_t>(X.cols());
    std::vector<double> left(outputs), right(outputs);

    while (!stack.empty()) {
      Task task = stack.back();
      stack.pop_back();
      std::uint32_t* r = rows.data() + task.begin;
      const std::size_t n = task.end - task.begin;
      auto make_leaf = [&] {
        auto& node = nodes[static_cast<std::size_t>(task.node)];
        node.feature = -1;
        node.left = leaf_count++;
        node.begin = task.begin;
        node.end = task.end;
      };
      if (n < static_cast<std::size_t>(n_min) || targets_constant(r, n)) {
        make_leaf();
        continue;
      }
      int best_feature = -1;
      double best_thr = 0.0, best_score = -std::numeric_limits<double>::infinity();
      int found = 0;
      // Lazy Fisher-Yates over features; constant features are skipped.
      for (std::size_t drawn = 0; drawn < p && found < k; ++drawn) {
        std::size_t pick = drawn + uniform_index(rng, p - drawn);
        std::swap(features[drawn], features[pick]);
        const auto f = static_cast<Eigen::Index>(features[drawn]);
        double lo = X(r[0], f), hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
          double v = X(r[i], f);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (!(hi > lo)) continue;
        ++found;
        double thr = lo + uniform01(rng) * (hi - lo);
        if (thr >= hi) thr = lo;
        // Both sides are summed directly so a mirrored partition scores bit-identically.
        std::fill(left.begin(), left.end(), 0.0);
        std::fill(right.begin(), right.end(), 0.0);
        std::size_t nl = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double* y = &Y[r[i] * outputs];
          if (X(r[i], f) <= thr) {
            ++nl;
            for (std::size_t j = 0; j < outputs; ++j) left[j] += y[j];
          } else {
            for (std::size_t j = 0; j < outputs; ++j) right[j] += y[j];
          }
        }
        const double nr = static_cast<double>(n - nl);
        double score = 0.0;
        for (std::size_t j = 0; j < outputs; ++j)
          score += left[j] * left[j] / static_cast<double>(nl) + right[j] * right[j] / nr;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_thr = thr;
        }
      }
      if (best_feature < 0) {
        make_leaf();
        continue;
      }
      auto mid = std::stable_partition(r, r + n, [&](std::uint32_t row) {
        return X(row, best_feature) <= best_thr;
      });
      const auto split = task.begin + static_cast<std::uint32_t>(mid - r);
      const auto li = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      auto& node = nodes[static_cast<std::size_t>(task.node)];
      node.feature = best_feature;
      node.threshold = best_thr;
      node.left = li;
      node.right = li + 1;
      stack.push_back({li + 1, split, task.end});
      stack.push_back({li, task.begin, split});
    }
  }
};

}  // namespace

ExtraTreesModel fit_extratrees(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const ExtraTreesConfig& config, std::vector<std::string> feature_names) {
  const auto p = static_cast<std::size_t>(X.cols());
  config.validate(p);
  if (X.rows() != Y.rows()) throw Error("feature and target row counts differ");
  if (Y.cols() < 1) throw Error("ExtraTrees needs at least one target column");
  if (X.rows() < config.min_samples_split)
    throw Error("ExtraTrees needs at least " + std::to_string(config.min_samples_split) +
                " training rows, got " + std::to_string(X.rows()));
  if (!X.allFinite() || !Y.allFinite()) throw Error("ExtraTrees training data has non-finite values");
  if (feature_names.empty())
    for (std::size_t i = 0; i < p; ++i) feature_names.push_back("x" + std::to_string(i + 1));
  if (feature_names.size() != p) throw Error("feature name count does not match columns");

  ExtraTreesModel m;
  m.config_ = config;
  m.n_features_ = p;
  m.n_outputs_ = static_cast<std::size_t>(Y.cols());
  m.feature_names_ = std::move(feature_names);
  m.targets_.resize(static_cast<std::size_t>(Y.size()));
  for (Eigen::Index r = 0; r < Y.rows(); ++r)
    for (Eigen::Index c = 0; c < Y.cols(); ++c)
      m.targets_[static_cast<std::size_t>(r) * m.n_outputs_ + static_cast<std::size_t>(c)] = Y(r, c);
  m.trees_.resize(static_cast<std::size_t>(config.trees));
  const int k = config.resolved_max_features(p);

  parallel_for(m.trees_.size(), [&](std::size_t t) {
    TreeBuilder b{X, m.targets_, m.n_outputs_, k, config.min_samples_split,
                  Rng(derive_seed(config.seed, t))};
    auto& tree = m.trees_[t];
    tree.rows.resize(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < tree.rows.size(); ++i) tree.rows[i] = static_cast<std::uint32_t>(i);
    std::vector<std::int32_t> features(p);
    for (std::size_t i = 0; i < p; ++i) features[i] = static_cast<std::int32_t>(i);
    b.grow(tree.rows, features, tree.nodes);
    m.compute_leaf_values(tree);
  });
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> contiguous_folds(std::size_t rows, std::size_t folds) {
  if (folds < 2) throw Error("cross-validation needs at least 2 folds");
  if (rows < folds)
    throw Error("cross-validation needs at least " + std::to_string(folds) + " rows, got " +
                std::to_string(rows));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t f = 0; f < folds; ++f) out.emplace_back(f * rows / folds, (f + 1) * rows / folds);
  return out;
}

namespace {

double mean_row_rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r)
    acc += std::sqrt((pred.row(r) - truth.row(r)).squaredNorm() / static_cast<double>(pred.cols()));
  return acc / static_cast<double>(pred.rows());
}

}  // namespace

GridSearchResult grid_search_cv(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                std::span<const ExtraTreesConfig> grid, std::size_t folds) {
  if (grid.empty()) throw Error("hyperparameter grid is empty");
  const auto n = static_cast<std::size_t>(X.rows());
  auto bounds = contiguous_folds(n, folds);
  GridSearchResult result;
  for (const ExtraTreesConfig& cfg : grid) {
    GridScore score{cfg, {}, 0.0};
    for (auto [b, e] : bounds) {
      const auto vb = static_cast<Eigen::Index>(b), ve = static_cast<Eigen::Index>(e);
      const Eigen::Index nt = X.rows() - (ve - vb);
      Eigen::MatrixXd Xt(nt, X.cols()), Yt(nt, Y.cols());
      Xt << X.topRows(vb), X.bottomRows(X.rows() - ve);
      Yt << Y.topRows(vb), Y.bottomRows(Y.rows() - ve);
      auto model = fit_extratrees(Xt, Yt, cfg);
      score.fold_rmse.push_back(mean_row_rmse(model.predict(X.middleRows(vb, ve - vb).eval()),
                                              Y.middleRows(vb, ve - vb)));
    }
    double acc = 0.0;
    for (double v : score.fold_rmse) acc += v;
    score.mean_rmse = acc / static_cast<double>(score.fold_rmse.size());
    result.table.push_back(std::move(score));
  }
  const std::size_t p = static_cast<std::size_t>(X.cols());
  auto better = [&](const GridScore& a, const GridScore& b) {
    if (a.mean_rmse != b.mean_rmse) return a.mean_rmse < b.mean_rmse;
    if (a.config.trees != b.config.trees) return a.config.trees < b.config.trees;
    return a.config.resolved_max_features(p) < b.config.resolved_max_features(p);
  };
  const GridScore* best = &result.table.front();
  for (const auto& s : result.table)
    if (better(s, *best)) best = &s;
  result.best = best->config;
  return result;
}

std::vector<ExtraTreesConfig> default_grid(std::size_t n_features, std::uint64_t seed) {
  const int sqrt_p = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_features)))));
  const int third = std::max(1, static_cast<int>(n_features / 3));
  std::vector<int> ks{sqrt_p};
  if (third != sqrt_p) ks.push_back(third);
  std::vector<ExtraTreesConfig> grid;
  for (int trees : {100, 300})
    for (int k : ks)
      for (int n_min : {2, 5}) grid.push_back({trees, k, n_min, seed});
  return grid;
}

void write_predictions(std::ostream& out, std::span<const Date> dates, const Eigen::MatrixXd& values,
                       std::string_view provenance) {
  if (static_cast<std::size_t>(values.rows()) != dates.size())
    throw Error("prediction rows do not match dates");
  if (!provenance.empty()) out << provenance << '\n';
  out << "date";
  for (Eigen::Index h = 0; h < values.cols(); ++h) out << ",h" << h + 1;
  out << '\n';
  for (std::size_t r = 0; r < dates.size(); ++r) {
    out << format_date(dates[r]);
    for (Eigen::Index h = 0; h < values.cols(); ++h)
      out << ',' << format_double(values(static_cast<Eigen::Index>(r), h));
    out << '\n';
  }
}

PredictionTable read_predictions(std::istream& in) {
  auto rows = read_csv(in);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "date")
    throw Error("prediction table lacks a 'date' header");
  const std::size_t cols = rows[0].size() - 1;
  PredictionTable t;
  t.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != cols + 1)
      throw Error("prediction table row " + std::to_string(r) + " has wrong field count");
    t.dates.push_back(parse_date(rows[r][0]));
    for (std::size_t c = 0; c < cols; ++c)
      t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = parse_double(rows[r][c + 1]);
  }
  return t;
}

}  // namespace newsload
