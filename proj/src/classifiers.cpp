#include "tabsynth/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tabsynth/error.hpp"
#include "tabsynth/metrics.hpp"

namespace tabsynth {

namespace {

IndexVector labels_of(const Dataset& data, std::size_t label_column) {
  return data.categories.col(static_cast<Eigen::Index>(data.schema.slot(label_column)));
}

std::int32_t argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k)
    if (row(k) > row(best)) best = k;
  return static_cast<std::int32_t>(best);
}

constexpr std::size_t kMaxThresholds = 64;

}  // namespace

FeatureEncoder::FeatureEncoder(const Dataset& fit_data, std::size_t label_column, bool standardize)
    : label_column_(label_column), standardize_(standardize) {
  const auto& schema = fit_data.schema;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c == label_column_) continue;
    width_ += schema.column(c).is_categorical() ? schema.column(c).vocabulary.size() : 1;
  }
  for (std::size_t c : schema.numeric_columns()) {
    if (c == label_column_) continue;
    const auto col = fit_data.numerics.col(static_cast<Eigen::Index>(schema.slot(c)));
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    mean_.push_back(mean);
    sd_.push_back(sd > 0.0 ? sd : 1.0);
  }
}

Matrix<double> FeatureEncoder::transform(const Dataset& data) const {
  const auto& schema = data.schema;
  Matrix<double> out = Matrix<double>::Zero(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(width_));
  Eigen::Index offset = 0;
  for (std::size_t c : schema.categorical_columns()) {
    if (c == label_column_) continue;
    for (std::size_t r = 0; r < data.rows(); ++r) out(static_cast<Eigen::Index>(r), offset + data.category(r, c)) = 1.0;
    offset += static_cast<Eigen::Index>(schema.column(c).vocabulary.size());
  }
  std::size_t k = 0;
  for (std::size_t c : schema.numeric_columns()) {
    if (c == label_column_) continue;
    auto col = out.col(offset++);
    col = data.numerics.col(static_cast<Eigen::Index>(schema.slot(c)));
    if (standardize_) col = (col.array() - mean_[k]) / sd_[k];
    ++k;
  }
  return out;
}

// ---------------------------------------------------------------------------

void LogisticRegression::fit(const Dataset& train, std::size_t label_column) {
  encoder_ = FeatureEncoder(train, label_column, true);
  const Matrix<double> features = encoder_.transform(train);
  const auto n = features.rows();
  const auto f = features.cols();
  const auto k = static_cast<Eigen::Index>(train.schema.column(label_column).vocabulary.size());
  Matrix<double> x(n, f + 1);
  x << features, Matrix<double>::Ones(n, 1);
  const IndexVector y = labels_of(train, label_column);
  Matrix<double> onehot = Matrix<double>::Zero(n, k);
  for (Eigen::Index r = 0; r < n; ++r) onehot(r, y(r)) = 1.0;

  weights_ = Matrix<double>::Zero(f + 1, k);
  Matrix<double> m1 = Matrix<double>::Zero(f + 1, k), m2 = Matrix<double>::Zero(f + 1, k);
  const double b1 = 0.9, b2 = 0.999;
  for (std::size_t it = 1; it <= iterations_; ++it) {
    Matrix<double> logits = x * weights_;
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    logits = (logits.colwise() - row_max).array().exp().matrix();
    Eigen::VectorXd z = logits.rowwise().sum();
    logits = logits.array().colwise() / z.array();
    Matrix<double> grad = x.transpose() * (logits - onehot) / static_cast<double>(n);
    grad.topRows(f) += l2_ * weights_.topRows(f);
    m1 = b1 * m1 + (1 - b1) * grad;
    m2 = b2 * m2 + (1 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(it));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(it));
    weights_.array() -= learning_rate_ * (m1.array() / c1) / ((m2.array() / c2).sqrt() + 1e-8);
  }
}

IndexVector LogisticRegression::predict(const Dataset& data) const {
  const Matrix<double> features = encoder_.transform(data);
  const Matrix<double> scores = features * weights_.topRows(features.cols());
  IndexVector out(scores.rows());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) out(r) = argmax(scores.row(r) + weights_.bottomRows(1));
  return out;
}

// ---------------------------------------------------------------------------

void NaiveBayes::fit(const Dataset& train, std::size_t label_column) {
  label_column_ = label_column;
  const auto& schema = train.schema;
  const auto k = schema.column(label_column).vocabulary.size();
  const IndexVector y = labels_of(train, label_column);
  const auto n = static_cast<double>(train.rows());

  std::vector<double> counts(k, 0.0);
  for (Eigen::Index r = 0; r < y.size(); ++r) counts[static_cast<std::size_t>(y(r))] += 1.0;
  log_prior_.resize(k);
  for (std::size_t c = 0; c < k; ++c) log_prior_[c] = std::log((counts[c] + 1.0) / (n + static_cast<double>(k)));

  log_cat_.clear();
  for (std::size_t c : schema.categorical_columns()) {
    const auto v = schema.column(c).vocabulary.size();
    Matrix<double> table = Matrix<double>::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v));
    if (c != label_column) {
      for (std::size_t r = 0; r < train.rows(); ++r) table(y(static_cast<Eigen::Index>(r)), train.category(r, c)) += 1.0;
      for (Eigen::Index cls = 0; cls < table.rows(); ++cls)
        table.row(cls) = ((table.row(cls).array() + 1.0) / (counts[static_cast<std::size_t>(cls)] + static_cast<double>(v))).log();
    }
    log_cat_.push_back(std::move(table));
  }

  const auto n_num = train.numerics.cols();
  mean_ = Matrix<double>::Zero(static_cast<Eigen::Index>(k), n_num);
  var_ = Matrix<double>::Ones(static_cast<Eigen::Index>(k), n_num);
  double max_var = 0.0;
  for (Eigen::Index c = 0; c < n_num; ++c) {
    const auto col = train.numerics.col(c);
    max_var = std::max(max_var, (col.array() - col.mean()).square().mean());
  }
  const double smoothing = std::max(1e-9 * max_var, 1e-12);
  for (Eigen::Index cls = 0; cls < static_cast<Eigen::Index>(k); ++cls) {
    const double count = counts[static_cast<std::size_t>(cls)];
    if (count == 0.0) continue;
    for (Eigen::Index c = 0; c < n_num; ++c) {
      double sum = 0.0;
      for (Eigen::Index r = 0; r < y.size(); ++r)
        if (y(r) == cls) sum += train.numerics(r, c);
      const double mean = sum / count;
      double ss = 0.0;
      for (Eigen::Index r = 0; r < y.size(); ++r)
        if (y(r) == cls) ss += (train.numerics(r, c) - mean) * (train.numerics(r, c) - mean);
      mean_(cls, c) = mean;
      var_(cls, c) = ss / count + smoothing;
    }
  }
}

IndexVector NaiveBayes::predict(const Dataset& data) const {
  const auto& schema = data.schema;
  const auto k = static_cast<Eigen::Index>(log_prior_.size());
  IndexVector out(static_cast<Eigen::Index>(data.rows()));
  Eigen::RowVectorXd score(k);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (Eigen::Index cls = 0; cls < k; ++cls) score(cls) = log_prior_[static_cast<std::size_t>(cls)];
    const auto& cats = schema.categorical_columns();
    for (std::size_t j = 0; j < cats.size(); ++j) {
      if (cats[j] == label_column_) continue;
      score += log_cat_[j].col(data.category(r, cats[j])).transpose();
    }
    for (Eigen::Index c = 0; c < data.numerics.cols(); ++c) {
      const double x = data.numerics(static_cast<Eigen::Index>(r), c);
      for (Eigen::Index cls = 0; cls < k; ++cls) {
        const double v = var_(cls, c);
        const double d = x - mean_(cls, c);
        score(cls) += -0.5 * std::log(2.0 * 3.14159265358979323846 * v) - 0.5 * d * d / v;
      }
    }
    out(static_cast<Eigen::Index>(r)) = argmax(score);
  }
  return out;
}

// ---------------------------------------------------------------------------

void DecisionTree::fit(const Dataset& train, std::size_t label_column) {
  encoder_ = FeatureEncoder(train, label_column, false);
  classes_ = train.schema.column(label_column).vocabulary.size();
  const Matrix<double> x = encoder_.transform(train);
  const IndexVector y = labels_of(train, label_column);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto f = static_cast<std::size_t>(x.cols());

  thresholds_.assign(f, {});
  std::vector<std::uint8_t> bins(n * f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    const auto col = x.col(static_cast<Eigen::Index>(j));
    std::vector<double> sorted(col.data(), col.data() + col.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto& th = thresholds_[j];
    if (distinct.size() <= kMaxThresholds + 1) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) th.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    } else {
      for (std::size_t i = 1; i < kMaxThresholds; ++i) th.push_back(sorted[i * sorted.size() / kMaxThresholds]);
      th.erase(std::unique(th.begin(), th.end()), th.end());
      if (!th.empty() && th.back() >= distinct.back()) th.pop_back();
    }
    for (std::size_t r = 0; r < n; ++r)
      bins[r * f + j] = static_cast<std::uint8_t>(std::lower_bound(th.begin(), th.end(), col(static_cast<Eigen::Index>(r))) - th.begin());
  }

  nodes_.clear();
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  build(x, bins, y, rows, 0);
}

int DecisionTree::build(const Matrix<double>& x, const std::vector<std::uint8_t>& bins, const IndexVector& y,
                        std::vector<std::size_t>& rows, std::size_t depth) {
  const auto f = static_cast<std::size_t>(x.cols());
  const std::size_t k = classes_;
  std::vector<double> counts(k, 0.0);
  for (std::size_t r : rows) counts[static_cast<std::size_t>(y(static_cast<Eigen::Index>(r)))] += 1.0;

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[static_cast<std::size_t>(id)].prediction =
      static_cast<std::int32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
  if (pure || depth >= max_depth_ || rows.size() < 2 * min_leaf_) return id;

  const auto total = static_cast<double>(rows.size());
  double parent = 0.0;
  for (double c : counts) parent += c * c;
  parent /= total;

  double best_gain = 1e-12;
  int best_feature = -1;
  std::size_t best_split = 0;
  std::vector<double> hist;
  for (std::size_t j = 0; j < f; ++j) {
    const std::size_t nb = thresholds_[j].size() + 1;
    if (nb < 2) continue;
    hist.assign(nb * k, 0.0);
    for (std::size_t r : rows) hist[bins[r * f + j] * k + static_cast<std::size_t>(y(static_cast<Eigen::Index>(r)))] += 1.0;
    std::vector<double> left(k, 0.0);
    double n_left = 0.0;
    for (std::size_t s = 0; s + 1 < nb; ++s) {
      for (std::size_t c = 0; c < k; ++c) {
        left[c] += hist[s * k + c];
        n_left += hist[s * k + c];
      }
      const double n_right = total - n_left;
      if (n_left < static_cast<double>(min_leaf_) || n_right < static_cast<double>(min_leaf_)) continue;
      double sl = 0.0, sr = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        sl += left[c] * left[c];
        const double rc = counts[c] - left[c];
        sr += rc * rc;
      }
      const double gain = sl / n_left + sr / n_right - parent;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(j);
        best_split = s;
      }
    }
  }
  if (best_feature < 0) return id;

  std::vector<std::size_t> left_rows, right_rows;
  const auto bf = static_cast<std::size_t>(best_feature);
  for (std::size_t r : rows) (bins[r * f + bf] <= best_split ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  const int left = build(x, bins, y, left_rows, depth + 1);
  const int right = build(x, bins, y, right_rows, depth + 1);
  auto& node = nodes_[static_cast<std::size_t>(id)];
  node.feature = best_feature;
  node.threshold = thresholds_[bf][best_split];
  node.left = left;
  node.right = right;
  return id;
}

IndexVector DecisionTree::predict(const Dataset& data) const {
  const Matrix<double> x = encoder_.transform(data);
  IndexVector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    int id = 0;
    while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& node = nodes_[static_cast<std::size_t>(id)];
      id = x(r, node.feature) <= node.threshold ? node.left : node.right;
    }
    out(r) = nodes_[static_cast<std::size_t>(id)].prediction;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::unique_ptr<Classifier>> default_classifiers() {
  std::vector<std::unique_ptr<Classifier>> out;
  out.push_back(std::make_unique<LogisticRegression>());
  out.push_back(std::make_unique<NaiveBayes>());
  out.push_back(std::make_unique<DecisionTree>());
  return out;
}

double accuracy(const IndexVector& predicted, const IndexVector& truth) {
  if (truth.size() == 0) throw Error(ErrorKind::EmptyDataset, "accuracy over zero rows");
  return static_cast<double>((predicted.array() == truth.array()).count()) / static_cast<double>(truth.size());
}

UtilityResult utility(const Dataset& synth_train, const Dataset& real_test, const std::string& label_column) {
  require_same_schema(synth_train, real_test);
  const auto idx = synth_train.schema.find(label_column);
  if (!idx || !synth_train.schema.column(*idx).is_categorical())
    throw Error(ErrorKind::MissingLabelColumn, "no categorical column named '" + label_column + "'");
  if (synth_train.empty() || real_test.empty()) throw Error(ErrorKind::EmptyDataset, "utility needs non-empty datasets");

  const IndexVector truth = labels_of(real_test, *idx);
  UtilityResult out;
  double total = 0.0;
  for (auto& clf : default_classifiers()) {
    clf->fit(synth_train, *idx);
    const double acc = accuracy(clf->predict(real_test), truth);
    out.per_classifier.emplace_back(clf->name(), acc);
    total += acc;
  }
  out.mean_accuracy = total / static_cast<double>(out.per_classifier.size());
  return out;
}

}  // namespace tabsynth
