#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Feature view used by the utility classifiers: one-hot categorical
// columns followed by numeric columns, label column excluded. Numeric columns
// are standardized with statistics from the fitting data when `standardize`.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(const Dataset& fit_data, std::size_t label_column, bool standardize);

  Matrix<double> transform(const Dataset& data) const;
  std::size_t width() const { return width_; }

 private:
  std::size_t label_column_ = 0;
  bool standardize_ = false;
  std::size_t width_ = 0;
  std::vector<double> mean_, sd_;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;
  virtual void fit(const Dataset& train, std::size_t label_column) = 0;
  virtual IndexVector predict(const Dataset& data) const = 0;
};

// Multinomial logistic regression on one-hot/standardized features, trained by
// full-batch Adam from zero weights with a small L2 penalty.
class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(std::size_t iterations = 500, double learning_rate = 0.05, double l2 = 1e-4)
      : iterations_(iterations), learning_rate_(learning_rate), l2_(l2) {}
  std::string name() const override { return "logistic_regression"; }
  void fit(const Dataset& train, std::size_t label_column) override;
  IndexVector predict(const Dataset& data) const override;

 private:
  std::size_t iterations_;
  double learning_rate_;
  double l2_;
  FeatureEncoder encoder_;
  Matrix<double> weights_;  // (F + 1) x K, last row is the intercept
};

// Gaussian likelihood for numeric features, Laplace-smoothed categorical
// likelihood for categorical ones; Laplace-smoothed class prior.
class NaiveBayes final : public Classifier {
 public:
  std::string name() const override { return "naive_bayes"; }
  void fit(const Dataset& train, std::size_t label_column) override;
  IndexVector predict(const Dataset& data) const override;

 private:
  std::size_t label_column_ = 0;
  std::vector<double> log_prior_;
  std::vector<Matrix<double>> log_cat_;  // per categorical feature: K x V
  Matrix<double> mean_, var_;            // K x (#numeric)
};

// CART with Gini impurity over threshold splits on the one-hot/numeric
// feature view; candidate thresholds are midpoints between distinct values
// (at most 64 per feature, quantile-thinned).
class DecisionTree final : public Classifier {
 public:
  explicit DecisionTree(std::size_t max_depth = 8, std::size_t min_leaf = 5) : max_depth_(max_depth), min_leaf_(min_leaf) {}
  std::string name() const override { return "decision_tree"; }
  void fit(const Dataset& train, std::size_t label_column) override;
  IndexVector predict(const Dataset& data) const override;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::int32_t prediction = 0;
  };

  int build(const Matrix<double>& x, const std::vector<std::uint8_t>& bins, const IndexVector& y,
            std::vector<std::size_t>& rows, std::size_t depth);

  std::size_t max_depth_;
  std::size_t min_leaf_;
  std::size_t classes_ = 0;
  FeatureEncoder encoder_;
  std::vector<std::vector<double>> thresholds_;
  std::vector<Node> nodes_;
};

// The implemented classifier zoo, in report order.
std::vector<std::unique_ptr<Classifier>> default_classifiers();
inline const std::vector<std::string>& omitted_classifiers() {
  static const std::vector<std::string> names{"random_forest", "ada_boost"};
  return names;
}

double accuracy(const IndexVector& predicted, const IndexVector& truth);

struct UtilityResult {
  double mean_accuracy = 0.0;
  std::vector<std::pair<std::string, double>> per_classifier;
};

// Trains each classifier on `synth_train` and scores accuracy on `real_test`.
// Throws MissingLabelColumn if the column is absent or not categorical.
UtilityResult utility(const Dataset& synth_train, const Dataset& real_test, const std::string& label_column);

}  // namespace tabsynth
