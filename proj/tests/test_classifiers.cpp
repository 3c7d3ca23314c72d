#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "tabsynth/classifiers.hpp"
#include "tabsynth/error.hpp"

using namespace tabsynth;

namespace {

TableSchema labelled_schema() {
  return TableSchema({ColumnSpec::numeric("x1"), ColumnSpec::numeric("x2"), ColumnSpec::categorical("shade", {"a", "b", "c"}),
                      ColumnSpec::categorical("y", {"neg", "pos"})},
                     "y");
}

// Label = 1 iff x1 + x2 > 0; balanced, linearly separable with a margin.
Dataset separable(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> shade(0, 2);
  Dataset d(labelled_schema(), rows);
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows); ++r) {
    const int y = static_cast<int>(r % 2);
    double a = n(rng), b = n(rng);
    const double s = a + b;
    const double target = (std::abs(s) + 0.5) * (y == 1 ? 1.0 : -1.0);
    a += (target - s) / 2;
    b += (target - s) / 2;
    d.numerics(r, 0) = a;
    d.numerics(r, 1) = b;
    d.categories(r, 0) = shade(rng);
    d.categories(r, 1) = y;
  }
  return d;
}

}  // namespace

TEST_CASE("separable data: logistic regression memorizes") {
  const auto d = separable(400, 1);
  for (Eigen::Index r = 0; r < 400; ++r)
    REQUIRE(((d.numerics(r, 0) + d.numerics(r, 1)) > 0) == (d.categories(r, 1) == 1));
  LogisticRegression lr;
  lr.fit(d, 3);
  const IndexVector truth = d.categories.col(1);
  CHECK(accuracy(lr.predict(d), truth) == 1.0);

  NaiveBayes nb;
  nb.fit(d, 3);
  CHECK(accuracy(nb.predict(d), truth) > 0.9);
  DecisionTree tree;
  tree.fit(d, 3);
  CHECK(accuracy(tree.predict(d), truth) > 0.9);
  CHECK(tree.node_count() > 1);
}

TEST_CASE("categorical-only signal is learned by every classifier") {
  const TableSchema schema({ColumnSpec::categorical("c", {"p", "q", "r"}), ColumnSpec::numeric("noise"),
                            ColumnSpec::categorical("y", {"0", "1"})},
                           "y");
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Dataset d(schema, 300);
  for (Eigen::Index r = 0; r < 300; ++r) {
    d.categories(r, 0) = static_cast<int>(r % 3);
    d.categories(r, 1) = r % 3 == 1 ? 1 : 0;
    d.numerics(r, 0) = n(rng);
  }
  const IndexVector truth = d.categories.col(1);
  for (auto& clf : default_classifiers()) {
    clf->fit(d, 2);
    CAPTURE(clf->name());
    CHECK(accuracy(clf->predict(d), truth) == 1.0);
  }
}

TEST_CASE("label-randomized training set gives chance accuracy") {
  const auto test = separable(400, 3);
  double total = 0;
  for (std::uint64_t shuffle = 0; shuffle < 20; ++shuffle) {
    auto train = separable(400, 100 + shuffle);
    std::mt19937_64 rng(shuffle);
    std::vector<std::int32_t> labels(train.categories.col(1).data(), train.categories.col(1).data() + 400);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (Eigen::Index r = 0; r < 400; ++r) train.categories(r, 1) = labels[static_cast<std::size_t>(r)];
    total += utility(train, test, "y").mean_accuracy;
  }
  CHECK(std::abs(total / 20 - 0.5) <= 0.05);
}

TEST_CASE("utility reports each classifier and validates the label column") {
  const auto train = separable(300, 4);
  const auto test = separable(200, 5);
  const auto u = utility(train, test, "y");
  REQUIRE(u.per_classifier.size() == 3);
  CHECK(u.per_classifier[0].first == "logistic_regression");
  CHECK(u.per_classifier[1].first == "naive_bayes");
  CHECK(u.per_classifier[2].first == "decision_tree");
  double mean = 0;
  for (const auto& [name, acc] : u.per_classifier) {
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    mean += acc / 3;
  }
  CHECK(u.mean_accuracy == doctest::Approx(mean));
  CHECK(u.mean_accuracy > 0.85);
  CHECK(omitted_classifiers() == std::vector<std::string>{"random_forest", "ada_boost"});

  for (const char* bad : {"missing", "x1"}) {
    try {
      utility(train, test, bad);
      FAIL("expected MissingLabelColumn");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingLabelColumn);
    }
  }
}

TEST_CASE("classes absent from the synthetic training set fall back gracefully") {
  auto train = separable(200, 6);
  train.categories.col(1).setZero();  // only "neg"
  const auto test = separable(100, 7);
  const auto u = utility(train, test, "y");
  for (const auto& [name, acc] : u.per_classifier) CHECK(acc == doctest::Approx(0.5));
}

TEST_CASE("feature encoder: one-hot then standardized numerics, label dropped") {
  const auto d = separable(10, 8);
  const FeatureEncoder enc(d, 3, true);
  CHECK(enc.width() == 3 + 2);
  const auto x = enc.transform(d);
  CHECK(x.rows() == 10);
  for (Eigen::Index r = 0; r < 10; ++r) CHECK(x.row(r).head(3).sum() == 1.0);
  CHECK(std::abs(x.col(3).mean()) < 1e-12);
  CHECK(std::abs(x.col(4).squaredNorm() / 10 - 1.0) < 1e-12);
}
