#include <doctest.h>

#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/report.hpp"

using namespace tabsynth;

TEST_CASE("evaluate_all: perfect copy of the test split") {
  std::mt19937_64 rng(1);
  const auto schema = fixtures::mixed_schema();
  const auto data = fixtures::random_dataset(schema, 300, rng);
  const auto [train, test] = split(data, 0.7, 3);
  const auto r = evaluate_all(train, test, test, 3);
  CHECK(r.fidelity_column == 1.0);
  CHECK(r.fidelity_row == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.column_scores.size() == schema.size());
  CHECK(r.pair_scores.size() == 4);
  CHECK(r.mixed_pairs_excluded == 6);
  REQUIRE(r.utility.has_value());
  CHECK(*r.utility >= 0.0);
  CHECK(*r.utility <= 1.0);
  CHECK(r.classifier_accuracy.size() == 3);
  CHECK(r.omitted_classifiers.size() == 2);
  CHECK(r.synthesis == 1.0);  // test rows never appear in train
  CHECK(r.privacy_dcr > 0.0);
  CHECK(r.label_column == "label");
  CHECK(r.real_train_rows == 210);
  CHECK(r.synthetic_rows == 90);

  const auto again = evaluate_all(train, test, test, 3);
  CHECK(report_to_json(again) == report_to_json(r));
}

TEST_CASE("evaluate_all without a label column skips utility") {
  std::mt19937_64 rng(2);
  const auto schema = fixtures::mixed_schema(false);
  const auto data = fixtures::random_dataset(schema, 100, rng);
  const auto [train, test] = split(data, 0.7, 1);
  const auto r = evaluate_all(train, test, test, 1);
  CHECK(!r.utility);
  const auto doc = nlohmann::json::parse(report_to_json(r));
  CHECK(doc["utility"].is_null());
  CHECK(render_table({r}).find("n/a") != std::string::npos);
  // an explicit label column still works when categorical
  CHECK(evaluate_all(train, test, test, 1, "size").utility.has_value());
}

TEST_CASE("report json mirrors the report fields") {
  std::mt19937_64 rng(3);
  const auto schema = fixtures::mixed_schema();
  const auto real = fixtures::random_dataset(schema, 200, rng);
  const auto synth = fixtures::random_dataset(schema, 100, rng);
  const auto [train, test] = split(real, 0.7, 0);
  const auto r = evaluate_all(train, test, synth, 0);
  const auto doc = nlohmann::json::parse(report_to_json(r));
  CHECK(doc["fidelity_column"]["score"].get<double>() == r.fidelity_column);
  CHECK(doc["fidelity_column"]["per_column"].size() == 5);
  CHECK(doc["fidelity_row"]["per_pair"].size() == 4);
  CHECK(doc["utility"]["per_classifier"].size() == 3);
  CHECK(doc["synthesis"].get<double>() == r.synthesis);
  CHECK(doc["privacy_dcr"].get<double>() == r.privacy_dcr);
  CHECK(doc["metadata"]["omitted_classifiers"][0] == "random_forest");
  CHECK(doc["metadata"]["seed"] == 0);
}

TEST_CASE("repeat summary: mean and population std") {
  EvaluationReport a, b;
  a.fidelity_column = 0.8;
  b.fidelity_column = 0.9;
  a.utility = 0.5;
  b.utility = 0.7;
  const auto s = summarize({a, b});
  CHECK(s.fidelity_column.mean == doctest::Approx(0.85));
  CHECK(s.fidelity_column.std == doctest::Approx(0.05));
  REQUIRE(s.utility);
  CHECK(s.utility->mean == doctest::Approx(0.6));
  const auto table = render_table(s);
  CHECK(table.find("0.850 ± 0.050") != std::string::npos);
  CHECK(table.find("Fidelity Column ↑") != std::string::npos);
  CHECK(table.find("Privacy ↓") != std::string::npos);
  const auto doc = nlohmann::json::parse(report_to_json(s));
  CHECK(doc["summary"]["repeats"] == 2);
  CHECK(doc["runs"].size() == 2);
  CHECK_THROWS_AS(summarize({}), Error);
}
