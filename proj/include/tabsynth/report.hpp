#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tabsynth/metrics.hpp"
#include "tabsynth/schema.hpp"

namespace tabsynth {

struct NamedPairScore {
  std::string a, b;
  double score = 0.0;
  bool degenerate = false;
};

struct EvaluationReport {
  double fidelity_column = 0.0;
  std::vector<std::pair<std::string, double>> column_scores;
  double fidelity_row = 0.0;
  std::vector<NamedPairScore> pair_scores;
  std::optional<double> utility;  // absent without a label column
  std::vector<std::pair<std::string, double>> classifier_accuracy;
  double synthesis = 0.0;
  double privacy_dcr = 0.0;

  // metadata
  std::string model_name = "synthetic";
  std::size_t real_train_rows = 0;
  std::size_t real_test_rows = 0;
  std::size_t synthetic_rows = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> label_column;
  std::vector<std::string> omitted_classifiers;
  std::size_t mixed_pairs_excluded = 0;
  std::size_t degenerate_pairs = 0;
};

// Fidelity against real_test; DCR and synthesis against real_train; utility
// trains on synth and tests on real_test (skipped when no label column).
EvaluationReport evaluate_all(const Dataset& real_train, const Dataset& real_test, const Dataset& synth,
                              std::uint64_t seed, std::optional<std::string> label_column = std::nullopt);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population std over runs
};

// Per-metric mean and std over repeated evaluations (one per seed).
struct RepeatedReport {
  std::vector<EvaluationReport> runs;
  MetricSummary fidelity_column, fidelity_row, synthesis, privacy_dcr;
  std::optional<MetricSummary> utility;
};

RepeatedReport summarize(std::vector<EvaluationReport> runs);

std::string report_to_json(const EvaluationReport& report);
std::string report_to_json(const RepeatedReport& report);

// Plain-text table: one row per model, five score columns.
std::string render_table(const std::vector<EvaluationReport>& rows);
std::string render_table(const RepeatedReport& report);

}  // namespace tabsynth
