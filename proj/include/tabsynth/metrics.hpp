#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/schema.hpp"

namespace tabsynth {

// Two-sample Kolmogorov-Smirnov statistic: sup_x |F_real(x) - F_synth(x)|,
// exact via a merge scan over the sorted samples.
double ks_statistic(std::span<const double> real, std::span<const double> synth);

// Unhalved total variation: sum over the union of observed categories of
// |p_real(c) - p_synth(c)|, in [0, 2].
double tvd(std::span<const std::int32_t> real, std::span<const std::int32_t> synth);
double tvd(std::span<const std::int64_t> real, std::span<const std::int64_t> synth);

// cov / (sigma_a sigma_b), two-pass. Throws ConstantColumn if either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

std::vector<double> numeric_column(const Dataset& data, std::size_t column);
std::vector<std::int32_t> categorical_column(const Dataset& data, std::size_t column);

struct ColumnFidelity {
  double aggregate = 0.0;
  std::vector<double> per_column;  // schema order
};

// 1 - KS for numeric columns, 1 - TVD/2 for categorical; unweighted mean.
ColumnFidelity fidelity_column(const Dataset& real, const Dataset& synth);

struct PairScore {
  std::size_t a = 0;
  std::size_t b = 0;
  double score = 0.0;
  bool degenerate = false;  // a constant column made Pearson undefined
};

struct RowFidelity {
  double aggregate = 0.0;
  std::vector<PairScore> pairs;
  std::size_t mixed_pairs_excluded = 0;
};

// Numeric pairs: 1 - |rho_real - rho_synth| / 2. Categorical pairs: 1 - TVD/2
// over the contingency table. Mixed-kind pairs are not scored. A pair with a
// constant column scores 1 when both datasets share the same constant pattern,
// else 0.5.
RowFidelity fidelity_row(const Dataset& real, const Dataset& synth);

// Distance from each synthetic row to its closest real row. Numeric cells are
// standardized with the real data's mean and population std (std 1 for
// constant columns); categorical cells contribute 0 on match, 1 on mismatch.
std::vector<double> closest_record_distances(const Dataset& real, const Dataset& synth);

// Median of closest_record_distances.
double privacy_dcr(const Dataset& real, const Dataset& synth);

inline constexpr double kSynthesisRelativeTolerance = 0.01;
inline constexpr double kSynthesisZeroTolerance = 1e-9;

// True when every categorical cell is equal and every numeric cell is within
// 1% of the real value (|s| <= 1e-9 when the real value is 0).
bool rows_match(const Dataset& real, std::size_t real_row, const Dataset& synth, std::size_t synth_row);

// 1 - (fraction of synthetic rows matching some real row); 1.0 is fully novel.
double synthesis_score(const Dataset& real, const Dataset& synth);

void require_same_schema(const Dataset& a, const Dataset& b);

}  // namespace tabsynth
