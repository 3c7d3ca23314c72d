#include "tabsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "tabsynth/error.hpp"

namespace tabsynth {

namespace {

template <typename T>
double tvd_impl(std::span<const T> real, std::span<const T> synth) {
  if (real.empty() || synth.empty()) throw Error(ErrorKind::EmptyColumn, "TVD needs non-empty columns");
  std::map<T, std::pair<std::size_t, std::size_t>> counts;
  for (const T v : real) ++counts[v].first;
  for (const T v : synth) ++counts[v].second;
  const auto nr = static_cast<double>(real.size());
  const auto ns = static_cast<double>(synth.size());
  double total = 0.0;
  for (const auto& [key, c] : counts) total += std::abs(static_cast<double>(c.first) / nr - static_cast<double>(c.second) / ns);
  return std::min(total, 2.0);
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

void require_same_schema(const Dataset& a, const Dataset& b) {
  if (!(a.schema == b.schema)) throw Error(ErrorKind::SchemaMismatch, "datasets have different schemas");
}

double ks_statistic(std::span<const double> real, std::span<const double> synth) {
  if (real.empty() || synth.empty()) throw Error(ErrorKind::EmptyColumn, "KS needs non-empty columns");
  std::vector<double> a(real.begin(), real.end());
  std::vector<double> b(synth.begin(), synth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double tvd(std::span<const std::int32_t> real, std::span<const std::int32_t> synth) { return tvd_impl(real, synth); }
double tvd(std::span<const std::int64_t> real, std::span<const std::int64_t> synth) { return tvd_impl(real, synth); }

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorKind::InvalidArgument, "Pearson needs two equal-length columns of >= 2 values");
  if (is_constant(a) || is_constant(b)) throw Error(ErrorKind::ConstantColumn, "Pearson correlation of a constant column");
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<double> numeric_column(const Dataset& data, std::size_t column) {
  const auto col = data.numerics.col(static_cast<Eigen::Index>(data.schema.slot(column)));
  return {col.data(), col.data() + col.size()};
}

std::vector<std::int32_t> categorical_column(const Dataset& data, std::size_t column) {
  const auto col = data.categories.col(static_cast<Eigen::Index>(data.schema.slot(column)));
  return {col.data(), col.data() + col.size()};
}

ColumnFidelity fidelity_column(const Dataset& real, const Dataset& synth) {
  require_same_schema(real, synth);
  ColumnFidelity out;
  for (std::size_t c = 0; c < real.schema.size(); ++c) {
    double score;
    if (real.schema.column(c).is_categorical())
      score = 1.0 - 0.5 * tvd(categorical_column(real, c), categorical_column(synth, c));
    else
      score = 1.0 - ks_statistic(numeric_column(real, c), numeric_column(synth, c));
    out.per_column.push_back(score);
  }
  if (!out.per_column.empty())
    out.aggregate = std::accumulate(out.per_column.begin(), out.per_column.end(), 0.0) /
                    static_cast<double>(out.per_column.size());
  return out;
}

RowFidelity fidelity_row(const Dataset& real, const Dataset& synth) {
  require_same_schema(real, synth);
  if (real.rows() < 2 || synth.rows() < 2) throw Error(ErrorKind::EmptyDataset, "row fidelity needs at least 2 rows");
  const auto& schema = real.schema;
  RowFidelity out;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    for (std::size_t b = a + 1; b < schema.size(); ++b) {
      const bool cat_a = schema.column(a).is_categorical();
      const bool cat_b = schema.column(b).is_categorical();
      PairScore pair{a, b, 0.0, false};
      if (cat_a != cat_b) {
        ++out.mixed_pairs_excluded;
        continue;
      }
      if (cat_a) {
        const auto width = static_cast<std::int64_t>(schema.column(b).vocabulary.size());
        auto joint = [&](const Dataset& d) {
          std::vector<std::int64_t> keys(d.rows());
          for (std::size_t r = 0; r < d.rows(); ++r) keys[r] = d.category(r, a) * width + d.category(r, b);
          return keys;
        };
        pair.score = 1.0 - 0.5 * tvd(joint(real), joint(synth));
      } else {
        const auto ra = numeric_column(real, a), rb = numeric_column(real, b);
        const auto sa = numeric_column(synth, a), sb = numeric_column(synth, b);
        const bool real_a = is_constant(ra), real_b = is_constant(rb);
        const bool synth_a = is_constant(sa), synth_b = is_constant(sb);
        if (real_a || real_b || synth_a || synth_b) {
          pair.degenerate = true;
          pair.score = (real_a == synth_a && real_b == synth_b) ? 1.0 : 0.5;
        } else {
          pair.score = 1.0 - 0.5 * std::abs(pearson(ra, rb) - pearson(sa, sb));
        }
      }
      out.pairs.push_back(pair);
    }
  }
  if (!out.pairs.empty()) {
    double total = 0.0;
    for (const auto& p : out.pairs) total += p.score;
    out.aggregate = total / static_cast<double>(out.pairs.size());
  } else {
    out.aggregate = 1.0;
  }
  return out;
}

std::vector<double> closest_record_distances(const Dataset& real, const Dataset& synth) {
  require_same_schema(real, synth);
  if (real.empty() || synth.empty()) throw Error(ErrorKind::EmptyDataset, "DCR needs non-empty datasets");

  const auto n_num = real.numerics.cols();
  Eigen::RowVectorXd mean = real.numerics.colwise().mean();
  Eigen::RowVectorXd sd(n_num);
  for (Eigen::Index c = 0; c < n_num; ++c) {
    const double s = std::sqrt((real.numerics.col(c).array() - mean(c)).square().mean());
    sd(c) = s > 0.0 ? s : 1.0;
  }
  // one column per row keeps the inner loop contiguous
  const Eigen::MatrixXd rn = ((real.numerics.rowwise() - mean).array().rowwise() / sd.array()).matrix().transpose();
  const Eigen::MatrixXd sn = ((synth.numerics.rowwise() - mean).array().rowwise() / sd.array()).matrix().transpose();
  const IndexMatrix rc = real.categories.transpose();
  const IndexMatrix sc = synth.categories.transpose();

  std::vector<double> out(synth.rows());
  for (Eigen::Index s = 0; s < sn.cols(); ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rn.cols(); ++r) {
      double d2 = (rn.col(r) - sn.col(s)).squaredNorm();
      d2 += static_cast<double>((rc.col(r).array() != sc.col(s).array()).count());
      best = std::min(best, d2);
    }
    out[static_cast<std::size_t>(s)] = std::sqrt(best);
  }
  return out;
}

double privacy_dcr(const Dataset& real, const Dataset& synth) {
  auto d = closest_record_distances(real, synth);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

bool rows_match(const Dataset& real, std::size_t real_row, const Dataset& synth, std::size_t synth_row) {
  const auto rr = static_cast<Eigen::Index>(real_row);
  const auto sr = static_cast<Eigen::Index>(synth_row);
  if ((real.categories.row(rr).array() != synth.categories.row(sr).array()).any()) return false;
  for (Eigen::Index c = 0; c < real.numerics.cols(); ++c) {
    const double x = real.numerics(rr, c);
    const double s = synth.numerics(sr, c);
    if (x == 0.0) {
      if (std::abs(s) > kSynthesisZeroTolerance) return false;
    } else if (std::abs(s - x) > kSynthesisRelativeTolerance * std::abs(x)) {
      return false;
    }
  }
  return true;
}

double synthesis_score(const Dataset& real, const Dataset& synth) {
  require_same_schema(real, synth);
  if (synth.empty()) throw Error(ErrorKind::EmptyDataset, "no synthetic rows");
  // bucket real rows by their categorical cells; only same-bucket rows can match
  std::map<std::vector<std::int32_t>, std::vector<std::size_t>> buckets;
  auto key = [](const Dataset& d, std::size_t r) {
    const auto row = d.categories.row(static_cast<Eigen::Index>(r));
    return std::vector<std::int32_t>(row.begin(), row.end());
  };
  for (std::size_t r = 0; r < real.rows(); ++r) buckets[key(real, r)].push_back(r);

  std::size_t matched = 0;
  for (std::size_t s = 0; s < synth.rows(); ++s) {
    const auto it = buckets.find(key(synth, s));
    if (it == buckets.end()) continue;
    for (std::size_t r : it->second) {
      if (rows_match(real, r, synth, s)) {
        ++matched;
        break;
      }
    }
  }
  return 1.0 - static_cast<double>(matched) / static_cast<double>(synth.rows());
}

}  // namespace tabsynth
