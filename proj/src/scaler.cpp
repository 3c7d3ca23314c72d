#include "tabsynth/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tabsynth/error.hpp"
#include "tabsynth/normal.hpp"

namespace tabsynth {

std::string_view to_string(ScalerMethod method) {
  switch (method) {
    case ScalerMethod::Standard: return "standard";
    case ScalerMethod::YeoJohnson: return "yeo-johnson";
    case ScalerMethod::Quantile: return "quantile";
  }
  return "standard";
}

ScalerMethod parse_scaler_method(std::string_view name) {
  if (name == "standard") return ScalerMethod::Standard;
  if (name == "yeo-johnson") return ScalerMethod::YeoJohnson;
  if (name == "quantile") return ScalerMethod::Quantile;
  throw Error(ErrorKind::InvalidArgument, "unknown scaler '" + std::string(name) + "'");
}

namespace {

constexpr double kLambdaEps = 1e-12;

// Population mean and standard deviation, accumulated in two passes.
std::pair<double, double> moments(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double yeo_johnson_log_likelihood(std::span<const double> values, double lambda) {
  std::vector<double> transformed(values.size());
  double log_jacobian = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    transformed[i] = yeo_johnson(values[i], lambda);
    log_jacobian += std::copysign(std::log1p(std::abs(values[i])), values[i]);
  }
  const auto [mean, sd] = moments(transformed);
  const double variance = sd * sd;
  if (!(variance > 0.0) || !std::isfinite(variance)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(values.size());
  return -0.5 * n * std::log(variance) + (lambda - 1.0) * log_jacobian;
}

// Linear-interpolated order statistic at probability p (numpy "linear").
double empirical_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile_position(const std::vector<double>& refs, double x) {
  const auto q = static_cast<double>(refs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::lower_bound(refs.begin(), refs.end(), x) - refs.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(refs.begin(), refs.end(), x) - refs.begin());
  if (hi == 0) return 0.0;
  if (lo == refs.size()) return 1.0;
  if (lo < hi) return 0.5 * static_cast<double>(lo + hi - 1) / q;  // x hits a run of equal references
  const std::size_t j = hi - 1;
  return (static_cast<double>(j) + (x - refs[j]) / (refs[j + 1] - refs[j])) / q;
}

double quantile_value(const std::vector<double>& refs, double p) {
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(refs.size() - 1);
  const auto j = std::min(static_cast<std::size_t>(std::floor(pos)), refs.size() - 2);
  return refs[j] + (pos - static_cast<double>(j)) * (refs[j + 1] - refs[j]);
}

}  // namespace

double yeo_johnson(double x, double lambda) {
  if (x >= 0.0) {
    if (std::abs(lambda) < kLambdaEps) return std::log1p(x);
    return (std::pow(x + 1.0, lambda) - 1.0) / lambda;
  }
  if (std::abs(lambda - 2.0) < kLambdaEps) return -std::log1p(-x);
  return -(std::pow(1.0 - x, 2.0 - lambda) - 1.0) / (2.0 - lambda);
}

double yeo_johnson_inverse(double y, double lambda) {
  if (y >= 0.0) {
    if (std::abs(lambda) < kLambdaEps) return std::expm1(y);
    return std::pow(lambda * y + 1.0, 1.0 / lambda) - 1.0;
  }
  if (std::abs(lambda - 2.0) < kLambdaEps) return -std::expm1(-y);
  return 1.0 - std::pow(1.0 - (2.0 - lambda) * y, 1.0 / (2.0 - lambda));
}

double yeo_johnson_derivative(double x, double lambda) {
  if (x >= 0.0) return std::pow(x + 1.0, lambda - 1.0);
  return std::pow(1.0 - x, 1.0 - lambda);
}

ColumnScaler NumericScaler::fit_column(std::span<const double> values, ScalerMethod method,
                                       std::size_t quantile_count) {
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "cannot fit a scaler on zero rows");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw Error(ErrorKind::ConstantColumn, "column is constant");

  ColumnScaler out;
  out.min = *lo;
  out.max = *hi;
  switch (method) {
    case ScalerMethod::Standard: {
      std::tie(out.mean, out.std) = moments(values);
      break;
    }
    case ScalerMethod::YeoJohnson: {
      const int steps = static_cast<int>(std::lround((kYeoJohnsonLambdaMax - kYeoJohnsonLambdaMin) / kYeoJohnsonLambdaStep));
      double best = -std::numeric_limits<double>::infinity();
      double best_lambda = 1.0;
      for (int i = 0; i <= steps; ++i) {
        const double lambda = kYeoJohnsonLambdaMin + static_cast<double>(i) / std::round(1.0 / kYeoJohnsonLambdaStep);
        const double ll = yeo_johnson_log_likelihood(values, lambda);
        if (ll > best) {
          best = ll;
          best_lambda = lambda;
        }
      }
      out.lambda = best_lambda;
      std::vector<double> transformed(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) transformed[i] = yeo_johnson(values[i], best_lambda);
      std::tie(out.mean, out.std) = moments(transformed);
      if (!(out.std > 0.0)) throw Error(ErrorKind::ConstantColumn, "column is constant after transform");
      break;
    }
    case ScalerMethod::Quantile: {
      if (quantile_count < 2) throw Error(ErrorKind::InvalidArgument, "quantile count must be at least 2");
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t q = std::min(quantile_count, sorted.size());
      out.quantiles.resize(q);
      for (std::size_t i = 0; i < q; ++i)
        out.quantiles[i] = empirical_quantile(sorted, static_cast<double>(i) / static_cast<double>(q - 1));
      for (std::size_t i = 1; i < q; ++i) out.quantiles[i] = std::max(out.quantiles[i], out.quantiles[i - 1]);
      break;
    }
  }
  return out;
}

NumericScaler NumericScaler::fit(const Dataset& train, ScalerMethod method, std::size_t quantile_count) {
  std::vector<ColumnScaler> columns;
  const auto& numeric = train.schema.numeric_columns();
  for (std::size_t slot = 0; slot < numeric.size(); ++slot) {
    const auto col = train.numerics.col(static_cast<Eigen::Index>(slot));
    const std::vector<double> values(col.data(), col.data() + col.size());
    try {
      columns.push_back(fit_column(values, method, quantile_count));
    } catch (const Error& e) {
      const auto& name = train.schema.column(numeric[slot]).name;
      if (e.kind() == ErrorKind::ConstantColumn)
        throw Error(ErrorKind::ConstantColumn, "column '" + name + "' is constant");
      throw;
    }
  }
  return NumericScaler(method, std::move(columns));
}

double NumericScaler::scale(std::size_t slot, double x) const {
  const auto& p = columns_.at(slot);
  switch (method_) {
    case ScalerMethod::Standard:
      return (x - p.mean) / p.std;
    case ScalerMethod::YeoJohnson: {
      double y;
      if (x > p.max)
        y = yeo_johnson(p.max, p.lambda) + (x - p.max) * yeo_johnson_derivative(p.max, p.lambda);
      else if (x < p.min)
        y = yeo_johnson(p.min, p.lambda) + (x - p.min) * yeo_johnson_derivative(p.min, p.lambda);
      else
        y = yeo_johnson(x, p.lambda);
      return (y - p.mean) / p.std;
    }
    case ScalerMethod::Quantile: {
      const double u = std::clamp(quantile_position(p.quantiles, x), kQuantileClamp, 1.0 - kQuantileClamp);
      return normal_quantile(u);
    }
  }
  return x;
}

double NumericScaler::unscale(std::size_t slot, double z) const {
  const auto& p = columns_.at(slot);
  switch (method_) {
    case ScalerMethod::Standard:
      return z * p.std + p.mean;
    case ScalerMethod::YeoJohnson: {
      const double y = z * p.std + p.mean;
      // Linear continuation past the training range (mirrors scale()); the
      // power inverse may leave its domain there.
      const double y_max = yeo_johnson(p.max, p.lambda);
      const double y_min = yeo_johnson(p.min, p.lambda);
      if (y > y_max) return p.max + (y - y_max) / yeo_johnson_derivative(p.max, p.lambda);
      if (y < y_min) return p.min + (y - y_min) / yeo_johnson_derivative(p.min, p.lambda);
      return yeo_johnson_inverse(y, p.lambda);
    }
    case ScalerMethod::Quantile: {
      double u = normal_cdf(z);
      // Everything clamped at the extremes by scale() maps back to the extreme reference.
      if (u <= kQuantileClamp * (1.0 + 1e-6)) u = 0.0;
      if (u >= 1.0 - kQuantileClamp * (1.0 + 1e-6)) u = 1.0;
      return quantile_value(p.quantiles, u);
    }
  }
  return z;
}

Matrix<double> NumericScaler::scale(const Matrix<double>& values) const {
  Matrix<double> out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    for (Eigen::Index r = 0; r < values.rows(); ++r) out(r, c) = scale(static_cast<std::size_t>(c), values(r, c));
  return out;
}

Matrix<double> NumericScaler::unscale(const Matrix<double>& scaled) const {
  Matrix<double> out(scaled.rows(), scaled.cols());
  for (Eigen::Index c = 0; c < scaled.cols(); ++c)
    for (Eigen::Index r = 0; r < scaled.rows(); ++r) out(r, c) = unscale(static_cast<std::size_t>(c), scaled(r, c));
  return out;
}

}  // namespace tabsynth
