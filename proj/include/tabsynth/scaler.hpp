#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

enum class ScalerMethod { Standard, YeoJohnson, Quantile };

std::string_view to_string(ScalerMethod method);
ScalerMethod parse_scaler_method(std::string_view name);  // "standard" | "yeo-johnson" | "quantile"

inline constexpr std::size_t kDefaultQuantiles = 1000;
inline constexpr double kQuantileClamp = 1e-7;
inline constexpr double kYeoJohnsonLambdaMin = -2.0;
inline constexpr double kYeoJohnsonLambdaMax = 2.0;
inline constexpr double kYeoJohnsonLambdaStep = 0.01;

// Yeo-Johnson power transform and its inverse at a fixed lambda.
double yeo_johnson(double x, double lambda);
double yeo_johnson_inverse(double y, double lambda);
double yeo_johnson_derivative(double x, double lambda);

// Fitted state for one numeric column. Which fields are meaningful depends on
// the method: Standard uses mean/std; YeoJohnson uses lambda, mean/std of the
// transformed column and the training range [min, max]; Quantile uses the
// reference quantiles.
struct ColumnScaler {
  double mean = 0.0;
  double std = 1.0;
  double lambda = 1.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> quantiles;
};

class NumericScaler {
 public:
  NumericScaler() = default;
  NumericScaler(ScalerMethod method, std::vector<ColumnScaler> columns)
      : method_(method), columns_(std::move(columns)) {}

  // Fits one ColumnScaler per numeric column of `train` (schema order).
  // Throws ConstantColumn naming the first constant column.
  static NumericScaler fit(const Dataset& train, ScalerMethod method,
                           std::size_t quantile_count = kDefaultQuantiles);
  static ColumnScaler fit_column(std::span<const double> values, ScalerMethod method,
                                 std::size_t quantile_count = kDefaultQuantiles);

  ScalerMethod method() const { return method_; }
  const std::vector<ColumnScaler>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }

  double scale(std::size_t slot, double x) const;
  double unscale(std::size_t slot, double z) const;

  // Column-wise over an R x (#numeric) block.
  Matrix<double> scale(const Matrix<double>& values) const;
  Matrix<double> unscale(const Matrix<double>& scaled) const;

 private:
  ScalerMethod method_ = ScalerMethod::Standard;
  std::vector<ColumnScaler> columns_;
};

}  // namespace tabsynth
