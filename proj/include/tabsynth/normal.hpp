#pragma once

namespace tabsynth {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse of the standard normal CDF for p in (0, 1), Wichura's AS241
// (PPND16), accurate to about 1e-16. Returns -inf/+inf at 0/1.
double normal_quantile(double p);

}  // namespace tabsynth
