#include "tabsynth/diffusion.hpp"

namespace tabsynth {

NoiseSchedule NoiseSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  if (steps < 1) throw Error(ErrorKind::InvalidRange, "schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw Error(ErrorKind::InvalidRange, "need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.beta_start_ = beta_start;
  s.beta_end_ = beta_end;
  s.beta_.resize(steps);
  s.alpha_.resize(steps);
  s.alpha_bar_.resize(steps);
  s.beta_hat_.resize(steps);
  double product = 1.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    s.beta_[i] = beta_start + frac * (beta_end - beta_start);
    s.alpha_[i] = 1.0 - s.beta_[i];
    product *= s.alpha_[i];
    s.alpha_bar_[i] = product;
    s.beta_hat_[i] = 1.0 - product;
  }
  return s;
}

}  // namespace tabsynth
