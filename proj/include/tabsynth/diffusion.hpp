#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tabsynth/embedding.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/network.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

// Linear beta schedule over steps t = 1..T. alpha_bar(t) is the product of
// alpha(1..t) and beta_hat(t) = 1 - alpha_bar(t).
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  static NoiseSchedule linear(std::size_t steps, double beta_start = kDefaultBetaStart,
                              double beta_end = kDefaultBetaEnd);

  std::size_t steps() const { return beta_.size(); }
  double beta_start() const { return beta_start_; }
  double beta_end() const { return beta_end_; }

  double beta(std::size_t t) const { return beta_[index(t)]; }
  double alpha(std::size_t t) const { return alpha_[index(t)]; }
  double alpha_bar(std::size_t t) const { return alpha_bar_[index(t)]; }
  double beta_hat(std::size_t t) const { return beta_hat_[index(t)]; }

 private:
  std::size_t index(std::size_t t) const {
    if (t < 1 || t > beta_.size()) throw Error(ErrorKind::StepOutOfRange, "diffusion step out of [1, T]");
    return t - 1;
  }

  double beta_start_ = kDefaultBetaStart;
  double beta_end_ = kDefaultBetaEnd;
  std::vector<double> beta_, alpha_, alpha_bar_, beta_hat_;
};

// splitmix64 finalizer; derives independent stream seeds from (seed, counter).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename Scalar>
Matrix<Scalar> standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = static_cast<Scalar>(normal(rng));
  return out;
}

template <typename Scalar>
struct ForwardSample {
  Matrix<Scalar> noisy;  // x_t
  Matrix<Scalar> noise;  // eps, the regression target
};

// x_t = sqrt(alpha_bar_t) x_0 + sqrt(1 - alpha_bar_t) eps, with a step per row.
template <typename Scalar>
ForwardSample<Scalar> corrupt(const NoiseSchedule& schedule, const Matrix<Scalar>& x0, std::span<const int> steps,
                              const Matrix<Scalar>& noise) {
  if (static_cast<Eigen::Index>(steps.size()) != x0.rows())
    throw Error(ErrorKind::InvalidArgument, "one diffusion step per row required");
  ForwardSample<Scalar> out{Matrix<Scalar>(x0.rows(), x0.cols()), noise};
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const double ab = schedule.alpha_bar(static_cast<std::size_t>(steps[static_cast<std::size_t>(r)]));
    out.noisy.row(r) = static_cast<Scalar>(std::sqrt(ab)) * x0.row(r) + static_cast<Scalar>(std::sqrt(1.0 - ab)) * noise.row(r);
  }
  return out;
}

template <typename Scalar>
ForwardSample<Scalar> forward_sample(const NoiseSchedule& schedule, const Matrix<Scalar>& x0,
                                     std::span<const int> steps, std::uint64_t seed) {
  for (int t : steps)
    if (t < 1 || static_cast<std::size_t>(t) > schedule.steps())
      throw Error(ErrorKind::StepOutOfRange, "diffusion step out of [1, T]");
  std::mt19937_64 rng(seed);
  return corrupt(schedule, x0, steps, standard_normal<Scalar>(x0.rows(), x0.cols(), rng));
}

// One reverse transition: mu = (x_t - beta_t / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t),
// then x_{t-1} = mu + sqrt(beta_t) z.
template <typename Scalar>
Matrix<Scalar> reverse_step(const NoiseSchedule& schedule, std::size_t t, const Matrix<Scalar>& xt,
                            const Matrix<Scalar>& eps_hat, const Matrix<Scalar>* z) {
  const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
  Matrix<Scalar> mu = (xt - static_cast<Scalar>(coef) * eps_hat) / static_cast<Scalar>(std::sqrt(schedule.alpha(t)));
  if (z) mu += static_cast<Scalar>(std::sqrt(schedule.beta(t))) * (*z);
  return mu;
}

template <typename Scalar>
struct DenoisingGradients {
  BackwardResult<Scalar> network;
  Matrix<Scalar> embedding;                  // C x D, zero outside referenced rows
  std::vector<Eigen::Index> referenced_rows;  // ascending
};

// Loss and gradients of the denoising objective for fixed steps and noise,
// with the chain rule carried through x_t = sqrt(alpha_bar) E[c] + ... into
// the embedding rows.
template <typename Scalar>
DenoisingGradients<Scalar> denoising_gradients(const Denoiser<Scalar>& net, const Embeddings<Scalar>& embeddings,
                                               const NoiseSchedule& schedule, const PreparedRows& batch,
                                               std::span<const int> steps, const Matrix<Scalar>& noise) {
  const Matrix<Scalar> x0 = encode_rows(batch.categories, batch.scaled, embeddings);
  const auto sample = corrupt(schedule, x0, steps, noise);
  DenoisingGradients<Scalar> out;
  out.network = net.backward(sample.noisy, steps, batch.labels, noise);

  const auto dim = static_cast<Eigen::Index>(embeddings.dim());
  out.embedding = Matrix<Scalar>::Zero(embeddings.weights.rows(), embeddings.weights.cols());
  std::vector<char> touched(static_cast<std::size_t>(embeddings.weights.rows()), 0);
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const auto scale =
        static_cast<Scalar>(std::sqrt(schedule.alpha_bar(static_cast<std::size_t>(steps[static_cast<std::size_t>(r)]))));
    for (Eigen::Index j = 0; j < batch.categories.cols(); ++j) {
      const auto row =
          static_cast<Eigen::Index>(embeddings.offset(static_cast<std::size_t>(j))) + batch.categories(r, j);
      out.embedding.row(row) += scale * out.network.input_grad.row(r).segment(j * dim, dim);
      touched[static_cast<std::size_t>(row)] = 1;
    }
  }
  for (std::size_t i = 0; i < touched.size(); ++i)
    if (touched[i]) out.referenced_rows.push_back(static_cast<Eigen::Index>(i));
  return out;
}

struct StepOptions {
  std::size_t epoch = 0;
  bool freeze_embeddings = false;
  double embed_lr_scale = 1.0;
};

// Slot of the embedding matrix inside the optimizer, after the network tensors.
template <typename Scalar>
std::size_t embedding_slot(const Denoiser<Scalar>& net) {
  return 7 + 2 * net.config().hidden_layers;
}

// Encode -> per-row t ~ U{1..T} -> corrupt -> backprop -> Adam on the network
// and on the embedding rows the batch references. Returns the batch loss.
template <typename Scalar>
double training_step(Denoiser<Scalar>& net, Embeddings<Scalar>& embeddings, const NoiseSchedule& schedule,
                     const PreparedRows& batch, Adam<Scalar>& optimizer, const StepOptions& options,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> step_dist(1, static_cast<int>(schedule.steps()));
  std::vector<int> steps(batch.rows());
  for (auto& t : steps) t = step_dist(rng);
  const Matrix<Scalar> noise =
      standard_normal<Scalar>(static_cast<Eigen::Index>(batch.rows()), static_cast<Eigen::Index>(net.config().input_width), rng);

  auto grads = denoising_gradients(net, embeddings, schedule, batch, steps, noise);
  optimizer.begin_step(options.epoch);
  optimizer.update_network(net.params(), grads.network.grads);
  if (!options.freeze_embeddings && embeddings.weights.size() > 0) {
    optimizer.update_rows(embedding_slot(net), embeddings.weights, grads.embedding, grads.referenced_rows,
                          options.embed_lr_scale);
    embeddings.normalize_columns();
  }
  return grads.network.loss;
}

inline constexpr Eigen::Index kSampleChunk = 4096;

// Ancestral sampling from x_T ~ N(0, I) down to x_0; no noise on the final step.
template <typename Scalar>
Matrix<Scalar> reverse_diffusion(const Denoiser<Scalar>& net, const NoiseSchedule& schedule, const IndexVector& labels,
                                 std::uint64_t seed) {
  const auto n = labels.size();
  const auto width = static_cast<Eigen::Index>(net.config().input_width);
  std::mt19937_64 rng(seed);
  Matrix<Scalar> x = standard_normal<Scalar>(n, width, rng);
  if (n == 0) return x;
  std::vector<int> steps;
  for (std::size_t t = schedule.steps(); t >= 1; --t) {
    Matrix<Scalar> eps_hat(n, width);
    for (Eigen::Index begin = 0; begin < n; begin += kSampleChunk) {
      const auto len = std::min(kSampleChunk, n - begin);
      steps.assign(static_cast<std::size_t>(len), static_cast<int>(t));
      eps_hat.middleRows(begin, len) = net.forward(x.middleRows(begin, len), steps, labels.segment(begin, len));
    }
    if (t > 1) {
      const Matrix<Scalar> z = standard_normal<Scalar>(n, width, rng);
      x = reverse_step<Scalar>(schedule, t, x, eps_hat, &z);
    } else {
      x = reverse_step<Scalar>(schedule, t, x, eps_hat, nullptr);
    }
  }
  return x;
}

}  // namespace tabsynth
