#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

enum class Activation { ReLU, SiLU };

inline std::string_view to_string(Activation a) { return a == Activation::ReLU ? "relu" : "silu"; }

inline Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "silu") return Activation::SiLU;
  throw Error(ErrorKind::InvalidArgument, "unknown activation '" + std::string(name) + "'");
}

// Sinusoidal step embedding: entries (2i, 2i+1) hold sin(t w_i), cos(t w_i)
// with w_i = 10000^(-2i/dim).
inline Vector<double> time_embedding(std::int64_t t, std::size_t dim) {
  if (dim % 2 != 0) throw Error(ErrorKind::OddDimension, "time embedding width must be even");
  if (t < 0) throw Error(ErrorKind::StepOutOfRange, "negative diffusion step");
  Vector<double> out(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
    const double angle = static_cast<double>(t) * freq;
    out(static_cast<Eigen::Index>(2 * i)) = std::sin(angle);
    out(static_cast<Eigen::Index>(2 * i + 1)) = std::cos(angle);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> time_embedding_batch(std::span<const int> steps, std::size_t dim) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(steps.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < steps.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = time_embedding(steps[r], dim).transpose().template cast<Scalar>();
  return out;
}

struct DenoiserConfig {
  std::size_t input_width = 0;      // M
  std::size_t hidden_width = 1024;  // H
  std::size_t hidden_layers = 6;    // L
  std::size_t num_classes = 1;      // K
  std::size_t time_embed_dim = 128;
  Activation activation = Activation::ReLU;

  friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

// Weights are stored out x in; biases as out x 1 columns.
template <typename Scalar>
struct DenoiserParameters {
  Matrix<Scalar> input_weight, input_bias;
  Matrix<Scalar> time_weight, time_bias;
  Matrix<Scalar> label_table;  // K x H
  std::vector<Matrix<Scalar>> hidden_weight, hidden_bias;
  Matrix<Scalar> output_weight, output_bias;

  static DenoiserParameters zeros(const DenoiserConfig& cfg) {
    const auto m = static_cast<Eigen::Index>(cfg.input_width);
    const auto h = static_cast<Eigen::Index>(cfg.hidden_width);
    const auto te = static_cast<Eigen::Index>(cfg.time_embed_dim);
    DenoiserParameters p;
    p.input_weight = Matrix<Scalar>::Zero(h, m);
    p.input_bias = Matrix<Scalar>::Zero(h, 1);
    p.time_weight = Matrix<Scalar>::Zero(h, te);
    p.time_bias = Matrix<Scalar>::Zero(h, 1);
    p.label_table = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(cfg.num_classes), h);
    for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
      p.hidden_weight.push_back(Matrix<Scalar>::Zero(h, h));
      p.hidden_bias.push_back(Matrix<Scalar>::Zero(h, 1));
    }
    p.output_weight = Matrix<Scalar>::Zero(m, h);
    p.output_bias = Matrix<Scalar>::Zero(m, 1);
    return p;
  }

  // Visits every tensor in a fixed order with a stable name.
  template <typename F>
  void for_each(F&& f) {
    f(std::string("input.weight"), input_weight);
    f(std::string("input.bias"), input_bias);
    f(std::string("time.weight"), time_weight);
    f(std::string("time.bias"), time_bias);
    f(std::string("label.table"), label_table);
    for (std::size_t l = 0; l < hidden_weight.size(); ++l) {
      f("hidden." + std::to_string(l) + ".weight", hidden_weight[l]);
      f("hidden." + std::to_string(l) + ".bias", hidden_bias[l]);
    }
    f(std::string("output.weight"), output_weight);
    f(std::string("output.bias"), output_bias);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<DenoiserParameters*>(this)->for_each(
        [&](const std::string& name, Matrix<Scalar>& m) { f(name, static_cast<const Matrix<Scalar>&>(m)); });
  }

  std::size_t count() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Matrix<Scalar>& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](const std::string&, const Matrix<Scalar>& m) { ok = ok && m.allFinite(); });
    return ok;
  }
};

template <typename Scalar>
struct BackwardResult {
  double loss = 0.0;
  DenoiserParameters<Scalar> grads;
  Matrix<Scalar> input_grad;  // dLoss/dx_t, B x M
};

// Noise-prediction network eps_theta(x_t, t, label):
//   h_0 = W_in x_t + b_in + W_time temb(t) + b_time + label_table[label]
//   h_l = act(W_l h_{l-1} + b_l),  l = 1..L
//   eps = W_out h_L + b_out
template <typename Scalar>
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(DenoiserConfig config, DenoiserParameters<Scalar> params)
      : config_(config), params_(std::move(params)) {}

  // Glorot-uniform weights, zero biases, label table ~ 0.02 N(0, 1).
  static Denoiser init(const DenoiserConfig& cfg, std::uint64_t seed) {
    if (cfg.input_width < 1 || cfg.hidden_width < 1 || cfg.hidden_layers < 1 || cfg.num_classes < 1)
      throw Error(ErrorKind::InvalidArgument, "network dimensions must be positive");
    if (cfg.time_embed_dim % 2 != 0) throw Error(ErrorKind::OddDimension, "time embedding width must be even");
    auto p = DenoiserParameters<Scalar>::zeros(cfg);
    std::mt19937_64 rng(seed);
    auto glorot = [&](Matrix<Scalar>& w) {
      const double bound = glorot_bound(static_cast<std::size_t>(w.cols()), static_cast<std::size_t>(w.rows()));
      std::uniform_real_distribution<double> uniform(-bound, bound);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(uniform(rng));
    };
    glorot(p.input_weight);
    glorot(p.time_weight);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < p.label_table.cols(); ++c)
      for (Eigen::Index r = 0; r < p.label_table.rows(); ++r)
        p.label_table(r, c) = static_cast<Scalar>(0.02 * normal(rng));
    for (auto& w : p.hidden_weight) glorot(w);
    glorot(p.output_weight);
    return Denoiser(cfg, std::move(p));
  }

  static double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  }

  const DenoiserConfig& config() const { return config_; }
  const DenoiserParameters<Scalar>& params() const { return params_; }
  DenoiserParameters<Scalar>& params() { return params_; }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, std::span<const int> steps, const IndexVector& labels) const {
    check_shapes(x, steps, labels);
    Matrix<Scalar> h = aggregate(x, time_embedding_batch<Scalar>(steps, config_.time_embed_dim), labels);
    for (std::size_t l = 0; l < params_.hidden_weight.size(); ++l) {
      Matrix<Scalar> z = h * params_.hidden_weight[l].transpose();
      z.rowwise() += params_.hidden_bias[l].col(0).transpose();
      h = activate(z);
    }
    Matrix<Scalar> out = h * params_.output_weight.transpose();
    out.rowwise() += params_.output_bias.col(0).transpose();
    return out;
  }

  // Loss = mean over rows and columns of (eps_theta - target)^2, with exact
  // gradients for every parameter and for the input x_t.
  BackwardResult<Scalar> backward(const Matrix<Scalar>& x, std::span<const int> steps, const IndexVector& labels,
                                  const Matrix<Scalar>& target) const {
    check_shapes(x, steps, labels);
    if (target.rows() != x.rows() || target.cols() != x.cols())
      throw Error(ErrorKind::InvalidArgument, "target shape differs from input shape");

    const Matrix<Scalar> temb = time_embedding_batch<Scalar>(steps, config_.time_embed_dim);
    const std::size_t n_layers = params_.hidden_weight.size();
    std::vector<Matrix<Scalar>> acts;  // acts[0] = h_0, acts[l] = h_l
    std::vector<Matrix<Scalar>> pre;   // pre[l-1] = z_l
    acts.reserve(n_layers + 1);
    pre.reserve(n_layers);
    acts.push_back(aggregate(x, temb, labels));
    for (std::size_t l = 0; l < n_layers; ++l) {
      Matrix<Scalar> z = acts.back() * params_.hidden_weight[l].transpose();
      z.rowwise() += params_.hidden_bias[l].col(0).transpose();
      acts.push_back(activate(z));
      pre.push_back(std::move(z));
    }
    Matrix<Scalar> out = acts.back() * params_.output_weight.transpose();
    out.rowwise() += params_.output_bias.col(0).transpose();

    const Matrix<Scalar> diff = out - target;
    const double count = static_cast<double>(diff.size());
    const double loss = diff.template cast<double>().squaredNorm() / count;
    if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "loss is not finite");

    BackwardResult<Scalar> result;
    result.loss = loss;
    auto& g = result.grads;
    g.hidden_weight.resize(n_layers);
    g.hidden_bias.resize(n_layers);

    Matrix<Scalar> delta = diff * static_cast<Scalar>(2.0 / count);
    g.output_weight = delta.transpose() * acts.back();
    g.output_bias = delta.colwise().sum().transpose();
    Matrix<Scalar> upstream = delta * params_.output_weight;
    for (std::size_t l = n_layers; l-- > 0;) {
      delta = upstream.cwiseProduct(activate_derivative(pre[l]));
      g.hidden_weight[l] = delta.transpose() * acts[l];
      g.hidden_bias[l] = delta.colwise().sum().transpose();
      upstream = delta * params_.hidden_weight[l];
    }
    // upstream is now dLoss/dh_0
    g.input_weight = upstream.transpose() * x;
    g.input_bias = upstream.colwise().sum().transpose();
    g.time_weight = upstream.transpose() * temb;
    g.time_bias = g.input_bias;
    g.label_table = Matrix<Scalar>::Zero(params_.label_table.rows(), params_.label_table.cols());
    for (Eigen::Index r = 0; r < upstream.rows(); ++r) g.label_table.row(labels(r)) += upstream.row(r);
    result.input_grad = upstream * params_.input_weight;
    return result;
  }

  template <typename Other>
  Denoiser<Other> cast() const {
    DenoiserParameters<Other> p = DenoiserParameters<Other>::zeros(config_);
    auto dst = collect(p);
    std::size_t i = 0;
    params_.for_each([&](const std::string&, const Matrix<Scalar>& m) { *dst[i++] = m.template cast<Other>(); });
    return Denoiser<Other>(config_, std::move(p));
  }

 private:
  template <typename Other>
  static std::vector<Matrix<Other>*> collect(DenoiserParameters<Other>& p) {
    std::vector<Matrix<Other>*> out;
    p.for_each([&](const std::string&, Matrix<Other>& m) { out.push_back(&m); });
    return out;
  }

  void check_shapes(const Matrix<Scalar>& x, std::span<const int> steps, const IndexVector& labels) const {
    if (x.cols() != static_cast<Eigen::Index>(config_.input_width))
      throw Error(ErrorKind::InvalidArgument, "input width differs from the network's");
    if (static_cast<Eigen::Index>(steps.size()) != x.rows() || labels.size() != x.rows())
      throw Error(ErrorKind::InvalidArgument, "steps/labels must have one entry per row");
    for (Eigen::Index r = 0; r < labels.size(); ++r)
      if (labels(r) < 0 || labels(r) >= static_cast<std::int32_t>(config_.num_classes))
        throw Error(ErrorKind::UnknownLabel, "label index out of range");
  }

  Matrix<Scalar> aggregate(const Matrix<Scalar>& x, const Matrix<Scalar>& temb, const IndexVector& labels) const {
    Matrix<Scalar> h = x * params_.input_weight.transpose();
    h.noalias() += temb * params_.time_weight.transpose();
    h.rowwise() += (params_.input_bias.col(0) + params_.time_bias.col(0)).transpose();
    for (Eigen::Index r = 0; r < h.rows(); ++r) h.row(r) += params_.label_table.row(labels(r));
    return h;
  }

  Matrix<Scalar> activate(const Matrix<Scalar>& z) const {
    if (config_.activation == Activation::ReLU) return z.cwiseMax(Scalar(0));
    return (z.array() / (Scalar(1) + (-z.array()).exp())).matrix();
  }

  // relu'(0) = 0
  Matrix<Scalar> activate_derivative(const Matrix<Scalar>& z) const {
    if (config_.activation == Activation::ReLU) return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
    const auto s = (Scalar(1) / (Scalar(1) + (-z.array()).exp()));
    return (s * (Scalar(1) + z.array() * (Scalar(1) - s))).matrix();
  }

  DenoiserConfig config_;
  DenoiserParameters<Scalar> params_;
};

// base_lr * 0.5 * (1 + cos(pi * epoch / total_epochs))
inline double cosine_learning_rate(double base_lr, std::size_t epoch, std::size_t total_epochs) {
  if (total_epochs == 0) return base_lr;
  const double progress = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t total_epochs = 3000;
};

// Adam with bias correction under a cosine-decayed rate. Moment buffers are
// addressed by slot and allocated on first use with the parameter's shape.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return step_; }
  double current_rate() const { return rate_; }

  // Advances the step counter; returns the effective learning rate.
  double begin_step(std::size_t epoch) {
    ++step_;
    rate_ = cosine_learning_rate(config_.learning_rate, epoch, config_.total_epochs);
    return rate_;
  }

  void update(std::size_t slot, Matrix<Scalar>& param, const Matrix<Scalar>& grad) {
    auto& m = moments(slot, param);
    const auto [c1, c2] = corrections();
    const auto b1 = static_cast<Scalar>(config_.beta1);
    const auto b2 = static_cast<Scalar>(config_.beta2);
    m.first = b1 * m.first + (Scalar(1) - b1) * grad;
    m.second = b2 * m.second + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    param.array() -= static_cast<Scalar>(rate_) * (m.first.array() / static_cast<Scalar>(c1)) /
                     ((m.second.array() / static_cast<Scalar>(c2)).sqrt() + static_cast<Scalar>(config_.epsilon));
  }

  // Lazy variant: only the listed rows of the parameter and its moments move.
  // `rate_scale` multiplies the current rate for this tensor alone.
  void update_rows(std::size_t slot, Matrix<Scalar>& param, const Matrix<Scalar>& grad,
                   std::span<const Eigen::Index> rows, double rate_scale = 1.0) {
    auto& m = moments(slot, param);
    const auto [c1, c2] = corrections();
    const auto b1 = static_cast<Scalar>(config_.beta1);
    const auto b2 = static_cast<Scalar>(config_.beta2);
    for (const auto r : rows) {
      m.first.row(r) = b1 * m.first.row(r) + (Scalar(1) - b1) * grad.row(r);
      m.second.row(r) = b2 * m.second.row(r) + (Scalar(1) - b2) * grad.row(r).cwiseProduct(grad.row(r));
      param.row(r).array() -=
          static_cast<Scalar>(rate_ * rate_scale) * (m.first.row(r).array() / static_cast<Scalar>(c1)) /
          ((m.second.row(r).array() / static_cast<Scalar>(c2)).sqrt() + static_cast<Scalar>(config_.epsilon));
    }
  }

  // Dense update of every network tensor, slots 0..n-1 in for_each order.
  void step(DenoiserParameters<Scalar>& params, const DenoiserParameters<Scalar>& grads, std::size_t epoch) {
    begin_step(epoch);
    update_network(params, grads);
  }

  void update_network(DenoiserParameters<Scalar>& params, const DenoiserParameters<Scalar>& grads) {
    std::vector<const Matrix<Scalar>*> g;
    grads.for_each([&](const std::string&, const Matrix<Scalar>& m) { g.push_back(&m); });
    std::size_t slot = 0;
    params.for_each([&](const std::string&, Matrix<Scalar>& p) {
      update(slot, p, *g[slot]);
      ++slot;
    });
  }

 private:
  struct Moments {
    Matrix<Scalar> first, second;
  };

  Moments& moments(std::size_t slot, const Matrix<Scalar>& param) {
    if (slot >= moments_.size()) moments_.resize(slot + 1);
    auto& m = moments_[slot];
    if (m.first.size() == 0) {
      m.first = Matrix<Scalar>::Zero(param.rows(), param.cols());
      m.second = Matrix<Scalar>::Zero(param.rows(), param.cols());
    }
    return m;
  }

  std::pair<double, double> corrections() const {
    const double t = static_cast<double>(step_);
    return {1.0 - std::pow(config_.beta1, t), 1.0 - std::pow(config_.beta2, t)};
  }

  AdamConfig config_;
  std::uint64_t step_ = 0;
  double rate_ = 0.0;
  std::vector<Moments> moments_;
};

}  // namespace tabsynth
