#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tabsynth/diffusion.hpp"
#include "tabsynth/embedding.hpp"
#include "tabsynth/network.hpp"
#include "tabsynth/scaler.hpp"
#include "tabsynth/schema.hpp"

namespace tabsynth {

// Counters for mix_seed: each random consumer derives its own stream from the run seed.
inline constexpr std::uint64_t kEmbeddingStream = 1;
inline constexpr std::uint64_t kNetworkStream = 2;
inline constexpr std::uint64_t kShuffleStream = 3;
inline constexpr std::uint64_t kStepStream = 4;
inline constexpr std::uint64_t kLabelStream = 5;
inline constexpr std::uint64_t kReverseStream = 6;

struct TrainConfig {
  std::size_t epochs = 3000;
  std::size_t batch_size = 512;
  std::size_t steps = 500;  // diffusion steps T
  std::size_t embed_dim = 2;
  std::size_t hidden = 1024;
  std::size_t layers = 6;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  ScalerMethod scaler = ScalerMethod::Standard;
  bool freeze_embeddings = false;
  double embed_lr_scale = 0.1;  // embedding learning rate relative to the network's
  double beta_start = kDefaultBetaStart;
  double beta_end = kDefaultBetaEnd;
  std::size_t quantiles = kDefaultQuantiles;
  std::size_t time_embed_dim = 128;
  Activation activation = Activation::ReLU;
  std::size_t patience = 200;  // epochs without improvement before stopping; 0 disables

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double learning_rate = 0.0;
};

// Everything needed to sample: fitted transforms, trained network, schedule,
// and the training label distribution for unconditional draws.
struct TabularModel {
  TableSchema schema;
  NumericScaler scaler;
  Embeddings<float> embeddings;
  Denoiser<float> network;
  NoiseSchedule schedule;
  std::vector<double> label_prior;
  TrainConfig config;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;
};

// Fits the scaler and embeddings on `train` and runs the training loop.
TabularModel train_model(const Dataset& train, const TrainConfig& config,
                         const std::function<void(const EpochLog&)>& on_epoch = {});

// Class indices drawn i.i.d. from `prior` under seed.
IndexVector draw_labels(const std::vector<double>& prior, std::size_t n, std::uint64_t seed);

// n rows; every row conditioned on `label` when given, else labels follow the training prior.
Dataset sample(const TabularModel& model, std::size_t n, std::optional<std::int32_t> label, std::uint64_t seed);
Dataset sample(const TabularModel& model, const IndexVector& labels, std::uint64_t seed);

}  // namespace tabsynth
