#include "tabsynth/model.hpp"

#include <limits>
#include <numeric>

namespace tabsynth {

namespace {

PreparedRows gather(const PreparedRows& all, std::span<const std::size_t> rows) {
  PreparedRows out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.categories.resize(n, all.categories.cols());
  out.scaled.resize(n, all.scaled.cols());
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    out.categories.row(i) = all.categories.row(src);
    out.scaled.row(i) = all.scaled.row(src);
    out.labels(i) = all.labels(src);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || steps < 1 || embed_dim < 1 || hidden < 1 || layers < 1 || quantiles < 2 ||
      !(learning_rate > 0.0) || !(embed_lr_scale >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "training configuration values must be positive");
  if (time_embed_dim % 2 != 0) throw Error(ErrorKind::OddDimension, "time embedding width must be even");
}

TabularModel train_model(const Dataset& train, const TrainConfig& config,
                         const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "training data has no rows");

  TabularModel model;
  model.schema = train.schema;
  model.config = config;
  model.scaler = NumericScaler::fit(train, config.scaler, config.quantiles);
  model.embeddings = Embeddings<float>::init(train.schema, config.embed_dim, mix_seed(config.seed, kEmbeddingStream));
  model.schedule = NoiseSchedule::linear(config.steps, config.beta_start, config.beta_end);

  DenoiserConfig net_cfg;
  net_cfg.input_width = encoded_width(train.schema, config.embed_dim);
  net_cfg.hidden_width = config.hidden;
  net_cfg.hidden_layers = config.layers;
  net_cfg.num_classes = train.schema.num_classes();
  net_cfg.time_embed_dim = config.time_embed_dim;
  net_cfg.activation = config.activation;
  model.network = Denoiser<float>::init(net_cfg, mix_seed(config.seed, kNetworkStream));

  const PreparedRows prepared = prepare_rows(train, model.scaler);
  model.label_prior.assign(net_cfg.num_classes, 0.0);
  for (Eigen::Index r = 0; r < prepared.labels.size(); ++r) model.label_prior[static_cast<std::size_t>(prepared.labels(r))] += 1.0;
  for (auto& p : model.label_prior) p /= static_cast<double>(train.rows());

  Adam<float> optimizer(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8, config.epochs});
  std::mt19937_64 shuffle_rng(mix_seed(config.seed, kShuffleStream));
  std::vector<std::size_t> order(train.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::uint64_t step_seed = mix_seed(config.seed, kStepStream);
  std::uint64_t global_step = 0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - begin);
      const auto batch = gather(prepared, std::span<const std::size_t>(order).subspan(begin, len));
      const double loss = training_step(model.network, model.embeddings, model.schedule, batch, optimizer,
                                        StepOptions{epoch, config.freeze_embeddings, config.embed_lr_scale},
                                        mix_seed(step_seed, global_step++));
      total += loss * static_cast<double>(len);
    }
    const double epoch_loss = total / static_cast<double>(order.size());
    model.epochs_run = epoch + 1;
    model.final_loss = epoch_loss;
    if (!model.network.params().all_finite())
      throw Error(ErrorKind::NonFiniteLoss, "parameters diverged at epoch " + std::to_string(epoch + 1));
    if (on_epoch) on_epoch(EpochLog{epoch + 1, epoch_loss, optimizer.current_rate()});

    if (epoch_loss < best) {
      best = epoch_loss;
      best_epoch = epoch;
    } else if (config.patience > 0 && epoch - best_epoch >= config.patience) {
      break;
    }
  }
  return model;
}

IndexVector draw_labels(const std::vector<double>& prior, std::size_t n, std::uint64_t seed) {
  IndexVector labels(static_cast<Eigen::Index>(n));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::int32_t> dist(prior.begin(), prior.end());
  for (auto& l : labels) l = dist(rng);
  return labels;
}

Dataset sample(const TabularModel& model, const IndexVector& labels, std::uint64_t seed) {
  const Matrix<float> x0 = reverse_diffusion(model.network, model.schedule, labels, mix_seed(seed, kReverseStream));
  return decode(x0, model.schema, model.embeddings, model.scaler);
}

Dataset sample(const TabularModel& model, std::size_t n, std::optional<std::int32_t> label, std::uint64_t seed) {
  if (label) {
    if (*label < 0 || static_cast<std::size_t>(*label) >= model.label_prior.size())
      throw Error(ErrorKind::UnknownLabel, "label index out of range");
    return sample(model, IndexVector::Constant(static_cast<Eigen::Index>(n), *label), seed);
  }
  return sample(model, draw_labels(model.label_prior, n, mix_seed(seed, kLabelStream)), seed);
}

}  // namespace tabsynth
