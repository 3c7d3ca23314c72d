#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "tabsynth/model.hpp"
#include "tabsynth/report.hpp"

namespace tabsynth {

inline constexpr double kDefaultTrainFraction = 0.7;

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::filesystem::path out;
  TrainConfig config;
  double train_fraction = kDefaultTrainFraction;
};

// Splits the data under config.seed, trains on the first partition and writes
// the checkpoint. One JSON line per epoch goes to `log`.
TabularModel cmd_train(const TrainOptions& options, std::ostream& log);

struct SampleOptions {
  std::filesystem::path model;
  std::filesystem::path out;
  std::size_t n = 0;
  std::optional<std::string> label;  // vocabulary value of the label column
  std::uint64_t seed = 0;
};

Dataset cmd_sample(const SampleOptions& options);

struct EvaluateOptions {
  std::filesystem::path real;
  std::filesystem::path synth;
  std::filesystem::path schema;
  std::optional<std::filesystem::path> report;
  std::optional<std::string> label_column;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;  // seeds seed, seed + 1, ...
  double train_fraction = kDefaultTrainFraction;
};

// Returns the report JSON; the text table goes to `out`.
std::string cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

}  // namespace tabsynth
