#include "tabsynth/commands.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tabsynth/checkpoint.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

}  // namespace

TabularModel cmd_train(const TrainOptions& options, std::ostream& log) {
  options.config.validate();
  const TableSchema schema = read_schema(options.schema);
  const Dataset data = load_csv(options.data, schema);
  const auto [train, test] = split(data, options.train_fraction, options.config.seed);
  auto model = train_model(train, options.config, [&](const EpochLog& e) {
    nlohmann::ordered_json line{{"epoch", e.epoch}, {"loss", e.loss}, {"lr", e.learning_rate}};
    log << line.dump() << '\n' << std::flush;
  });
  save_checkpoint(model, options.out);
  return model;
}

Dataset cmd_sample(const SampleOptions& options) {
  const TabularModel model = load_checkpoint(options.model);
  std::optional<std::int32_t> label;
  if (options.label) {
    const auto label_column = model.schema.label_index();
    if (!label_column) throw Error(ErrorKind::UnknownLabel, "model has no label column; cannot condition on '" + *options.label + "'");
    const auto& vocab = model.schema.column(*label_column).vocabulary;
    const auto it = std::find(vocab.begin(), vocab.end(), *options.label);
    if (it == vocab.end()) throw Error(ErrorKind::UnknownLabel, "'" + *options.label + "' is not in the label vocabulary");
    label = static_cast<std::int32_t>(it - vocab.begin());
  }
  Dataset out = sample(model, options.n, label, options.seed);
  write_csv(out, options.out);
  return out;
}

std::string cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  if (options.repeats < 1) throw Error(ErrorKind::InvalidArgument, "--repeats must be at least 1");
  const TableSchema schema = read_schema(options.schema);
  const Dataset real = load_csv(options.real, schema);
  const Dataset synth = load_csv(options.synth, schema);

  std::vector<EvaluationReport> runs;
  for (std::size_t i = 0; i < options.repeats; ++i) {
    const std::uint64_t seed = options.seed + i;
    const auto [train, test] = split(real, options.train_fraction, seed);
    runs.push_back(evaluate_all(train, test, synth, seed, options.label_column));
  }

  std::string json;
  if (options.repeats == 1) {
    out << render_table(runs);
    json = report_to_json(runs.front());
  } else {
    const auto summary = summarize(std::move(runs));
    out << render_table(summary);
    json = report_to_json(summary);
  }
  if (options.report) write_text(*options.report, json);
  return json;
}

}  // namespace tabsynth
