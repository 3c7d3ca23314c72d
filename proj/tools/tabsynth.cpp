// tabsynth: train, sample and evaluate diffusion models over tabular data.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tabsynth/commands.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/scaler.hpp"

using namespace tabsynth;

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-based synthetic data for mixed categorical/numeric tables"};
  app.require_subcommand(1);

  TrainOptions train;
  std::string scaler = "standard";
  std::string activation = "relu";
  auto* cmd_train_app = app.add_subcommand("train", "Train a model and write a checkpoint");
  cmd_train_app->add_option("--data", train.data, "Training CSV")->required();
  cmd_train_app->add_option("--schema", train.schema, "Schema JSON")->required();
  cmd_train_app->add_option("--out", train.out, "Checkpoint path")->required();
  cmd_train_app->add_option("--epochs", train.config.epochs)->capture_default_str();
  cmd_train_app->add_option("--batch-size", train.config.batch_size)->capture_default_str();
  cmd_train_app->add_option("--steps", train.config.steps, "Diffusion steps T")->capture_default_str();
  cmd_train_app->add_option("--embed-dim", train.config.embed_dim)->capture_default_str();
  cmd_train_app->add_option("--hidden", train.config.hidden)->capture_default_str();
  cmd_train_app->add_option("--layers", train.config.layers)->capture_default_str();
  cmd_train_app->add_option("--lr", train.config.learning_rate)->capture_default_str();
  cmd_train_app->add_option("--scaler", scaler)
      ->check(CLI::IsMember({"standard", "yeo-johnson", "quantile"}))
      ->capture_default_str();
  cmd_train_app->add_flag("--freeze-embeddings", train.config.freeze_embeddings);
  cmd_train_app->add_option("--embed-lr-scale", train.config.embed_lr_scale, "Embedding learning rate relative to --lr")
      ->capture_default_str();
  cmd_train_app->add_option("--seed", train.config.seed)->capture_default_str();
  cmd_train_app->add_option("--time-embed-dim", train.config.time_embed_dim)->capture_default_str();
  cmd_train_app->add_option("--activation", activation)->check(CLI::IsMember({"relu", "silu"}))->capture_default_str();
  cmd_train_app->add_option("--patience", train.config.patience, "Early-stop patience in epochs (0 disables)")
      ->capture_default_str();
  cmd_train_app->add_option("--train-fraction", train.train_fraction)->capture_default_str();

  SampleOptions sample_opts;
  std::string label;
  auto* cmd_sample_app = app.add_subcommand("sample", "Generate rows from a checkpoint");
  cmd_sample_app->add_option("--model", sample_opts.model, "Checkpoint path")->required();
  cmd_sample_app->add_option("--n", sample_opts.n, "Row count")->required();
  auto* label_opt = cmd_sample_app->add_option("--label", label, "Condition every row on this label value");
  cmd_sample_app->add_option("--seed", sample_opts.seed)->capture_default_str();
  cmd_sample_app->add_option("--out", sample_opts.out, "Output CSV")->required();

  EvaluateOptions eval;
  std::string report_path, label_column;
  auto* cmd_eval_app = app.add_subcommand("evaluate", "Score synthetic rows against real data");
  cmd_eval_app->add_option("--real", eval.real)->required();
  cmd_eval_app->add_option("--synth", eval.synth)->required();
  cmd_eval_app->add_option("--schema", eval.schema)->required();
  auto* label_column_opt = cmd_eval_app->add_option("--label-column", label_column);
  cmd_eval_app->add_option("--seed", eval.seed)->capture_default_str();
  cmd_eval_app->add_option("--repeats", eval.repeats)->capture_default_str();
  auto* report_opt = cmd_eval_app->add_option("--report", report_path, "Report JSON path");
  cmd_eval_app->add_option("--train-fraction", eval.train_fraction)->capture_default_str();

  std::filesystem::path infer_data, infer_out;
  std::size_t max_vocab = 64;
  auto* cmd_infer_app = app.add_subcommand("infer-schema", "Guess a schema from a CSV header and cells");
  cmd_infer_app->add_option("--data", infer_data)->required();
  cmd_infer_app->add_option("--out", infer_out)->required();
  cmd_infer_app->add_option("--max-vocab", max_vocab)->capture_default_str();
  std::string infer_label;
  auto* infer_label_opt = cmd_infer_app->add_option("--label-column", infer_label, "Mark this categorical column as the label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_train_app) {
      train.config.scaler = parse_scaler_method(scaler);
      train.config.activation = parse_activation(activation);
      cmd_train(train, std::cerr);
    } else if (*cmd_sample_app) {
      if (*label_opt) sample_opts.label = label;
      cmd_sample(sample_opts);
    } else if (*cmd_eval_app) {
      if (*label_column_opt) eval.label_column = label_column;
      if (*report_opt) eval.report = report_path;
      cmd_evaluate(eval, std::cout);
    } else if (*cmd_infer_app) {
      auto schema = infer_schema(infer_data, max_vocab);
      if (*infer_label_opt) schema = TableSchema(schema.columns(), infer_label);
      write_schema(schema, infer_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
