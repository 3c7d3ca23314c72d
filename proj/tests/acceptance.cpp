// Acceptance suite: one PASS/FAIL/SKIP line per criterion; exit status is
// nonzero when any gating criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "tabsynth/checkpoint.hpp"
#include "tabsynth/commands.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/model.hpp"
#include "tabsynth/report.hpp"

using namespace tabsynth;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Result {
  Outcome outcome = Outcome::Fail;
  std::string detail;
};

Result verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- 1 -------------------------------------------------------------------

Result gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (int i = 0; i < 20; ++i) {
    const auto p = gradcheck::random_problem(rng);
    for (const auto& r : {gradcheck::check(p), gradcheck::check_input(p)}) {
      checked += r.checked;
      if (r.max_error > worst) {
        worst = r.max_error;
        where = "net " + std::to_string(i) + " " + r.worst;
      }
    }
  }
  const double t = seconds_since(start);
  return verdict(worst < 1e-4 && t < 30.0, std::to_string(checked) + " partials, max rel error " + sci(worst) +
                                               (where.empty() ? "" : " at " + where) + ", " + fmt(t, 1) + " s");
}

// ---- 2 -------------------------------------------------------------------

TableSchema random_schema(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3), vocab(1, 6);
  std::vector<ColumnSpec> cols;
  const int n_cat = count(rng), n_num = count(rng);
  for (int i = 0; i < n_cat; ++i) {
    std::vector<std::string> v;
    const int k = vocab(rng);
    for (int j = 0; j < k; ++j) v.push_back("v" + std::to_string(j));
    cols.push_back(ColumnSpec::categorical("c" + std::to_string(i), v));
  }
  for (int i = 0; i < n_num; ++i) cols.push_back(ColumnSpec::numeric("x" + std::to_string(i)));
  std::shuffle(cols.begin(), cols.end(), rng);
  return TableSchema(cols);
}

Result metric_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> rows(2, 1000), decimals(-1, 2);
  double worst = 0.0;
  std::string where;
  auto track = [&](double a, double b, const std::string& what) {
    const double d = std::abs(a - b);
    if (!(d <= worst)) {
      worst = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
      where = what;
    }
  };
  for (int pair = 0; pair < 50; ++pair) {
    const auto schema = pair % 2 == 0 ? fixtures::mixed_schema() : random_schema(rng);
    const int dec = decimals(rng);  // coarse rounding forces ties and exact matches
    const auto real = fixtures::random_dataset(schema, static_cast<std::size_t>(rows(rng)), rng, dec);
    auto synth = fixtures::random_dataset(schema, static_cast<std::size_t>(rows(rng)), rng, dec);
    synth.categories.row(0) = real.categories.row(0);
    synth.numerics.row(0) = real.numerics.row(0);
    const std::string tag = "pair " + std::to_string(pair);

    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (schema.column(c).is_categorical()) {
        const auto a = oracle::categorical(real, c), b = oracle::categorical(synth, c);
        const std::vector<std::int32_t> a32(a.begin(), a.end()), b32(b.begin(), b.end());
        track(tvd(a32, b32), oracle::tvd(a, b), tag + " tvd");
      } else {
        const auto a = oracle::numeric(real, c), b = oracle::numeric(synth, c);
        track(ks_statistic(a, b), oracle::ks(a, b), tag + " ks");
        for (std::size_t d = c + 1; d < schema.size(); ++d) {
          if (schema.column(d).is_categorical()) continue;
          const auto e = oracle::numeric(real, d);
          if (!oracle::constant(a) && !oracle::constant(e)) track(pearson(a, e), oracle::pearson(a, e), tag + " pearson");
        }
      }
    }
    track(fidelity_column(real, synth).aggregate, oracle::fidelity_column(real, synth), tag + " fidelity_column");
    track(fidelity_row(real, synth).aggregate, oracle::fidelity_row(real, synth), tag + " fidelity_row");
    track(privacy_dcr(real, synth), oracle::dcr_median(real, synth), tag + " privacy_dcr");
    track(synthesis_score(real, synth), oracle::synthesis(real, synth), tag + " synthesis");
  }
  const double t = seconds_since(start);
  return verdict(worst <= 1e-12 && t < 60.0,
                 "50 pairs, max |diff| " + sci(worst) + (where.empty() ? "" : " (" + where + ")") + ", " + fmt(t, 1) + " s");
}

// ---- 3 -------------------------------------------------------------------

Result schedule_statistics() {
  const auto schedule = NoiseSchedule::linear(500);
  const double beta_hat = schedule.beta_hat(500);

  // standardized x_0 from a skewed table
  std::mt19937_64 rng(3);
  std::gamma_distribution<double> gamma(2.0, 1.5);
  std::normal_distribution<double> normal;
  const Eigen::Index n = 10000, m = 6;
  Matrix<double> raw(n, m);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < m; ++c) raw(r, c) = c % 2 ? gamma(rng) : 3.0 + 2.0 * normal(rng);
  std::vector<ColumnSpec> cols;
  for (Eigen::Index c = 0; c < m; ++c) cols.push_back(ColumnSpec::numeric("x" + std::to_string(c)));
  Dataset d(TableSchema(cols), static_cast<std::size_t>(n));
  d.numerics = raw;
  const auto scaler = NumericScaler::fit(d, ScalerMethod::Standard);
  const Matrix<double> x0 = scaler.scale(d.numerics);

  const std::vector<int> steps(static_cast<std::size_t>(n), 500);
  const auto xt = forward_sample(schedule, x0, steps, 11).noisy;
  double worst_mean = 0.0, lo_var = 1e9, hi_var = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    const double mean = xt.col(c).mean();
    const double var = (xt.col(c).array() - mean).square().mean();
    worst_mean = std::max(worst_mean, std::abs(mean));
    lo_var = std::min(lo_var, var);
    hi_var = std::max(hi_var, var);
  }
  const bool ok = beta_hat > 0.99 && worst_mean < 0.05 && lo_var >= 0.9 && hi_var <= 1.1;
  return verdict(ok, "beta_hat_500 " + fmt(beta_hat, 5) + ", max |mean| " + fmt(worst_mean, 4) + ", variance in [" +
                         fmt(lo_var, 3) + ", " + fmt(hi_var, 3) + "]");
}

// ---- 4 -------------------------------------------------------------------

// Two categoricals (3 and 5 values), two numerics with correlation 0.8, and a
// binary label that depends on the first numeric and shifts the categoricals.
// Numerics are centered at zero: the 1% match rule of the synthesis score is
// relative to |x|, so a large offset would let fresh real rows "match" too.
Dataset toy_table(std::size_t rows, std::uint64_t seed) {
  const TableSchema schema({ColumnSpec::categorical("region", {"north", "east", "south"}),
                            ColumnSpec::categorical("grade", {"A", "B", "C", "D", "E"}), ColumnSpec::numeric("income"),
                            ColumnSpec::numeric("spend"), ColumnSpec::categorical("label", {"no", "yes"})},
                           "label");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  auto pick = [&](const std::vector<double>& p) {
    double u = unit(rng);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      if (u < p[k]) return static_cast<std::int32_t>(k);
      u -= p[k];
    }
    return static_cast<std::int32_t>(p.size() - 1);
  };
  Dataset d(schema, rows);
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows); ++r) {
    const double a = normal(rng);
    const double b = 0.8 * a + 0.6 * normal(rng);
    const int y = a + 0.7 * normal(rng) > 0 ? 1 : 0;
    const auto region = pick(y ? std::vector<double>{0.6, 0.3, 0.1} : std::vector<double>{0.1, 0.3, 0.6});
    std::vector<double> grade{0.5, 0.2, 0.1, 0.1, 0.1};
    std::rotate(grade.rbegin(), grade.rbegin() + region, grade.rend());
    d.categories(r, 0) = region;
    d.categories(r, 1) = pick(grade);
    d.categories(r, 2) = y;
    d.numerics(r, 0) = 10.0 * a;
    d.numerics(r, 1) = 5.0 * b;
  }
  return d;
}

TrainConfig toy_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.steps = 100;
  c.hidden = 256;
  c.layers = 4;
  c.scaler = ScalerMethod::Quantile;
  c.seed = 1;
  return c;
}

Result desk_scale_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  const auto table = toy_table(5000, 42);
  const auto [train, test] = split(table, kDefaultTrainFraction, 1);
  const auto model = train_model(train, toy_config(500));
  const auto requested = draw_labels(model.label_prior, 5000, 2);
  const auto synth = sample(model, requested, 3);
  const double t = seconds_since(start);

  const auto slot = static_cast<Eigen::Index>(*table.schema.label_slot());
  const double label_acc =
      static_cast<double>((synth.categories.col(slot).array() == requested.array()).count()) / 5000.0;
  const auto report = evaluate_all(train, test, synth, 1);
  const double holdout = synthesis_score(train, test);  // what a fresh real sample scores
  const bool ok = report.fidelity_column >= 0.85 && report.fidelity_row >= 0.85 && report.synthesis >= 0.95 &&
                  label_acc >= 0.9 && t < 600.0;
  return verdict(ok, "omega_col " + fmt(report.fidelity_column) + ", omega_row " + fmt(report.fidelity_row) +
                         ", synthesis " + fmt(report.synthesis) + " (real holdout " + fmt(holdout) + "), conditional label accuracy " + fmt(label_acc) +
                         ", " + std::to_string(model.epochs_run) + " epochs, " + fmt(t, 1) + " s");
}

// ---- 5 -------------------------------------------------------------------

Result credit_default() {
  const char* csv = std::getenv("CREDIT_DEFAULT_CSV");
  const char* schema_path = std::getenv("CREDIT_DEFAULT_SCHEMA");
  if (!csv || !schema_path)
    return {Outcome::Skip, "set CREDIT_DEFAULT_CSV and CREDIT_DEFAULT_SCHEMA to run (not gating)"};
  const auto start = std::chrono::steady_clock::now();
  const auto data = load_csv(csv, read_schema(schema_path));
  TrainConfig c;
  if (const char* e = std::getenv("CREDIT_DEFAULT_EPOCHS")) c.epochs = std::stoul(e);
  c.seed = 1;
  const auto [train, test] = split(data, kDefaultTrainFraction, c.seed);
  const auto model = train_model(train, c);
  const auto synth = sample(model, test.rows(), std::nullopt, 2);
  const auto report = evaluate_all(train, test, synth, 1);
  const double util = report.utility.value_or(0.0);
  const bool ok = std::abs(report.fidelity_column - 0.931) <= 0.05 && std::abs(util - 0.794) <= 0.05;
  return verdict(ok, "omega_col " + fmt(report.fidelity_column) + " (target 0.931), utility " + fmt(util) +
                         " (target 0.794), " + std::to_string(model.epochs_run) + " epochs, " +
                         fmt(seconds_since(start), 1) + " s (not gating)");
}

// ---- 6 -------------------------------------------------------------------

// Three correlated log-normal columns (log-scale sd 2) and a binary label.
Dataset lognormal_table(std::size_t rows, std::uint64_t seed) {
  const TableSchema schema({ColumnSpec::numeric("u"), ColumnSpec::numeric("v"), ColumnSpec::numeric("w"),
                            ColumnSpec::categorical("label", {"no", "yes"})},
                           "label");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Dataset d(schema, rows);
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows); ++r) {
    const double z0 = normal(rng), z1 = 0.6 * z0 + 0.8 * normal(rng), z2 = normal(rng);
    d.numerics(r, 0) = std::exp(0.0 + 2.0 * z0);
    d.numerics(r, 1) = std::exp(1.0 + 2.0 * z1);
    d.numerics(r, 2) = std::exp(2.0 + 2.0 * z2);
    d.categories(r, 0) = z0 + 0.5 * normal(rng) > 0 ? 1 : 0;
  }
  return d;
}

Result scaler_ablation() {
  const auto start = std::chrono::steady_clock::now();
  const auto table = lognormal_table(5000, 9);
  const auto [train, test] = split(table, kDefaultTrainFraction, 1);
  auto score = [&](ScalerMethod method) {
    auto c = toy_config(300);
    c.scaler = method;
    const auto model = train_model(train, c);
    return fidelity_column(test, sample(model, test.rows(), std::nullopt, 2)).aggregate;
  };
  const double quantile = score(ScalerMethod::Quantile);
  const double standard = score(ScalerMethod::Standard);
  return verdict(quantile - standard >= 0.05, "omega_col quantile " + fmt(quantile) + " vs standard " + fmt(standard) +
                                                  " (gap " + fmt(quantile - standard) + "), " +
                                                  fmt(seconds_since(start), 1) + " s");
}

// ---- 7 -------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result determinism() {
  fixtures::TempDir dir("acceptance-determinism");
  write_csv(toy_table(600, 5), dir / "data.csv");
  write_schema(toy_table(1, 5).schema, dir / "schema.json");

  std::string checkpoint[2], samples[2], reports[2];
  for (int run = 0; run < 2; ++run) {
    const auto tag = std::to_string(run);
    TrainOptions t;
    t.data = dir / "data.csv";
    t.schema = dir / "schema.json";
    t.out = dir / ("model" + tag + ".fndf");
    t.config = toy_config(20);
    t.config.hidden = 64;
    t.config.layers = 2;
    std::ostringstream log;
    cmd_train(t, log);

    SampleOptions s;
    s.model = t.out;
    s.out = dir / ("synth" + tag + ".csv");
    s.n = 400;
    s.seed = 17;
    cmd_sample(s);

    EvaluateOptions e;
    e.real = t.data;
    e.synth = s.out;
    e.schema = t.schema;
    e.seed = 3;
    e.repeats = 2;
    e.report = dir / ("report" + tag + ".json");
    std::ostringstream table;
    cmd_evaluate(e, table);

    checkpoint[run] = slurp(t.out);
    samples[run] = slurp(s.out);
    reports[run] = slurp(*e.report);
  }
  const bool ok = !checkpoint[0].empty() && checkpoint[0] == checkpoint[1] && samples[0] == samples[1] &&
                  reports[0] == reports[1];
  return verdict(ok, std::string("checkpoint ") + (checkpoint[0] == checkpoint[1] ? "identical" : "DIFFERS") +
                         ", samples " + (samples[0] == samples[1] ? "identical" : "DIFFER") + ", report " +
                         (reports[0] == reports[1] ? "identical" : "DIFFERS") + " (" +
                         std::to_string(checkpoint[0].size()) + " checkpoint bytes)");
}

// ---- 8 -------------------------------------------------------------------

Result round_trips() {
  std::mt19937_64 rng(8);
  const auto schema = fixtures::mixed_schema();
  auto data = fixtures::random_dataset(schema, 2000, rng);
  std::lognormal_distribution<double> skew(0.5, 1.2);
  for (Eigen::Index r = 0; r < data.numerics.rows(); ++r) data.numerics(r, 1) = skew(rng);

  std::size_t cat_mismatch = 0;
  double worst_std_yj = 0.0, worst_quantile = 0.0;
  for (auto method : {ScalerMethod::Standard, ScalerMethod::YeoJohnson, ScalerMethod::Quantile}) {
    const auto scaler = NumericScaler::fit(data, method);
    const auto emb = Embeddings<double>::init(schema, 2, 3);
    const auto back = decode(encode(data, emb, scaler).values, schema, emb, scaler);
    cat_mismatch += static_cast<std::size_t>((back.categories.array() != data.categories.array()).count());
    for (Eigen::Index c = 0; c < data.numerics.cols(); ++c) {
      const auto& q = scaler.columns()[static_cast<std::size_t>(c)].quantiles;
      for (Eigen::Index r = 0; r < data.numerics.rows(); ++r) {
        const double x = data.numerics(r, c), err = std::abs(back.numerics(r, c) - x);
        if (method == ScalerMethod::Quantile) {
          // relative to the width of the reference cell holding x
          const auto it = std::upper_bound(q.begin(), q.end(), x);
          const double hi = it == q.end() ? q.back() : *it;
          const double lo = it == q.begin() ? q.front() : *(it - 1);
          worst_quantile = std::max(worst_quantile, err / std::max(1.0, hi - lo));
        } else {
          worst_std_yj = std::max(worst_std_yj, err);
        }
      }
    }
  }

  // checkpoint save / load / sample
  const auto train = toy_table(400, 6);
  auto c = toy_config(5);
  c.hidden = 32;
  c.layers = 2;
  const auto model = train_model(train, c);
  fixtures::TempDir dir("acceptance-roundtrip");
  save_checkpoint(model, dir / "m.fndf");
  const auto loaded = load_checkpoint(dir / "m.fndf");
  const bool same_model = serialize_checkpoint(loaded) == serialize_checkpoint(model);
  const bool same_sample = format_csv(sample(loaded, 300, std::nullopt, 4)) == format_csv(sample(model, 300, std::nullopt, 4));

  const bool ok = cat_mismatch == 0 && worst_std_yj <= 1e-6 && worst_quantile <= 1e-6 && same_model && same_sample;
  return verdict(ok, std::to_string(cat_mismatch) + " categorical mismatches, standard/yeo-johnson max error " +
                         sci(worst_std_yj) + ", quantile max cell-relative error " + sci(worst_quantile) +
                         ", checkpoint " + (same_model ? "identical" : "DIFFERS") + ", samples " +
                         (same_sample ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    bool gating;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", true, gradient_oracle},
      {2, "metric oracles", true, metric_oracles},
      {3, "schedule and forward-process statistics", true, schedule_statistics},
      {4, "desk-scale end-to-end fidelity", true, desk_scale_fidelity},
      {5, "credit default reference numbers", false, credit_default},
      {6, "scaler ablation direction", true, scaler_ablation},
      {7, "determinism", true, determinism},
      {8, "round trips", true, round_trips},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Skip ? "SKIP" : "FAIL";
    std::cout << tag << " " << c.id << " " << c.name << ": " << r.detail << std::endl;
    if (r.outcome == Outcome::Fail && c.gating) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
