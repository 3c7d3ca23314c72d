#include "tabsynth/report.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "tabsynth/classifiers.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {

using nlohmann::ordered_json;

EvaluationReport evaluate_all(const Dataset& real_train, const Dataset& real_test, const Dataset& synth,
                              std::uint64_t seed, std::optional<std::string> label_column) {
  require_same_schema(real_train, synth);
  require_same_schema(real_test, synth);
  const auto& schema = synth.schema;
  if (!label_column) label_column = schema.label_column();

  EvaluationReport report;
  report.seed = seed;
  report.real_train_rows = real_train.rows();
  report.real_test_rows = real_test.rows();
  report.synthetic_rows = synth.rows();
  report.label_column = label_column;

  const auto col = fidelity_column(real_test, synth);
  report.fidelity_column = col.aggregate;
  for (std::size_t c = 0; c < schema.size(); ++c) report.column_scores.emplace_back(schema.column(c).name, col.per_column[c]);

  const auto row = fidelity_row(real_test, synth);
  report.fidelity_row = row.aggregate;
  report.mixed_pairs_excluded = row.mixed_pairs_excluded;
  for (const auto& p : row.pairs) {
    report.pair_scores.push_back({schema.column(p.a).name, schema.column(p.b).name, p.score, p.degenerate});
    if (p.degenerate) ++report.degenerate_pairs;
  }

  if (label_column) {
    const auto u = utility(synth, real_test, *label_column);
    report.utility = u.mean_accuracy;
    report.classifier_accuracy = u.per_classifier;
    report.omitted_classifiers = omitted_classifiers();
  }

  report.synthesis = synthesis_score(real_train, synth);
  report.privacy_dcr = privacy_dcr(real_train, synth);
  return report;
}

namespace {

MetricSummary summarize_metric(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.std += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(values.size()));
  return s;
}

ordered_json to_json(const EvaluationReport& r) {
  ordered_json doc;
  doc["fidelity_column"] = {{"score", r.fidelity_column}, {"per_column", ordered_json::object()}};
  for (const auto& [name, score] : r.column_scores) doc["fidelity_column"]["per_column"][name] = score;
  doc["fidelity_row"] = {{"score", r.fidelity_row}, {"per_pair", ordered_json::array()}};
  for (const auto& p : r.pair_scores)
    doc["fidelity_row"]["per_pair"].push_back({{"a", p.a}, {"b", p.b}, {"score", p.score}, {"degenerate", p.degenerate}});
  if (r.utility) {
    doc["utility"] = {{"score", *r.utility}, {"per_classifier", ordered_json::object()}};
    for (const auto& [name, acc] : r.classifier_accuracy) doc["utility"]["per_classifier"][name] = acc;
  } else {
    doc["utility"] = nullptr;
  }
  doc["synthesis"] = r.synthesis;
  doc["privacy_dcr"] = r.privacy_dcr;
  doc["metadata"] = {{"model", r.model_name},
                     {"real_train_rows", r.real_train_rows},
                     {"real_test_rows", r.real_test_rows},
                     {"synthetic_rows", r.synthetic_rows},
                     {"seed", r.seed},
                     {"label_column", r.label_column ? ordered_json(*r.label_column) : ordered_json(nullptr)},
                     {"omitted_classifiers", r.omitted_classifiers},
                     {"mixed_pairs_excluded", r.mixed_pairs_excluded},
                     {"degenerate_pairs", r.degenerate_pairs}};
  return doc;
}

ordered_json to_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string format_summary(const MetricSummary& s) { return format_score(s.mean) + " ± " + format_score(s.std); }

std::string pad(const std::string& s, std::size_t width) {
  // count code points so the ± sign does not skew alignment
  std::size_t len = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++len;
  return s + std::string(width > len ? width - len : 0, ' ');
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  const std::vector<std::string> header{"Model", "Fidelity Column ↑", "Fidelity Row ↑", "Utility ↑", "Synthesis ↑",
                                        "Privacy ↓"};
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t len = 0;
      for (unsigned char ch : r[i])
        if ((ch & 0xC0) != 0x80) ++len;
      width[i] = std::max(width[i], len);
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? " | " : "") + pad(r[i], width[i]);
    return out + "\n";
  };
  std::string out = line(header);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "-+-" : "") + std::string(width[i], '-');
  out += "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace

RepeatedReport summarize(std::vector<EvaluationReport> runs) {
  if (runs.empty()) throw Error(ErrorKind::InvalidArgument, "no runs to summarize");
  RepeatedReport out;
  std::vector<double> fc, fr, syn, dcr, util;
  for (const auto& r : runs) {
    fc.push_back(r.fidelity_column);
    fr.push_back(r.fidelity_row);
    syn.push_back(r.synthesis);
    dcr.push_back(r.privacy_dcr);
    if (r.utility) util.push_back(*r.utility);
  }
  out.fidelity_column = summarize_metric(fc);
  out.fidelity_row = summarize_metric(fr);
  out.synthesis = summarize_metric(syn);
  out.privacy_dcr = summarize_metric(dcr);
  if (util.size() == runs.size()) out.utility = summarize_metric(util);
  out.runs = std::move(runs);
  return out;
}

std::string report_to_json(const EvaluationReport& report) { return to_json(report).dump(2) + "\n"; }

std::string report_to_json(const RepeatedReport& report) {
  ordered_json doc;
  doc["summary"] = {{"fidelity_column", to_json(report.fidelity_column)},
                    {"fidelity_row", to_json(report.fidelity_row)},
                    {"utility", report.utility ? to_json(*report.utility) : ordered_json(nullptr)},
                    {"synthesis", to_json(report.synthesis)},
                    {"privacy_dcr", to_json(report.privacy_dcr)},
                    {"repeats", report.runs.size()}};
  doc["runs"] = ordered_json::array();
  for (const auto& r : report.runs) doc["runs"].push_back(to_json(r));
  return doc.dump(2) + "\n";
}

std::string render_table(const std::vector<EvaluationReport>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.model_name, format_score(r.fidelity_column), format_score(r.fidelity_row),
                     r.utility ? format_score(*r.utility) : "n/a", format_score(r.synthesis),
                     format_score(r.privacy_dcr)});
  return table(cells);
}

std::string render_table(const RepeatedReport& report) {
  const std::string name = report.runs.empty() ? "synthetic" : report.runs.front().model_name;
  return table({{name, format_summary(report.fidelity_column), format_summary(report.fidelity_row),
                 report.utility ? format_summary(*report.utility) : "n/a", format_summary(report.synthesis),
                 format_summary(report.privacy_dcr)}});
}

}  // namespace tabsynth
