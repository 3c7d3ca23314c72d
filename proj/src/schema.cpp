#include "tabsynth/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "csv.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_real(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace

ColumnSpec ColumnSpec::categorical(std::string name, std::vector<std::string> vocabulary) {
  return ColumnSpec{std::move(name), ColumnKind::Categorical, std::move(vocabulary)};
}

ColumnSpec ColumnSpec::numeric(std::string name) {
  return ColumnSpec{std::move(name), ColumnKind::Numeric, {}};
}

TableSchema::TableSchema(std::vector<ColumnSpec> columns, std::optional<std::string> label_column)
    : columns_(std::move(columns)), label_column_(std::move(label_column)) {
  std::unordered_set<std::string> names;
  slot_.resize(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& column = columns_[c];
    if (!names.insert(column.name).second)
      throw Error(ErrorKind::InvalidSchema, "duplicate column name '" + column.name + "'");
    if (column.is_categorical()) {
      if (column.vocabulary.empty())
        throw Error(ErrorKind::InvalidSchema, "column '" + column.name + "' has an empty vocabulary");
      std::unordered_set<std::string> seen;
      for (const auto& token : column.vocabulary)
        if (!seen.insert(token).second)
          throw Error(ErrorKind::InvalidSchema,
                      "column '" + column.name + "' repeats vocabulary entry '" + token + "'");
      slot_[c] = categorical_.size();
      categorical_.push_back(c);
    } else {
      if (!column.vocabulary.empty())
        throw Error(ErrorKind::InvalidSchema, "numeric column '" + column.name + "' declares a vocabulary");
      slot_[c] = numeric_.size();
      numeric_.push_back(c);
    }
  }
  if (label_column_) {
    const auto idx = find(*label_column_);
    if (!idx) throw Error(ErrorKind::InvalidSchema, "label column '" + *label_column_ + "' is not in the schema");
    if (!columns_[*idx].is_categorical())
      throw Error(ErrorKind::InvalidSchema, "label column '" + *label_column_ + "' must be categorical");
  }
}

std::optional<std::size_t> TableSchema::find(const std::string& name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c].name == name) return c;
  return std::nullopt;
}

std::size_t TableSchema::index_of(const std::string& name) const {
  if (auto idx = find(name)) return *idx;
  throw Error(ErrorKind::MissingColumn, "no column named '" + name + "'");
}

std::optional<std::size_t> TableSchema::label_index() const {
  if (!label_column_) return std::nullopt;
  return find(*label_column_);
}

std::optional<std::size_t> TableSchema::label_slot() const {
  if (auto idx = label_index()) return slot_[*idx];
  return std::nullopt;
}

std::size_t TableSchema::num_classes() const {
  if (auto idx = label_index()) return columns_[*idx].vocabulary.size();
  return 1;
}

Dataset::Dataset(TableSchema s, std::size_t rows)
    : schema(std::move(s)),
      categories(IndexMatrix::Zero(static_cast<Eigen::Index>(rows),
                                   static_cast<Eigen::Index>(schema.categorical_columns().size()))),
      numerics(Matrix<double>::Zero(static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(schema.numeric_columns().size()))) {}

Dataset Dataset::take(const std::vector<std::size_t>& row_indices) const {
  Dataset out(schema, row_indices.size());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(row_indices[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.categories.row(dst) = categories.row(src);
    out.numerics.row(dst) = numerics.row(src);
  }
  return out;
}

void Dataset::validate() const {
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& column = schema.column(c);
      if (column.is_categorical()) {
        const auto v = category(r, c);
        if (v < 0 || static_cast<std::size_t>(v) >= column.vocabulary.size())
          throw Error(ErrorKind::UnknownCategory,
                      "column " + column.name + ", row " + std::to_string(r + 1) + ": index out of vocabulary");
      } else if (!std::isfinite(numeric(r, c))) {
        throw Error(ErrorKind::UnparseableNumeric,
                    "column " + column.name + ", row " + std::to_string(r + 1) + ": non-finite value");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Schema JSON

std::string schema_to_json(const TableSchema& schema) {
  nlohmann::json doc;
  doc["columns"] = nlohmann::json::array();
  for (const auto& column : schema.columns()) {
    nlohmann::json entry{{"name", column.name},
                         {"kind", column.is_categorical() ? "categorical" : "numeric"}};
    if (column.is_categorical()) entry["vocabulary"] = column.vocabulary;
    doc["columns"].push_back(std::move(entry));
  }
  doc["label_column"] = schema.label_column() ? nlohmann::json(*schema.label_column()) : nlohmann::json(nullptr);
  return doc.dump();
}

TableSchema schema_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<ColumnSpec> columns;
    for (const auto& entry : doc.at("columns")) {
      const auto name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "categorical") {
        columns.push_back(ColumnSpec::categorical(name, entry.at("vocabulary").get<std::vector<std::string>>()));
      } else if (kind == "numeric") {
        columns.push_back(ColumnSpec::numeric(name));
      } else {
        throw Error(ErrorKind::InvalidSchema, "column '" + name + "' has unknown kind '" + kind + "'");
      }
    }
    std::optional<std::string> label;
    if (doc.contains("label_column") && !doc["label_column"].is_null())
      label = doc["label_column"].get<std::string>();
    return TableSchema(std::move(columns), std::move(label));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidSchema, e.what());
  }
}

TableSchema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SchemaNotFound, "cannot open schema file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return schema_from_json(text);
}

void write_schema(const TableSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << nlohmann::json::parse(schema_to_json(schema)).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// CSV

Dataset parse_csv(const std::string& text, const TableSchema& schema) {
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorKind::EmptyFile, "no header row");

  const auto& header = records.front();
  // source field position for each schema column
  std::vector<std::size_t> source(schema.size());
  std::unordered_map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < header.size(); ++i) header_pos.emplace(std::string(trim(header[i])), i);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto it = header_pos.find(schema.column(c).name);
    if (it == header_pos.end())
      throw Error(ErrorKind::MissingColumn, "header lacks column '" + schema.column(c).name + "'");
    source[c] = it->second;
  }

  std::vector<std::unordered_map<std::string_view, std::int32_t>> lookup(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& vocab = schema.column(c).vocabulary;
    for (std::size_t k = 0; k < vocab.size(); ++k) lookup[c].emplace(vocab[k], static_cast<std::int32_t>(k));
  }

  Dataset data(schema, records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    const auto row = static_cast<Eigen::Index>(r - 1);
    const auto where = [&](std::size_t c) {
      return "column " + schema.column(c).name + ", row " + std::to_string(r);
    };
    if (record.size() != header.size())
      throw Error(ErrorKind::MissingValue, "row " + std::to_string(r) + " has " + std::to_string(record.size()) +
                                               " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = record[source[c]];
      const auto slot = static_cast<Eigen::Index>(schema.slot(c));
      if (schema.column(c).is_categorical()) {
        const auto it = lookup[c].find(cell);
        if (it == lookup[c].end()) {
          if (cell.empty()) throw Error(ErrorKind::MissingValue, where(c) + ": empty cell");
          throw Error(ErrorKind::UnknownCategory, where(c) + ": value '" + cell + "' not in vocabulary");
        }
        data.categories(row, slot) = it->second;
      } else {
        if (trim(cell).empty()) throw Error(ErrorKind::MissingValue, where(c) + ": empty cell");
        const auto value = parse_real(cell);
        if (!value) throw Error(ErrorKind::UnparseableNumeric, where(c) + ": cannot parse '" + cell + "'");
        data.numerics(row, slot) = *value;
      }
    }
  }
  if (data.empty()) throw Error(ErrorKind::EmptyFile, "no data rows");
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  return parse_csv(csv::read_file(path.string()), schema);
}

std::string format_csv(const Dataset& data) {
  const auto& schema = data.schema;
  std::string out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out.push_back(',');
    out += csv::escape(schema.column(c).name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out.push_back(',');
      const auto& column = schema.column(c);
      if (column.is_categorical())
        out += csv::escape(column.vocabulary.at(static_cast<std::size_t>(data.category(r, c))));
      else
        out += format_real(data.numeric(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << format_csv(data);
}

// ---------------------------------------------------------------------------
// Split

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorKind::InvalidFraction, "train fraction must lie in (0, 1), got " + format_real(train_fraction));
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");

  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(data.rows()) * train_fraction));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {data.take(train), data.take(test)};
}

// ---------------------------------------------------------------------------
// Inference

TableSchema infer_schema_from_text(const std::string& text, std::size_t max_vocab) {
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorKind::EmptyFile, "no header row");
  if (records.size() < 2) throw Error(ErrorKind::EmptyFile, "no data rows");
  const auto& header = records.front();

  std::vector<ColumnSpec> columns;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    bool all_numeric = true;
    std::set<std::string> distinct;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].size() != header.size())
        throw Error(ErrorKind::MissingValue, "row " + std::to_string(r) + " has the wrong field count");
      const auto& cell = records[r][i];
      if (trim(cell).empty())
        throw Error(ErrorKind::MissingValue, "column " + name + ", row " + std::to_string(r) + ": empty cell");
      if (all_numeric && !parse_real(cell)) all_numeric = false;
      distinct.insert(cell);
    }
    if (all_numeric) {
      columns.push_back(ColumnSpec::numeric(name));
      continue;
    }
    if (distinct.size() > max_vocab)
      throw Error(ErrorKind::VocabularyOverflow, "column '" + name + "' has " + std::to_string(distinct.size()) +
                                                     " distinct values (limit " + std::to_string(max_vocab) + ")");
    columns.push_back(ColumnSpec::categorical(name, {distinct.begin(), distinct.end()}));
  }
  return TableSchema(std::move(columns));
}

TableSchema infer_schema(const std::filesystem::path& path, std::size_t max_vocab) {
  return infer_schema_from_text(csv::read_file(path.string()), max_vocab);
}

}  // namespace tabsynth
