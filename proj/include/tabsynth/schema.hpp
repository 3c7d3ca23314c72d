#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tabsynth/types.hpp"

namespace tabsynth {

enum class ColumnKind { Categorical, Numeric };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> vocabulary;  // empty for numeric columns

  bool is_categorical() const { return kind == ColumnKind::Categorical; }

  static ColumnSpec categorical(std::string name, std::vector<std::string> vocabulary);
  static ColumnSpec numeric(std::string name);

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Ordered column declarations plus the optional conditioning-label column.
//
// Cell storage in a Dataset is split by kind: categorical columns live in an
// integer matrix and numeric columns in a real matrix. `slot(c)` gives the
// position of column c inside the store of its kind.
class TableSchema {
 public:
  TableSchema() = default;
  // Validates: unique names, non-empty unique vocabularies, label names a
  // categorical column. Throws Error(InvalidSchema) otherwise.
  TableSchema(std::vector<ColumnSpec> columns, std::optional<std::string> label_column = std::nullopt);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(std::size_t c) const { return columns_.at(c); }
  std::size_t size() const { return columns_.size(); }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;  // throws MissingColumn

  const std::optional<std::string>& label_column() const { return label_column_; }
  // Column index of the label, if any.
  std::optional<std::size_t> label_index() const;
  // Position of the label among the categorical columns, if any.
  std::optional<std::size_t> label_slot() const;
  // Number of conditioning classes: the label vocabulary size, or 1 when unconditional.
  std::size_t num_classes() const;

  const std::vector<std::size_t>& categorical_columns() const { return categorical_; }
  const std::vector<std::size_t>& numeric_columns() const { return numeric_; }
  std::size_t slot(std::size_t c) const { return slot_.at(c); }

  friend bool operator==(const TableSchema& a, const TableSchema& b) {
    return a.columns_ == b.columns_ && a.label_column_ == b.label_column_;
  }

 private:
  std::vector<ColumnSpec> columns_;
  std::optional<std::string> label_column_;
  std::vector<std::size_t> categorical_;
  std::vector<std::size_t> numeric_;
  std::vector<std::size_t> slot_;
};

// Rows of a table under a schema. `categories` is R x (#categorical) holding
// vocabulary indices; `numerics` is R x (#numeric) holding finite reals.
struct Dataset {
  TableSchema schema;
  IndexMatrix categories;
  Matrix<double> numerics;

  Dataset() = default;
  Dataset(TableSchema schema, std::size_t rows);

  std::size_t rows() const { return static_cast<std::size_t>(categories.rows()); }
  bool empty() const { return rows() == 0; }

  std::int32_t category(std::size_t row, std::size_t column) const {
    return categories(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(schema.slot(column)));
  }
  double numeric(std::size_t row, std::size_t column) const {
    return numerics(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(schema.slot(column)));
  }

  // Rows selected by index, in the given order.
  Dataset take(const std::vector<std::size_t>& row_indices) const;

  // Throws UnknownCategory / UnparseableNumeric on the first invalid cell.
  void validate() const;
};

// Schema JSON: {"columns": [{"name", "kind", "vocabulary"}], "label_column": string|null}
TableSchema read_schema(const std::filesystem::path& path);
void write_schema(const TableSchema& schema, const std::filesystem::path& path);
std::string schema_to_json(const TableSchema& schema);
TableSchema schema_from_json(const std::string& text);

Dataset load_csv(const std::filesystem::path& path, const TableSchema& schema);
Dataset parse_csv(const std::string& text, const TableSchema& schema);
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

// Deterministic shuffle under seed; the first partition holds floor(R * train_fraction) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

TableSchema infer_schema(const std::filesystem::path& path, std::size_t max_vocab);
TableSchema infer_schema_from_text(const std::string& text, std::size_t max_vocab);

}  // namespace tabsynth
