#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "tabsynth/schema.hpp"

namespace fixtures {

using namespace tabsynth;

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("tabsynth_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline TableSchema mixed_schema(bool with_label = true) {
  std::vector<ColumnSpec> cols{ColumnSpec::categorical("color", {"red", "green", "blue"}),
                               ColumnSpec::numeric("height"),
                               ColumnSpec::categorical("size", {"s", "m", "l", "xl"}),
                               ColumnSpec::numeric("weight"),
                               ColumnSpec::categorical("label", {"no", "yes"})};
  return with_label ? TableSchema(cols, "label") : TableSchema(cols);
}

// Random rows under `schema`: uniform categories, numerics ~ N(0, 1) rounded
// to `decimals` places when decimals >= 0 (creates ties).
inline Dataset random_dataset(const TableSchema& schema, std::size_t rows, std::mt19937_64& rng, int decimals = -1) {
  Dataset d(schema, rows);
  std::normal_distribution<double> normal;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto slot = static_cast<Eigen::Index>(schema.slot(c));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (schema.column(c).is_categorical()) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(schema.column(c).vocabulary.size()) - 1);
        d.categories(row, slot) = pick(rng);
      } else {
        double v = normal(rng);
        if (decimals >= 0) {
          const double scale = std::pow(10.0, decimals);
          v = std::round(v * scale) / scale;
        }
        d.numerics(row, slot) = v;
      }
    }
  }
  return d;
}

}  // namespace fixtures
