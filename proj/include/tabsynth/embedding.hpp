#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/scaler.hpp"
#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Learned category embeddings. `weights` is C x D: one row per category token,
// with each categorical column owning the contiguous row range
// [offset(j), offset(j) + size(j)) in schema order.
template <typename Scalar>
class Embeddings {
 public:
  Matrix<Scalar> weights;

  Embeddings() = default;
  Embeddings(Matrix<Scalar> w, std::vector<std::size_t> sizes) : weights(std::move(w)), sizes_(std::move(sizes)) {
    offsets_.resize(sizes_.size());
    std::size_t total = 0;
    for (std::size_t j = 0; j < sizes_.size(); ++j) {
      offsets_[j] = total;
      total += sizes_[j];
    }
    if (static_cast<std::size_t>(weights.rows()) != total)
      throw Error(ErrorKind::InvalidArgument, "embedding rows do not match the category count");
  }

  // Weights drawn i.i.d. from N(0, 1) under seed.
  static Embeddings init(const TableSchema& schema, std::size_t dim, std::uint64_t seed) {
    if (dim < 1) throw Error(ErrorKind::InvalidArgument, "embedding dimension must be at least 1");
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (std::size_t c : schema.categorical_columns()) {
      sizes.push_back(schema.column(c).vocabulary.size());
      total += sizes.back();
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix<Scalar> w(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index d = 0; d < w.cols(); ++d) w(r, d) = static_cast<Scalar>(normal(rng));
    return Embeddings(std::move(w), std::move(sizes));
  }

  // Centers each column's block and rescales it to unit mean square. Decoding
  // is unaffected; training uses it to keep a column from shrinking to a point.
  void normalize_columns() {
    for (std::size_t j = 0; j < sizes_.size(); ++j) {
      if (sizes_[j] < 2) continue;
      auto block = weights.middleRows(static_cast<Eigen::Index>(offsets_[j]), static_cast<Eigen::Index>(sizes_[j]));
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mean = block.colwise().mean();
      block.rowwise() -= mean;
      const Scalar rms = std::sqrt(block.squaredNorm() / static_cast<Scalar>(block.size()));
      if (rms > Scalar(0)) block /= rms;
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t num_columns() const { return sizes_.size(); }
  std::size_t offset(std::size_t j) const { return offsets_.at(j); }
  std::size_t size(std::size_t j) const { return sizes_.at(j); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  // Category within column j whose embedding is closest (Euclidean) to the
  // query; ties go to the lowest index.
  template <typename Derived>
  std::size_t nearest(std::size_t j, const Eigen::MatrixBase<Derived>& query) const {
    const auto base = static_cast<Eigen::Index>(offsets_.at(j));
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sizes_[j]; ++k) {
      const double dist = (weights.row(base + static_cast<Eigen::Index>(k)).template cast<double>() -
                           query.template cast<double>())
                              .squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    return best;
  }

  template <typename Other>
  Embeddings<Other> cast() const {
    return Embeddings<Other>(weights.template cast<Other>(), sizes_);
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
};

// Width of the diffusion space: one D-slice per categorical column, then the numeric block.
inline std::size_t encoded_width(const TableSchema& schema, std::size_t dim) {
  return schema.categorical_columns().size() * dim + schema.numeric_columns().size();
}

// Rows ready for encoding: category indices, already-scaled numerics and the
// conditioning label of each row.
struct PreparedRows {
  IndexMatrix categories;
  Matrix<double> scaled;
  IndexVector labels;

  std::size_t rows() const { return static_cast<std::size_t>(categories.rows()); }
};

inline IndexVector label_indices(const Dataset& data) {
  IndexVector labels = IndexVector::Zero(static_cast<Eigen::Index>(data.rows()));
  if (auto slot = data.schema.label_slot()) labels = data.categories.col(static_cast<Eigen::Index>(*slot));
  return labels;
}

inline PreparedRows prepare_rows(const Dataset& data, const NumericScaler& scaler) {
  return PreparedRows{data.categories, scaler.scale(data.numerics), label_indices(data)};
}

// x_0 = e^{c_1} ⊕ ... ⊕ e^{c_N} ⊕ x^{num}, one row per input row.
template <typename Scalar>
Matrix<Scalar> encode_rows(const IndexMatrix& categories, const Matrix<double>& scaled,
                           const Embeddings<Scalar>& embeddings) {
  const auto dim = static_cast<Eigen::Index>(embeddings.dim());
  const auto n_cat = categories.cols();
  Matrix<Scalar> out(categories.rows(), n_cat * dim + scaled.cols());
  for (Eigen::Index r = 0; r < categories.rows(); ++r) {
    for (Eigen::Index j = 0; j < n_cat; ++j) {
      const auto row = static_cast<Eigen::Index>(embeddings.offset(static_cast<std::size_t>(j))) + categories(r, j);
      out.row(r).segment(j * dim, dim) = embeddings.weights.row(row);
    }
    out.row(r).tail(scaled.cols()) = scaled.row(r).template cast<Scalar>();
  }
  return out;
}

template <typename Scalar>
struct EncodedBatch {
  Matrix<Scalar> values;
  IndexVector labels;
};

template <typename Scalar>
EncodedBatch<Scalar> encode(const Dataset& data, const Embeddings<Scalar>& embeddings, const NumericScaler& scaler) {
  return {encode_rows(data.categories, scaler.scale(data.numerics), embeddings), label_indices(data)};
}

// Inverse of encode: nearest-embedding lookup per categorical slice, unscale
// for the numeric block.
template <typename Scalar>
Dataset decode(const Matrix<Scalar>& encoded, const TableSchema& schema, const Embeddings<Scalar>& embeddings,
               const NumericScaler& scaler) {
  const auto dim = static_cast<Eigen::Index>(embeddings.dim());
  const auto n_cat = static_cast<Eigen::Index>(schema.categorical_columns().size());
  const auto n_num = static_cast<Eigen::Index>(schema.numeric_columns().size());
  if (encoded.cols() != n_cat * dim + n_num)
    throw Error(ErrorKind::SchemaMismatch, "encoded width does not match the schema");

  Dataset out(schema, static_cast<std::size_t>(encoded.rows()));
  for (Eigen::Index r = 0; r < encoded.rows(); ++r)
    for (Eigen::Index j = 0; j < n_cat; ++j)
      out.categories(r, j) = static_cast<std::int32_t>(
          embeddings.nearest(static_cast<std::size_t>(j), encoded.row(r).segment(j * dim, dim)));
  out.numerics = scaler.unscale(Matrix<double>(encoded.rightCols(n_num).template cast<double>()));
  return out;
}

}  // namespace tabsynth
