#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emdg/histogram.hpp"
#include "emdg/vocabulary.hpp"

namespace emdg {

/// Row-major list of embedding coordinates (rows() points of dimension dim).
struct CoordMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Dense h_p x h_q nonnegative ground-distance matrix, row-major.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& data() const noexcept { return data_; }

  CostMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense v x h matrix of distances between every vocabulary coordinate and
/// every query bin coordinate (the Phase-1 "D" matrix).
struct VocabQueryDistances {
  std::size_t vocab_rows = 0;
  std::size_t query_bins = 0;
  std::vector<double> d;  // row-major vocab_rows x query_bins

  double at(std::size_t u, std::size_t j) const { return d[u * query_bins + j]; }
};

/// L2 distance; accumulation runs in ascending dimension order so results are
/// deterministic. Throws DimensionMismatch on unequal lengths.
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Entry-wise Euclidean distances between two coordinate lists.
CostMatrix cost_matrix(const CoordMatrix& p_coords, const CoordMatrix& q_coords);

/// Coordinates of a histogram's bins gathered from the vocabulary.
CoordMatrix gather_coords(const EmbeddingVocabulary& vocab, const Histogram& h);

/// D[u][j] = sqrt(max(0, |V_u|^2 - 2 V_u.Q_j + |Q_j|^2)). The expanded product
/// form is clamped at zero before the square root so coinciding coordinates
/// give exactly 0. Computed in blocks of `block_rows` vocabulary rows,
/// parallel across rows.
VocabQueryDistances vocab_query_distances(const EmbeddingVocabulary& vocab,
                                          const CoordMatrix& q_coords,
                                          std::size_t block_rows = 256,
                                          int threads = 0);

}  // namespace emdg
