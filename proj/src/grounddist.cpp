#include "emdg/grounddist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emdg/error.hpp"
#include "parallel.hpp"

namespace emdg {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw_error(ErrorKind::ShapeMismatch, "cost matrix data does not match its shape");
  }
  for (double x : data_) {
    if (!std::isfinite(x) || x < 0.0) {
      throw_error(ErrorKind::NonFiniteValue, "cost matrix entries must be finite and >= 0");
    }
  }
}

CostMatrix CostMatrix::transposed() const {
  std::vector<double> t(data_.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      t[j * rows_ + i] = data_[i * cols_ + j];
    }
  }
  return CostMatrix(cols_, rows_, std::move(t));
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw_error(ErrorKind::DimensionMismatch,
                std::to_string(u.size()) + "-dim vs " + std::to_string(v.size()) + "-dim");
  }
  double s = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) {
    const double diff = u[d] - v[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

CostMatrix cost_matrix(const CoordMatrix& p_coords, const CoordMatrix& q_coords) {
  if (p_coords.dim != q_coords.dim) {
    throw_error(ErrorKind::DimensionMismatch,
                std::to_string(p_coords.dim) + "-dim vs " + std::to_string(q_coords.dim) + "-dim");
  }
  const std::size_t hp = p_coords.rows();
  const std::size_t hq = q_coords.rows();
  std::vector<double> data(hp * hq);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(hp); ++i) {
    for (std::size_t j = 0; j < hq; ++j) {
      data[i * hq + j] = euclidean_distance(p_coords.row(i), q_coords.row(j));
    }
  }
  return CostMatrix(hp, hq, std::move(data));
}

CoordMatrix gather_coords(const EmbeddingVocabulary& vocab, const Histogram& h) {
  if (h.index_bound() > vocab.size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "histogram references index " + std::to_string(h.index_bound() - 1) +
                    " >= vocabulary size " + std::to_string(vocab.size()));
  }
  CoordMatrix out;
  out.dim = vocab.dim();
  out.data.reserve(h.size() * vocab.dim());
  for (const HistogramBin& b : h.bins()) {
    const auto c = vocab.coord(b.index);
    out.data.insert(out.data.end(), c.begin(), c.end());
  }
  return out;
}

VocabQueryDistances vocab_query_distances(const EmbeddingVocabulary& vocab,
                                          const CoordMatrix& q_coords, std::size_t block_rows,
                                          int threads) {
  if (vocab.dim() != q_coords.dim) {
    throw_error(ErrorKind::DimensionMismatch,
                std::to_string(vocab.dim()) + "-dim vocabulary vs " +
                    std::to_string(q_coords.dim) + "-dim query");
  }
  const std::size_t v = vocab.size();
  const std::size_t h = q_coords.rows();
  const std::size_t m = vocab.dim();
  if (block_rows == 0) {
    block_rows = 256;
  }

  std::vector<double> q_norm2(h);
  for (std::size_t j = 0; j < h; ++j) {
    double s = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      const double x = q_coords.data[j * m + d];
      s += x * x;
    }
    q_norm2[j] = s;
  }

  VocabQueryDistances out;
  out.vocab_rows = v;
  out.query_bins = h;
  out.d.resize(v * h);

  const int nt = detail::pick_threads(threads);
  (void)nt;
  // Row blocks bound the working set; each row is written by one thread only.
  for (std::size_t base = 0; base < v; base += block_rows) {
    const std::size_t stop = std::min(v, base + block_rows);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t u = static_cast<std::ptrdiff_t>(base);
         u < static_cast<std::ptrdiff_t>(stop); ++u) {
      const double* vrow = vocab.coords().data() + u * m;
      const double vn2 = vocab.squared_norm(u);
      double* drow = out.d.data() + u * h;
      for (std::size_t j = 0; j < h; ++j) {
        const double* qrow = q_coords.data.data() + j * m;
        double dot = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
          dot += vrow[d] * qrow[d];
        }
        // Cancellation can leave a tiny negative; clamp so overlapping
        // coordinates give exactly 0.
        const double sq = vn2 - 2.0 * dot + q_norm2[j];
        drow[j] = std::sqrt(sq > 0.0 ? sq : 0.0);
      }
    }
  }
  return out;
}

}  // namespace emdg
