#include "emdg/baselines.hpp"

#include <cmath>
#include <string>

#include "emdg/error.hpp"
#include "emdg/grounddist.hpp"
#include "parallel.hpp"

namespace emdg {

std::vector<double> bow_cosine(const HistogramDatabase& db, const Histogram& q, int threads) {
  if (q.index_bound() > db.vocab().size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "query references index " + std::to_string(q.index_bound() - 1) +
                    " >= vocabulary size " + std::to_string(db.vocab().size()));
  }
  double qn2 = 0.0;
  for (const HistogramBin& b : q.bins()) {
    qn2 += b.weight * b.weight;
  }
  const double qn = std::sqrt(qn2);

  const std::size_t n = db.size();
  std::vector<double> out(n, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    const auto idx = db.row_indices(u);
    const auto val = db.row_values(u);
    // Two-pointer merge over the sorted supports: only stored bins are read.
    double dot = 0.0;
    double xn2 = 0.0;
    std::size_t a = 0, b = 0;
    while (a < idx.size()) {
      xn2 += val[a] * val[a];
      while (b < q.size() && q.bin(b).index < idx[a]) {
        ++b;
      }
      if (b < q.size() && q.bin(b).index == idx[a]) {
        dot += val[a] * q.bin(b).weight;
      }
      ++a;
    }
    const double xn = std::sqrt(xn2);
    out[u] = (xn > 0.0 && qn > 0.0) ? dot / (xn * qn) : 0.0;
  }
  return out;
}

CentroidIndex build_centroids(const HistogramDatabase& db, const EmbeddingVocabulary& vocab,
                              int threads) {
  if (db.vocab_ref() != vocab.content_hash()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "database was built against a different vocabulary");
  }
  const std::size_t n = db.size();
  const std::size_t m = vocab.dim();
  CentroidIndex index;
  index.dim = m;
  index.centroids.assign(n * m, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    const auto idx = db.row_indices(u);
    const auto val = db.row_values(u);
    double* out = index.centroids.data() + static_cast<std::size_t>(u) * m;
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      const double* coord = vocab.coords().data() + static_cast<std::size_t>(idx[pos]) * m;
      const double w = val[pos];
      for (std::size_t d = 0; d < m; ++d) {
        out[d] += w * coord[d];
      }
    }
  }
  return index;
}

std::vector<double> centroid_of(const EmbeddingVocabulary& vocab, const Histogram& h) {
  if (h.index_bound() > vocab.size()) {
    throw_error(ErrorKind::VocabularyMismatch,
                "histogram references index " + std::to_string(h.index_bound() - 1) +
                    " >= vocabulary size " + std::to_string(vocab.size()));
  }
  std::vector<double> out(vocab.dim(), 0.0);
  for (const HistogramBin& b : h.bins()) {
    const auto coord = vocab.coord(b.index);
    for (std::size_t d = 0; d < coord.size(); ++d) {
      out[d] += b.weight * coord[d];
    }
  }
  return out;
}

std::vector<double> wcd(const CentroidIndex& index, std::span<const double> q_centroid,
                        int threads) {
  if (index.dim != q_centroid.size()) {
    throw_error(ErrorKind::DimensionMismatch,
                std::to_string(index.dim) + "-dim index vs " +
                    std::to_string(q_centroid.size()) + "-dim query centroid");
  }
  const std::size_t n = index.size();
  std::vector<double> out(n, 0.0);
  const int nt = detail::pick_threads(threads);
  (void)nt;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) {
    out[u] = euclidean_distance(index.centroid(static_cast<std::size_t>(u)), q_centroid);
  }
  return out;
}

}  // namespace emdg
