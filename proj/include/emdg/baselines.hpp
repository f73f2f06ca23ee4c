#pragma once

#include <span>
#include <vector>

#include "emdg/database.hpp"
#include "emdg/histogram.hpp"
#include "emdg/vocabulary.hpp"

namespace emdg {

/// One weighted-average embedding vector per document, row-major n x m.
struct CentroidIndex {
  std::size_t dim = 0;
  std::vector<double> centroids;

  std::size_t size() const noexcept { return dim == 0 ? 0 : centroids.size() / dim; }
  std::span<const double> centroid(std::size_t u) const {
    return {centroids.data() + u * dim, dim};
  }
};

/// Cosine similarity between the query and every database row after on-the-fly
/// L2 normalization of the sparse weight vectors. Touches only stored
/// nonzeros. Larger is closer.
std::vector<double> bow_cosine(const HistogramDatabase& db, const Histogram& q,
                               int threads = 0);

/// Weighted average of the embedding vectors of each document's bins.
CentroidIndex build_centroids(const HistogramDatabase& db, const EmbeddingVocabulary& vocab,
                              int threads = 0);

/// Centroid of a single histogram.
std::vector<double> centroid_of(const EmbeddingVocabulary& vocab, const Histogram& h);

/// Euclidean distance from the query centroid to every document centroid.
std::vector<double> wcd(const CentroidIndex& index, std::span<const double> q_centroid,
                        int threads = 0);

}  // namespace emdg
