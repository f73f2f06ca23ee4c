#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "emdg/histogram.hpp"
#include "emdg/vocabulary.hpp"

namespace emdg {

struct DatasetStats {
  std::size_t n = 0;
  double avg_h = 0.0;       // stored bins per histogram
  std::size_t v_used = 0;   // distinct vocabulary indices referenced
};

/// n histograms in row-compressed sparse layout over a shared vocabulary,
/// with one class label per row. Immutable after construction.
class HistogramDatabase {
 public:
  HistogramDatabase(std::shared_ptr<const EmbeddingVocabulary> vocab,
                    std::vector<std::uint64_t> row_offsets,
                    std::vector<std::uint32_t> col_indices,
                    std::vector<double> values,
                    std::vector<std::int32_t> labels);

  std::size_t size() const noexcept { return labels_.size(); }  // n
  std::size_t nnz() const noexcept { return values_.size(); }

  const EmbeddingVocabulary& vocab() const noexcept { return *vocab_; }
  std::shared_ptr<const EmbeddingVocabulary> vocab_ptr() const noexcept { return vocab_; }
  std::uint64_t vocab_ref() const noexcept { return vocab_->content_hash(); }

  std::size_t row_size(std::size_t u) const {
    return static_cast<std::size_t>(row_offsets_[u + 1] - row_offsets_[u]);
  }
  std::span<const std::uint32_t> row_indices(std::size_t u) const {
    return {col_indices_.data() + row_offsets_[u], row_size(u)};
  }
  std::span<const double> row_values(std::size_t u) const {
    return {values_.data() + row_offsets_[u], row_size(u)};
  }

  /// Materializes row u as a Histogram (exact copy of the stored bins).
  Histogram row(std::size_t u) const;

  std::int32_t label(std::size_t u) const { return labels_[u]; }
  const std::vector<std::int32_t>& labels() const noexcept { return labels_; }

  const std::vector<std::uint64_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::uint32_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  DatasetStats stats() const;

  /// Copy of the first n rows sharing the same vocabulary. Used by the
  /// scaling benchmarks.
  HistogramDatabase prefix(std::size_t n) const;

 private:
  std::shared_ptr<const EmbeddingVocabulary> vocab_;
  std::vector<std::uint64_t> row_offsets_;   // n + 1
  std::vector<std::uint32_t> col_indices_;   // nnz
  std::vector<double> values_;               // nnz
  std::vector<std::int32_t> labels_;         // n
};

/// Packs histograms into row-compressed form, keeping input order. All
/// histograms must index into the given vocabulary and labels must align
/// one-to-one with the histograms.
HistogramDatabase build_database(const std::vector<Histogram>& histograms,
                                 std::vector<std::int32_t> labels,
                                 std::shared_ptr<const EmbeddingVocabulary> vocab);

}  // namespace emdg
