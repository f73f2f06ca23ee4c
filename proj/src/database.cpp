#include "emdg/database.hpp"

#include <algorithm>
#include <string>

#include "emdg/error.hpp"

namespace emdg {

HistogramDatabase::HistogramDatabase(std::shared_ptr<const EmbeddingVocabulary> vocab,
                                     std::vector<std::uint64_t> row_offsets,
                                     std::vector<std::uint32_t> col_indices,
                                     std::vector<double> values,
                                     std::vector<std::int32_t> labels)
    : vocab_(std::move(vocab)),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  if (!vocab_) {
    throw_error(ErrorKind::VocabularyMismatch, "database requires a vocabulary");
  }
  if (labels_.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "database requires at least one histogram");
  }
  if (row_offsets_.size() != labels_.size() + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
    throw_error(ErrorKind::ShapeMismatch, "row-compressed layout is inconsistent");
  }
  const std::size_t v = vocab_->size();
  for (std::size_t u = 0; u < labels_.size(); ++u) {
    if (row_offsets_[u] > row_offsets_[u + 1]) {
      throw_error(ErrorKind::ShapeMismatch, "row offsets must be nondecreasing");
    }
    if (row_offsets_[u] == row_offsets_[u + 1]) {
      throw_error(ErrorKind::ShapeMismatch,
                  "row " + std::to_string(u) + " stores no bins");
    }
    for (std::uint64_t pos = row_offsets_[u]; pos < row_offsets_[u + 1]; ++pos) {
      if (col_indices_[pos] >= v) {
        throw_error(ErrorKind::VocabularyMismatch,
                    "row " + std::to_string(u) + " references index " +
                        std::to_string(col_indices_[pos]) + " >= vocabulary size " +
                        std::to_string(v));
      }
      if (pos > row_offsets_[u] && col_indices_[pos - 1] >= col_indices_[pos]) {
        throw_error(ErrorKind::ShapeMismatch,
                    "row " + std::to_string(u) + " indices are not strictly increasing");
      }
    }
  }
}

Histogram HistogramDatabase::row(std::size_t u) const {
  const auto idx = row_indices(u);
  const auto val = row_values(u);
  std::vector<HistogramBin> bins(idx.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    bins[pos] = {idx[pos], val[pos]};
  }
  return Histogram(std::move(bins));
}

DatasetStats HistogramDatabase::stats() const {
  DatasetStats s;
  s.n = size();
  s.avg_h = static_cast<double>(values_.size()) / static_cast<double>(size());
  std::vector<bool> used(vocab_->size(), false);
  for (std::uint32_t c : col_indices_) {
    used[c] = true;
  }
  s.v_used = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  return s;
}

HistogramDatabase HistogramDatabase::prefix(std::size_t n) const {
  if (n == 0 || n > size()) {
    throw_error(ErrorKind::ShapeMismatch,
                "prefix size " + std::to_string(n) + " outside [1, " + std::to_string(size()) + "]");
  }
  const std::uint64_t end = row_offsets_[n];
  return HistogramDatabase(
      vocab_, std::vector<std::uint64_t>(row_offsets_.begin(), row_offsets_.begin() + n + 1),
      std::vector<std::uint32_t>(col_indices_.begin(), col_indices_.begin() + end),
      std::vector<double>(values_.begin(), values_.begin() + end),
      std::vector<std::int32_t>(labels_.begin(), labels_.begin() + n));
}

HistogramDatabase build_database(const std::vector<Histogram>& histograms,
                                 std::vector<std::int32_t> labels,
                                 std::shared_ptr<const EmbeddingVocabulary> vocab) {
  if (!vocab) {
    throw_error(ErrorKind::VocabularyMismatch, "build_database requires a vocabulary");
  }
  if (histograms.empty()) {
    throw_error(ErrorKind::ShapeMismatch, "build_database requires at least one histogram");
  }
  if (labels.size() != histograms.size()) {
    throw_error(ErrorKind::LabelCountMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(histograms.size()) + " histograms");
  }

  std::vector<std::uint64_t> row_offsets;
  row_offsets.reserve(histograms.size() + 1);
  row_offsets.push_back(0);
  std::size_t nnz = 0;
  for (const Histogram& h : histograms) {
    if (h.index_bound() > vocab->size()) {
      throw_error(ErrorKind::VocabularyMismatch,
                  "histogram references index " + std::to_string(h.index_bound() - 1) +
                      " >= vocabulary size " + std::to_string(vocab->size()));
    }
    nnz += h.size();
    row_offsets.push_back(nnz);
  }

  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;
  col_indices.reserve(nnz);
  values.reserve(nnz);
  for (const Histogram& h : histograms) {
    for (const HistogramBin& b : h.bins()) {
      col_indices.push_back(b.index);
      values.push_back(b.weight);
    }
  }

  return HistogramDatabase(std::move(vocab), std::move(row_offsets), std::move(col_indices),
                           std::move(values), std::move(labels));
}

}  // namespace emdg
