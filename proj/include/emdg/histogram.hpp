#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace emdg {

struct HistogramBin {
  std::uint32_t index;  // vocabulary coordinate
  double weight;        // nonnegative mass

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Sparse weight vector over vocabulary bin indices. Bins are sorted by
/// strictly increasing index. Explicit zero-weight bins are legal and kept:
/// support membership is defined by the stored bins, not by weight > 0.
class Histogram {
 public:
  Histogram() = default;

  /// Takes ownership of pre-sorted bins. Throws if indices are not strictly
  /// increasing or any weight is negative or non-finite.
  explicit Histogram(std::vector<HistogramBin> bins);

  const std::vector<HistogramBin>& bins() const noexcept { return bins_; }
  const HistogramBin& bin(std::size_t pos) const { return bins_[pos]; }
  std::size_t size() const noexcept { return bins_.size(); }
  bool empty() const noexcept { return bins_.empty(); }

  /// Sum of all stored weights.
  double total() const noexcept { return total_; }

  /// True when the weights sum to 1 within `eps`.
  bool is_normalized(double eps = 1e-9) const noexcept;

  /// Largest stored index + 1, or 0 for an empty histogram.
  std::uint32_t index_bound() const noexcept;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::vector<HistogramBin> bins_;
  double total_ = 0.0;
};

/// Merges duplicate indices by summing their weights, sorts bins by index,
/// and scales weights so they sum to 1. Explicit zero-weight bins survive.
/// Throws AllZeroMass when every weight is 0 and IndexOutOfRange when any
/// index is >= vocab_size.
Histogram normalize_histogram(std::vector<std::pair<std::uint32_t, double>> raw,
                              std::size_t vocab_size);

}  // namespace emdg
