#include "emdg/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emdg/error.hpp"

namespace emdg {

Histogram::Histogram(std::vector<HistogramBin> bins) : bins_(std::move(bins)) {
  for (std::size_t pos = 0; pos < bins_.size(); ++pos) {
    const HistogramBin& b = bins_[pos];
    if (!std::isfinite(b.weight) || b.weight < 0.0) {
      throw_error(ErrorKind::InvalidWeight,
                  "bin " + std::to_string(b.index) + " has weight " + std::to_string(b.weight));
    }
    if (pos > 0 && bins_[pos - 1].index >= b.index) {
      throw_error(ErrorKind::IndexOutOfRange,
                  "bin indices must be strictly increasing near index " +
                      std::to_string(b.index));
    }
    total_ += b.weight;
  }
}

bool Histogram::is_normalized(double eps) const noexcept {
  return std::abs(total_ - 1.0) <= eps;
}

std::uint32_t Histogram::index_bound() const noexcept {
  return bins_.empty() ? 0 : bins_.back().index + 1;
}

Histogram normalize_histogram(std::vector<std::pair<std::uint32_t, double>> raw,
                              std::size_t vocab_size) {
  for (const auto& [index, weight] : raw) {
    if (index >= vocab_size) {
      throw_error(ErrorKind::IndexOutOfRange,
                  "bin index " + std::to_string(index) + " >= vocabulary size " +
                      std::to_string(vocab_size));
    }
    if (!std::isfinite(weight) || weight < 0.0) {
      throw_error(ErrorKind::InvalidWeight,
                  "bin " + std::to_string(index) + " has weight " + std::to_string(weight));
    }
  }

  std::sort(raw.begin(), raw.end());

  // Merge duplicate indices by summing; tokenized text produces repeats.
  std::vector<HistogramBin> bins;
  bins.reserve(raw.size());
  double total = 0.0;
  for (const auto& [index, weight] : raw) {
    if (!bins.empty() && bins.back().index == index) {
      bins.back().weight += weight;
    } else {
      bins.push_back({index, weight});
    }
    total += weight;
  }

  if (total <= 0.0) {
    throw_error(ErrorKind::AllZeroMass, "histogram has no positive weight");
  }

  for (HistogramBin& b : bins) {
    b.weight /= total;  // explicit zeros stay zero and stay stored
  }
  return Histogram(std::move(bins));
}

}  // namespace emdg
