#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emdg {

/// v x m matrix of embedding coordinates plus optional token labels.
/// Squared row norms are precomputed once; they feed the product-form
/// distance kernels. Immutable after construction.
class EmbeddingVocabulary {
 public:
  /// coords is row-major with v*m entries; tokens is empty or has v entries.
  EmbeddingVocabulary(std::size_t dim, std::vector<double> coords,
                      std::vector<std::string> tokens = {});

  std::size_t size() const noexcept { return coords_.size() / dim_; }  // v
  std::size_t dim() const noexcept { return dim_; }                    // m

  std::span<const double> coord(std::size_t u) const {
    return {coords_.data() + u * dim_, dim_};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  double squared_norm(std::size_t u) const { return squared_norms_[u]; }
  const std::vector<double>& squared_norms() const noexcept { return squared_norms_; }

  /// Content fingerprint used to tie databases to the vocabulary they were
  /// built against.
  std::uint64_t content_hash() const noexcept { return hash_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<std::string> tokens_;
  std::vector<double> squared_norms_;
  std::uint64_t hash_ = 0;
};

}  // namespace emdg
