#include "emdg/vocabulary.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "emdg/error.hpp"

namespace emdg {

namespace {

// FNV-1a over the raw coordinate bytes; also used by the container checksum.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

EmbeddingVocabulary::EmbeddingVocabulary(std::size_t dim, std::vector<double> coords,
                                         std::vector<std::string> tokens)
    : dim_(dim), coords_(std::move(coords)), tokens_(std::move(tokens)) {
  if (dim_ == 0) {
    throw_error(ErrorKind::DimensionMismatch, "vocabulary dimensionality must be >= 1");
  }
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw_error(ErrorKind::ShapeMismatch,
                "coordinate count " + std::to_string(coords_.size()) +
                    " is not a positive multiple of dim " + std::to_string(dim_));
  }
  const std::size_t v = coords_.size() / dim_;
  if (!tokens_.empty() && tokens_.size() != v) {
    throw_error(ErrorKind::ShapeMismatch,
                "token count " + std::to_string(tokens_.size()) + " != vocabulary size " +
                    std::to_string(v));
  }
  for (double x : coords_) {
    if (!std::isfinite(x)) {
      throw_error(ErrorKind::NonFiniteValue, "vocabulary coordinate is not finite");
    }
  }

  squared_norms_.resize(v);
  for (std::size_t u = 0; u < v; ++u) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      const double x = coords_[u * dim_ + d];
      s += x * x;
    }
    squared_norms_[u] = s;
  }

  hash_ = fnv1a(coords_.data(), coords_.size() * sizeof(double),
                0xcbf29ce484222325ULL ^ (static_cast<std::uint64_t>(dim_) * 0x9e3779b97f4a7c15ULL));
}

}  // namespace emdg
