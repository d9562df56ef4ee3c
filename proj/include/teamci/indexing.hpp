#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace teamci {

// Row-major mixed-radix indexer over a list of extents.  The first digit is
// the most significant one, so flat order equals lexicographic order of the
// digit tuples.
class JointIndexer {
 public:
  JointIndexer() = default;

  explicit JointIndexer(std::vector<std::size_t> extents)
      : extents_(std::move(extents)), strides_(extents_.size(), 1) {
    total_ = 1;
    for (std::size_t i = extents_.size(); i-- > 0;) {
      strides_[i] = total_;
      total_ *= extents_[i];
    }
  }

  std::size_t rank() const { return extents_.size(); }
  std::size_t total() const { return total_; }
  std::size_t extent(std::size_t i) const { return extents_[i]; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  std::size_t encode(std::span<const std::size_t> digits) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < extents_.size(); ++i) flat += digits[i] * strides_[i];
    return flat;
  }

  void decode(std::size_t flat, std::span<std::size_t> digits) const {
    for (std::size_t i = 0; i < extents_.size(); ++i) {
      digits[i] = flat / strides_[i];
      flat %= strides_[i];
    }
  }

 private:
  std::vector<std::size_t> extents_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

// base^exp, or nullopt on overflow past limit.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::uint64_t exp,
                                                std::uint64_t limit = UINT64_MAX) {
  std::uint64_t out = 1;
  for (std::uint64_t k = 0; k < exp; ++k) {
    if (base != 0 && out > limit / base) return std::nullopt;
    out *= base;
  }
  return out;
}

inline std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b,
                                                std::uint64_t limit = UINT64_MAX) {
  if (a != 0 && b > limit / a) return std::nullopt;
  return a * b;
}

}  // namespace teamci
