#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hiddenset {

/// Raised for out-of-domain distribution or model parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator keyed by (seed, stream).
///
/// The n-th output is a pure function of (seed, stream, n): the key is a mix
/// of seed and stream, and outputs follow the SplitMix64 sequence started at
/// that key. Nothing depends on platform RNG facilities, so a given
/// (seed, stream) reproduces bit-for-bit everywhere.
class RngState {
 public:
  constexpr RngState(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed),
        stream_(stream),
        key_(detail::mix64(seed ^ detail::mix64(stream + detail::kGolden))) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream() const noexcept { return stream_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Lemire's multiply-and-reject, unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream id for replication `replication` of cell `cell`.
///
/// For a fixed cell the map replication -> stream is a bijection, so derived
/// streams never collide within a cell.
constexpr std::uint64_t derive_stream(std::uint64_t cell,
                                      std::uint64_t replication) noexcept {
  return detail::mix64(detail::mix64(cell * 0xD1B54A32D192ED03ULL + 1) +
                       replication);
}

inline RngState derive_rng(std::uint64_t master_seed, std::uint64_t cell,
                           std::uint64_t replication) noexcept {
  return RngState(master_seed, derive_stream(cell, replication));
}

}  // namespace hiddenset
