#pragma once

// Pinned pseudo-random generation.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++
// standard. Seeds for independent streams are derived with the SplitMix64
// finalizer. The distributions below are implemented here instead of using
// <random>'s, whose algorithms are implementation-defined; this keeps fixed
// seed goldens identical across standard libraries.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace dbkd {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the stream identified by (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal variate (Marsaglia polar method).
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dbkd
