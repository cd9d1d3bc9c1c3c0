#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace dann {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed, a purpose tag and integer ids.
///
/// Every consumer of randomness (feature draws, noise, shuffles, folds,
/// initialization) gets its own stream, so adding a draw in one place never
/// perturbs another. The derivation only uses integer arithmetic and is
/// identical on every platform.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t parent, std::string_view purpose,
                                        std::initializer_list<std::uint64_t> ids = {}) noexcept;

/// Portable random stream on top of std::mt19937_64.
///
/// The engine's output sequence is fixed by the standard; the distribution
/// transforms below are written out by hand because the std distributions
/// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform on (0, 1); never returns 0.
  double uniform_open01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (cosine branch only, one output per call).
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dann
