#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cltcert {

/// Versioned name of the pseudo-random algorithm; recorded in every report.
inline constexpr const char* kGeneratorName = "mt19937_64+seed_seq/v1";

/// Deterministic stream of uniforms. std::mt19937_64 and std::seed_seq are
/// specified bit-exactly by the standard, and the uniform mapping is ours, so
/// a (seed, stream ids) pair gives the same numbers on every platform.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  /// Uniform on (0, 1].
  double uniform_open_left() noexcept { return 1.0 - uniform(); }

  std::uint64_t bits() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cltcert
