#pragma once

#include <array>
#include <cstdint>

namespace sdelearn {

/// Philox 4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
/// Pure function of (counter, key): every 128-bit counter maps to four
/// 32-bit words, so draws are addressed rather than consumed in sequence.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Random stream for one simulated path, keyed by (seed, path index).
/// Addressed access makes results bit-identical under any parallel schedule:
/// the variate at (seed, path, index) never depends on evaluation order.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path) {}

  /// Uniform variate in the open interval (0, 1).
  double uniform(std::uint64_t index) const;

  /// Standard normal via Box-Muller (exact transform of two uniforms).
  double normal(std::uint64_t index) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
};

}  // namespace sdelearn
