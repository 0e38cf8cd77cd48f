#include "sdelearn/rng.hpp"

#include <cmath>

namespace sdelearn {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    round_once(counter, key);
  }
  return counter;
}

std::array<std::uint32_t, 4> PathRng::block(std::uint64_t index) const {
  return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                     static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)},
                    key_);
}

double PathRng::uniform(std::uint64_t index) const {
  const auto w = block(index);
  const std::uint64_t bits = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double PathRng::normal(std::uint64_t index) const {
  const auto w = block(index);
  const std::uint64_t b1 = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
  const std::uint64_t b2 = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
  const double u1 = (static_cast<double>(b1 >> 11) + 1.0) * 0x1.0p-53;  // in (0, 1]
  const double u2 = static_cast<double>(b2 >> 11) * 0x1.0p-53;          // in [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace sdelearn
