#include "shel/rng.hpp"

#include <cmath>
#include <numbers>

namespace shel {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u;
  constexpr std::uint32_t M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u;
  constexpr std::uint32_t W1 = 0xBB67AE85u;
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * counter[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    counter = {hi1 ^ counter[1] ^ k0, lo1, hi0 ^ counter[3] ^ k1, lo0};
    k0 += W0;
    k1 += W1;
  }
  return counter;
}

NormalStream::NormalStream(SeedSpec seed) : stream_(seed.stream) {
  const std::uint64_t whitened = splitmix64(seed.master);
  key_ = {static_cast<std::uint32_t>(whitened),
          static_cast<std::uint32_t>(whitened >> 32)};
}

void NormalStream::refill() {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(block_),
      static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  buf_ = philox4x32(counter, key_);
  ++block_;
  buf_pos_ = 0;
}

double NormalStream::uniform() {
  if (buf_pos_ > 2) refill();
  const std::uint64_t hi = buf_[static_cast<std::size_t>(buf_pos_++)];
  const std::uint64_t lo = buf_[static_cast<std::size_t>(buf_pos_++)];
  const std::uint64_t bits = (hi << 32) | lo;
  // 53-bit mantissa, shifted into (0, 1] so log() below never sees 0.
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void NormalStream::normals(std::span<double> out) {
  for (double& v : out) v = normal();
}

}  // namespace shel
