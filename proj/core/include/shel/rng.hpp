#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace shel {

/// Master seed plus stream index. Every independent random object in a run
/// (each Monte Carlo path, each stochastic boundary path) owns a distinct
/// stream of the same master seed, so results do not depend on the order in
/// which paths are generated.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

/// One block of the Philox-4x32 counter-based generator, 10 rounds.
/// Exposed so known-answer tests can pin the implementation to the
/// published test vectors.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 scrambler; used to whiten the master seed into a Philox key.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic stream of uniforms and standard normals.
///
/// The key is derived from SeedSpec::master, the stream id occupies the two
/// upper counter words, and the block index the two lower ones: the draw at
/// any position is a pure function of (master, stream, position). Identical
/// seeds reproduce identical sequences bit for bit on every platform.
class NormalStream {
 public:
  explicit NormalStream(SeedSpec seed);

  /// Uniform on (0, 1] (never returns 0, safe under log()).
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  /// Fill `out` with independent standard normals.
  void normals(std::span<double> out);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shel
