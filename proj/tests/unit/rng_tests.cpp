#include "doctest.h"

#include "shel/rng.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

using namespace shel;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors for the 10-round Philox 4x32 block cipher.
  {
    const auto out = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("uniform draws live in the half-open unit interval") {
  NormalStream rng({1234u, 0u});
  double lo = 2.0, hi = -1.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi <= 1.0);
}

TEST_CASE("normal stream is deterministic per seed and distinct per stream") {
  NormalStream a({77u, 3u});
  NormalStream b({77u, 3u});
  NormalStream c({77u, 4u});
  bool same = true, differ = false;
  for (int i = 0; i < 256; ++i) {
    const double xa = a.normal();
    const double xb = b.normal();
    const double xc = c.normal();
    same = same && (xa == xb);
    differ = differ || (xa != xc);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("normal moments match the standard gaussian") {
  NormalStream rng({20260819u, 9u});
  const int n = 400000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n;
  const double kurt = s4 / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(double(n)));          // SE = 1/sqrt(n)
  CHECK(std::abs(var - 1.0) < 7.0 / std::sqrt(double(n)));     // SE ~ sqrt(2/n)
  CHECK(std::abs(kurt - 3.0) < 30.0 / std::sqrt(double(n)));   // SE ~ sqrt(96/n)
}

TEST_CASE("distinct streams are uncorrelated") {
  NormalStream a({555u, 0u});
  NormalStream b({555u, 1u});
  const int n = 100000;
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += a.normal() * b.normal();
  CHECK(std::abs(dot / n) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("bulk normals agree with repeated scalar draws") {
  NormalStream a({99u, 2u});
  NormalStream b({99u, 2u});
  std::vector<double> bulk(101);
  a.normals(bulk);
  for (double v : bulk) CHECK(v == b.normal());
}

TEST_CASE("splitmix64 scrambles zero") {
  // Fixed point sanity: splitmix64 of 0 must not be 0 and must be reproducible.
  const std::uint64_t h0 = splitmix64(0u);
  CHECK(h0 != 0u);
  CHECK(h0 == splitmix64(0u));
  CHECK(splitmix64(1u) != h0);
}
