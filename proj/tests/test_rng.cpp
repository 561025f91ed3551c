#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "suprec/rng.hpp"

using suprec::Philox4x32;
using suprec::Stream;
using suprec::StreamDomain;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Stream a(42, StreamDomain::measurement, 3, 7);
  Stream b(42, StreamDomain::measurement, 3, 7);
  Stream c(42, StreamDomain::measurement, 3, 8);
  Stream d(42, StreamDomain::noise, 3, 7);
  bool differs_c = false, differs_d = false;
  for (int k = 0; k < 64; ++k) {
    const auto va = a();
    CHECK(va == b());
    differs_c |= va != c();
    differs_d |= va != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("uniform stays in the open unit interval, normal moments") {
  Stream rng(1, StreamDomain::monte_carlo);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    const double g = rng.normal();
    sum += g;
    sum2 += g * g;
    sum4 += g * g * g * g;
  }
  // 5-sigma bands: se(mean) = 1/sqrt(n), se(E g^2) = sqrt(2/n), se(E g^4) = sqrt(96/n)
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("below is unbiased over a small range") {
  Stream rng(9, StreamDomain::trial);
  std::array<int, 5> counts{};
  const int n = 50000;
  for (int k = 0; k < n; ++k) ++counts[rng.below(5)];
  for (int c : counts) CHECK(std::abs(c - n / 5) < 5 * std::sqrt(n * 0.2 * 0.8));
}

TEST_CASE("derived seeds do not collide on a grid") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a)
    for (std::uint64_t b = 0; b < 100; ++b) seen.insert(suprec::derive_seed(5, a, b));
  CHECK(seen.size() == 10000);
}
