#include <doctest.h>

#include <cmath>
#include <vector>

#include "inspect/rng.hpp"

using namespace inspect;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Published Random123 test vectors.
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("derived streams are reproducible and distinct") {
  Rng a = Rng::derive(7, "sample", 3);
  Rng b = Rng::derive(7, "sample", 3);
  Rng c = Rng::derive(7, "sample", 4);
  Rng d = Rng::derive(7, "train", 3);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differ_c |= x != c.next_u64();
    differ_d |= x != d.next_u64();
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("uniform stays in the open interval and uniform_int covers its range") {
  Rng rng = Rng::derive(1, "test");
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    const auto k = rng.uniform_int(3, 8);
    REQUIRE(k >= 3);
    REQUIRE(k <= 8);
    ++hits[k - 3];
  }
  for (int h : hits) CHECK(std::abs(h - 10000) < 500);
  CHECK_THROWS(rng.uniform_int(2, 1));
}

TEST_CASE("normal variates have unit moments") {
  Rng rng = Rng::derive(2, "test");
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 0.1);
}
