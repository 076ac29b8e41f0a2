#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/core.hpp"

using namespace nlos;

TEST_CASE("round_trip_bin") {
  ScanGeometry g;
  CHECK(round_trip_bin(g, 0.0) == 0u);
  // 2 m / (c * 32 ps) = 208.47...
  const double oracle = std::floor(2.0 / (299792458.0 * 32e-12));
  CHECK(oracle == 208.0);
  CHECK(round_trip_bin(g, 1.0) == 208u);
  CHECK_FALSE(round_trip_bin(g, 10.0).has_value());
  CHECK(std::floor(20.0 / (299792458.0 * 32e-12)) == 2084.0);
  // Last representable bin and the first distance past it.
  CHECK(round_trip_bin(g, g.max_range() * (1.0 - 1e-9)) == 511u);
  CHECK_FALSE(round_trip_bin(g, g.max_range() * (1.0 + 1e-9)).has_value());
}

TEST_CASE("round_trip_bin is monotone in distance") {
  ScanGeometry g;
  CounterRng rng(7, 0);
  std::vector<double> d(2000);
  for (double& x : d) x = rng.uniform(0.0, 3.0);
  std::sort(d.begin(), d.end());
  std::size_t prev = 0;
  for (double x : d) {
    const auto b = round_trip_bin(g, x);
    const std::size_t v = b ? *b : std::numeric_limits<std::size_t>::max();
    REQUIRE(v >= prev);
    prev = v;
  }
}

TEST_CASE("scan positions sit at pixel centers on z = 0") {
  ScanGeometry g;
  g.nx = 4;
  g.ny = 2;
  g.wall_width = 2.0;
  g.wall_height = 1.0;
  const auto p = g.scan_position(0, 0);
  CHECK(p.x == doctest::Approx(-0.75));
  CHECK(p.y == doctest::Approx(-0.25));
  CHECK(p.z == 0.0);
  const auto q = g.scan_position(3, 1);
  CHECK(q.x == doctest::Approx(0.75));
  CHECK(q.y == doctest::Approx(0.25));
}

TEST_CASE("geometry validation") {
  ScanGeometry g;
  CHECK_NOTHROW(g.validate());
  for (int which = 0; which < 6; ++which) {
    ScanGeometry b;
    switch (which) {
      case 0: b.nx = 0; break;
      case 1: b.ny = 0; break;
      case 2: b.n_bins = 0; break;
      case 3: b.wall_width = 0.0; break;
      case 4: b.wall_height = -1.0; break;
      default: b.bin_width = 0.0; break;
    }
    CHECK_THROWS_AS(b.validate(), ValidationError);
  }
}

TEST_CASE("transient volume layout and validation") {
  const auto g = testutil::small_geometry(3, 5);
  TransientVolume v(g);
  CHECK(v.data().size() == 45);
  CHECK(v.offset(2, 1, 4) == (2 * 3 + 1) * 5 + 4);
  v.at(2, 1, 4) = 9.0;
  CHECK(v.histogram(2 * 3 + 1)[4] == 9.0);
  CHECK_THROWS_AS(TransientVolume(g, std::vector<double>(44)), ValidationError);
  std::vector<double> bad(45, 0.0);
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TransientVolume(g, bad), ValidationError);
}

TEST_CASE("normalize_per_transient") {
  auto g = testutil::small_geometry(1, 3);
  g.nx = 2;
  TransientVolume v(g, {2.0, 4.0, 0.0, 0.0, 0.0, 0.0});
  const auto n = normalize_per_transient(v);
  CHECK(n.data() == std::vector<double>{0.5, 1.0, 0.0, 0.0, 0.0, 0.0});

  TransientVolume unit(g, {0.25, 1.0, 0.0, 1.0, 0.5, 0.0});
  CHECK(normalize_per_transient(unit).data() == unit.data());
}

TEST_CASE("normalize_per_transient is idempotent and bounded") {
  const auto g = testutil::small_geometry(6, 17);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto v = testutil::random_volume(g, seed, 0.0, 50.0);
    // Leave one histogram all zero.
    for (double& x : v.histogram(seed % 36)) x = 0.0;
    const auto once = normalize_per_transient(v);
    const auto twice = normalize_per_transient(once);
    for (std::size_t i = 0; i < once.data().size(); ++i) {
      REQUIRE(once.data()[i] >= 0.0);
      REQUIRE(once.data()[i] <= 1.0);
      REQUIRE(std::abs(twice.data()[i] - once.data()[i]) <= std::numeric_limits<double>::epsilon());
    }
    for (std::size_t h = 0; h < 36; ++h) {
      double m = 0.0;
      for (double x : once.histogram(h)) m = std::max(m, x);
      CHECK(m == (h == seed % 36 ? 0.0 : 1.0));
    }
  }
}

TEST_CASE("recon volume geometry") {
  ReconVolume r({-1, -1, 0}, {0.5, 0.25, 0.1}, {2, 3, 4});
  CHECK(r.data().size() == 24);
  const auto c = r.voxel_center(1, 2, 3);
  CHECK(c.x == doctest::Approx(-1 + 3.5 * 0.5));
  CHECK(c.y == doctest::Approx(-1 + 2.5 * 0.25));
  CHECK(c.z == doctest::Approx(0.15));
  CHECK_THROWS_AS(ReconVolume({0, 0, 0}, {0, 1, 1}, {1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(ReconVolume({0, 0, 0}, {1, 1, 1}, {0, 1, 1}), ValidationError);
}

TEST_CASE("counter rng is a pure function of key, stream and draw") {
  CounterRng a(5, 9), b(5, 9), c(5, 10);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng r(1, 1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}
