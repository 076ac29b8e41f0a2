#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/renderer.hpp"

using namespace nlos;

namespace {

double total(const TransientVolume& v) { return std::accumulate(v.data().begin(), v.data().end(), 0.0); }

}  // namespace

TEST_CASE("single point above a scan point") {
  // A 1x1 grid on a tiny wall puts the only scan point at the origin.
  ScanGeometry g;
  g.nx = g.ny = 1;
  g.wall_width = g.wall_height = 0.01;
  const auto v = render_confocal(testutil::single_point({0, 0, 1}), g);
  for (std::size_t t = 0; t < g.n_bins; ++t) CHECK(v.at(0, 0, t) == (t == 208 ? 1.0 : 0.0));
}

TEST_CASE("single point deposits albedo / r^4 at the oracle bin on every scan point") {
  const auto g = testutil::small_geometry(9, 256);
  const Vec3 p{0.13, -0.21, 0.57};
  const double albedo = 0.8;
  const auto v = render_confocal(testutil::single_point(p, albedo), g);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const auto w = g.scan_position(ix, iy);
      const double dx = p.x - w.x, dy = p.y - w.y, dz = p.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      const auto bin = static_cast<std::size_t>(std::floor(2.0 * r / (299792458.0 * 32e-12)));
      const long double rl = std::sqrt(static_cast<long double>(dx) * dx + static_cast<long double>(dy) * dy +
                                       static_cast<long double>(dz) * dz);
      const auto amp = static_cast<double>(albedo / (rl * rl * rl * rl));
      for (std::size_t t = 0; t < g.n_bins; ++t) {
        if (t == bin) {
          CHECK(std::abs(v.at(iy, ix, t) - amp) <= std::nextafter(amp, 2 * amp) - amp);
        } else {
          CHECK(v.at(iy, ix, t) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("exponent 0 conserves one unit per scan point") {
  const auto g = testutil::small_geometry(6, 256);
  RenderOptions o;
  o.falloff_exponent = 0;
  const auto v = render_confocal(testutil::single_point({0.1, 0.2, 0.6}), g, o);
  for (std::size_t i = 0; i < g.scan_count(); ++i) {
    double s = 0.0;
    for (double x : v.histogram(i)) s += x;
    CHECK(s == 1.0);
  }
}

TEST_CASE("rendering is linear in the scene") {
  const auto g = testutil::small_geometry(8, 128);
  SceneSpec sa, sb;
  sa.primitive = Primitive::Sphere;
  sa.z = {0.5, 0.5};
  sa.scale = {0.1, 0.1};
  sa.sample_count = 300;
  sb = sa;
  sb.primitive = Primitive::Box;
  sb.seed = 9;
  const auto a = generate_scene(sa), b = generate_scene(sb);
  HiddenScene u = a;
  u.points.insert(u.points.end(), b.points.begin(), b.points.end());
  const auto va = render_confocal(a, g), vb = render_confocal(b, g), vu = render_confocal(u, g);
  for (std::size_t i = 0; i < vu.data().size(); ++i) {
    const double sum = va.data()[i] + vb.data()[i];
    REQUIRE(std::abs(vu.data()[i] - sum) <= 1e-12 * std::max(1.0, std::abs(sum)));
  }

  HiddenScene twice = a;
  twice.points.insert(twice.points.end(), a.points.begin(), a.points.end());
  const auto v2 = render_confocal(twice, g);
  for (std::size_t i = 0; i < v2.data().size(); ++i) REQUIRE(v2.data()[i] == doctest::Approx(2.0 * va.data()[i]).epsilon(1e-12));
}

TEST_CASE("moving a point farther never moves its deposit earlier") {
  const auto g = testutil::small_geometry(4, 256);
  std::size_t prev = 0;
  for (int k = 0; k < 200; ++k) {
    const double z = 0.1 + 0.004 * k;
    const auto v = render_confocal(testutil::single_point({0.05, 0.05, z}), g);
    std::size_t first = g.n_bins;
    for (std::size_t t = 0; t < g.n_bins; ++t)
      if (v.at(0, 0, t) > 0.0) {
        first = t;
        break;
      }
    REQUIRE(first >= prev);
    prev = first;
  }
}

TEST_CASE("nearest and linear weighting deposit the same mass") {
  const auto g = testutil::small_geometry(5, 256);
  RenderOptions lin;
  lin.bin_weighting = BinWeighting::Linear;
  SceneSpec s;
  s.z = {0.5, 0.5};
  s.scale = {0.2, 0.2};
  s.sample_count = 200;
  const auto scene = generate_scene(s);
  const auto a = render_confocal(scene, g);
  const auto b = render_confocal(scene, g, lin);
  CHECK(total(b) == doctest::Approx(total(a)).epsilon(1e-12));
}

TEST_CASE("cosine weighting scales by (z/r)^2") {
  ScanGeometry g;
  g.nx = g.ny = 1;
  g.wall_width = g.wall_height = 0.01;
  RenderOptions o;
  o.include_cosine = true;
  const Vec3 p{0.3, 0.0, 0.4};
  const auto v = render_confocal(testutil::single_point(p), g, o);
  const double expect = (0.4 / 0.5) * (0.4 / 0.5) / std::pow(0.5, 4);
  CHECK(total(v) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("out of range contributions are dropped") {
  const auto g = testutil::small_geometry(2, 16);
  const auto v = render_confocal(testutil::single_point({0, 0, 5.0}), g);
  CHECK(total(v) == 0.0);
}

TEST_CASE("render input validation") {
  const auto g = testutil::small_geometry(2, 16);
  CHECK_THROWS_AS(render_confocal(HiddenScene{}, g), ValidationError);
  CHECK_THROWS_AS(render_confocal(testutil::single_point({0, 0, 0}), g), ValidationError);
  CHECK_THROWS_AS(render_confocal(testutil::single_point({0, 0, 1}, -1.0), g), ValidationError);
  RenderOptions o;
  o.falloff_exponent = 3;
  CHECK_THROWS_AS(render_confocal(testutil::single_point({0, 0, 1}), g, o), ValidationError);
}

TEST_CASE("downsample_spatial") {
  const auto g = testutil::small_geometry(4, 8);
  TransientVolume v(g);
  for (std::size_t i = 0; i < g.scan_count(); ++i)
    for (std::size_t t = 0; t < 8; ++t) v.histogram(i)[t] = static_cast<double>(t + 1);
  const auto d = downsample_spatial(v, 2);
  CHECK(d.nx() == 2);
  CHECK(d.ny() == 2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t t = 0; t < 8; ++t) CHECK(d.histogram(i)[t] == 4.0 * static_cast<double>(t + 1));

  CHECK(downsample_spatial(v, 1).data() == v.data());
  CHECK_THROWS_AS(downsample_spatial(v, 3), ValidationError);

  const auto r = testutil::random_volume(testutil::small_geometry(12, 10), 77);
  const auto rd = downsample_spatial(r, 3);
  CHECK(total(rd) == doctest::Approx(total(r)).epsilon(1e-12));
  // Block oracle for one output slot.
  double block = 0.0;
  for (std::size_t iy = 3; iy < 6; ++iy)
    for (std::size_t ix = 6; ix < 9; ++ix) block += r.at(iy, ix, 4);
  CHECK(rd.at(1, 2, 4) == doctest::Approx(block).epsilon(1e-14));
}
