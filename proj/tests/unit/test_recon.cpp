#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/recon.hpp"

using namespace nlos;
using testutil::argmax3;
using testutil::small_geometry;
using testutil::voxel_point;

namespace {

bool within(const std::array<std::size_t, 3>& a, const std::array<std::size_t, 3>& b, std::size_t tol) {
  for (int i = 0; i < 3; ++i) {
    const auto d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > tol) return false;
  }
  return true;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("backprojection argmax lands on the true voxel") {
  const auto g = small_geometry(16, 128);
  for (const std::array<std::size_t, 3> truth : {std::array<std::size_t, 3>{60, 5, 9},
                                                 std::array<std::size_t, 3>{90, 12, 3},
                                                 std::array<std::size_t, 3>{40, 8, 8}}) {
    const auto scene = testutil::single_point(voxel_point(g, truth[0], truth[1], truth[2]));
    const auto recon = backproject(render_confocal(scene, g), {});
    CHECK(argmax3(recon) == truth);
  }
}

TEST_CASE("backprojection is shift covariant parallel to the wall") {
  const auto g = small_geometry(16, 128);
  const auto a = argmax3(backproject(render_confocal(testutil::single_point(voxel_point(g, 70, 6, 6)), g), {}));
  const auto b = argmax3(backproject(render_confocal(testutil::single_point(voxel_point(g, 70, 8, 9)), g), {}));
  CHECK(a[0] == b[0]);
  CHECK(b[1] == a[1] + 2);
  CHECK(b[2] == a[2] + 3);
}

TEST_CASE("backprojection is linear") {
  const auto g = small_geometry(8, 64);
  const auto v = testutil::random_volume(g, 3);
  auto v2 = v;
  for (double& x : v2.data()) x *= 2.0;
  const auto a = backproject(v, {});
  const auto b = backproject(v2, {});
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(b.data()[i] == doctest::Approx(2.0 * a.data()[i]).epsilon(1e-12));
}

TEST_CASE("backprojection on a custom grid and with the z Laplacian") {
  const auto g = small_geometry(8, 64);
  const auto v = testutil::random_volume(g, 4);
  ReconOptions o;
  o.nz = 10;
  o.ny = 4;
  o.nx = 5;
  o.z_min = 0.05;
  o.z_max = 0.25;
  o.laplacian_filter = true;
  const auto r = backproject(v, o);
  CHECK(r.nz() == 10);
  CHECK(r.ny() == 4);
  CHECK(r.nx() == 5);
  CHECK(r.voxel_size().z == doctest::Approx(0.02));
  for (double x : r.data()) CHECK(x >= 0.0);
  o.z_max = 0.01;
  CHECK_THROWS_AS(backproject(v, o), ValidationError);
}

TEST_CASE("all-zero input reconstructs to all zeros") {
  const TransientVolume zero(small_geometry(8, 64));
  for (auto m : {ReconMethod::Backprojection, ReconMethod::LightCone, ReconMethod::FkMigration}) {
    ReconOptions o;
    o.method = m;
    const auto r = reconstruct(zero, o);
    CHECK(max_abs(r.data()) == 0.0);
  }
}

TEST_CASE("LCT and f-k place a single point within two voxels") {
  const auto g = small_geometry(32, 256);
  const std::array<std::size_t, 3> truth{150, 18, 12};
  const auto tau = render_confocal(testutil::single_point(voxel_point(g, truth[0], truth[1], truth[2])), g);
  ReconOptions o;
  const auto l = lct(tau, o);
  const auto f = fk_migrate(tau, o);
  INFO("lct argmax " << argmax3(l)[0] << "," << argmax3(l)[1] << "," << argmax3(l)[2]);
  CHECK(within(argmax3(l), truth, 2));
  INFO("fk argmax " << argmax3(f)[0] << "," << argmax3(f)[1] << "," << argmax3(f)[2]);
  CHECK(within(argmax3(f), truth, 2));
  for (double x : l.data()) REQUIRE(x >= 0.0);
}

TEST_CASE("LCT rejects non-square scans") {
  auto g = small_geometry(8, 32);
  g.nx = 4;
  CHECK_THROWS_AS(lct(TransientVolume(g), {}), ValidationError);
  auto h = small_geometry(8, 32);
  h.wall_width = 2.0;
  CHECK_THROWS_AS(lct(TransientVolume(h), {}), ValidationError);
}

TEST_CASE("LCT and f-k are linear before their final nonlinearity") {
  const auto g = small_geometry(8, 64);
  const auto a = testutil::random_volume(g, 10);
  const auto b = testutil::random_volume(g, 11);
  TransientVolume sum(g);
  for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] = a.data()[i] + 3.0 * b.data()[i];

  const auto la = lct_unclamped(a, {}), lb = lct_unclamped(b, {}), ls = lct_unclamped(sum, {});
  const double scale = max_abs(ls.data());
  for (std::size_t i = 0; i < ls.data().size(); ++i) {
    REQUIRE(std::abs(ls.data()[i] - (la.data()[i] + 3.0 * lb.data()[i])) <= 1e-9 * scale);
  }

  const auto fa = fk_field(a, {}), fb = fk_field(b, {}), fs = fk_field(sum, {});
  double fscale = 0.0;
  for (const auto& z : fs) fscale = std::max(fscale, std::abs(z));
  for (std::size_t i = 0; i < fs.size(); ++i) REQUIRE(std::abs(fs[i] - (fa[i] + 3.0 * fb[i])) <= 1e-9 * fscale);
}

TEST_CASE("forward 3D transform preserves energy (Parseval)") {
  const std::size_t n0 = 16, n1 = 8, n2 = 12;
  std::vector<std::complex<double>> x(n0 * n1 * n2);
  CounterRng rng(99, 0);
  for (auto& z : x) z = {rng.normal(), rng.normal()};
  double e_in = 0.0;
  for (const auto& z : x) e_in += std::norm(z);
  auto y = x;
  fft3(y, n0, n1, n2, false);
  double e_out = 0.0;
  for (const auto& z : y) e_out += std::norm(z);
  CHECK(e_out / static_cast<double>(x.size()) == doctest::Approx(e_in).epsilon(1e-6));
  fft3(y, n0, n1, n2, true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    REQUIRE(std::abs(y[i] / static_cast<double>(x.size()) - x[i]) < 1e-10);
  }
  CHECK_THROWS_AS(fft3(y, 3, 3, 3, false), ValidationError);
}

TEST_CASE("max projection and argmax depth") {
  ReconVolume v({0, 0, 0}, {0.1, 0.1, 0.05}, {6, 3, 4});
  SUBCASE("constant volume gives a constant image") {
    std::fill(v.data().begin(), v.data().end(), 0.7);
    for (auto axis : {ProjectionAxis::Z, ProjectionAxis::Y, ProjectionAxis::X}) {
      const auto img = max_projection(v, axis);
      for (double x : img.data) CHECK(x == 0.7);
    }
    CHECK(max_projection(v, ProjectionAxis::Y).height == 6);
    CHECK(max_projection(v, ProjectionAxis::X).width == 3);
  }
  SUBCASE("single voxel gives a single pixel") {
    v.at(4, 2, 1) = 3.0;
    const auto img = max_projection(v);
    REQUIRE(img.height == 3);
    REQUIRE(img.width == 4);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(img.data[i] == (i == 2 * 4 + 1 ? 3.0 : 0.0));
    const auto depth = depth_from_argmax(v);
    CHECK(depth.data[2 * 4 + 1] == doctest::Approx(4.5 * 0.05));
    CHECK(depth.data[0] == 0.0);
    const auto n = normalize_image(img);
    CHECK(n.data[2 * 4 + 1] == 1.0);
  }
}

TEST_CASE("depth of a planar scene is recovered within one voxel") {
  const auto g = small_geometry(32, 256);
  SceneSpec spec;
  spec.primitive = Primitive::PlaneLetter;
  spec.letter = 'H';
  spec.sample_count = 6000;
  spec.x = spec.y = {0.0, 0.0};
  spec.z = {0.8, 0.8};
  spec.scale = {0.35, 0.35};
  spec.seed = 5;
  const auto tau = render_confocal(generate_scene(spec), g);
  const auto recon = backproject(tau, {});
  const auto proj = max_projection(recon);
  const auto depth = depth_from_argmax(recon);
  const double peak = *std::max_element(proj.data.begin(), proj.data.end());
  std::vector<double> d;
  for (std::size_t i = 0; i < proj.data.size(); ++i)
    if (proj.data[i] >= 0.5 * peak) d.push_back(depth.data[i]);
  REQUIRE(!d.empty());
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  CHECK(std::abs(d[d.size() / 2] - 0.8) <= g.bin_distance());
}

TEST_CASE("method names parse") {
  CHECK(parse_recon_method("bp") == ReconMethod::Backprojection);
  CHECK(parse_recon_method("lct") == ReconMethod::LightCone);
  CHECK(parse_recon_method("fk") == ReconMethod::FkMigration);
  CHECK(std::string(to_string(ReconMethod::FkMigration)) == "fk");
  CHECK_THROWS_AS(parse_recon_method("pf"), ValidationError);
}
