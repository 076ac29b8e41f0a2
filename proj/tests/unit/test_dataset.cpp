#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/io.hpp"
#include "nlos/scenes.hpp"

using namespace nlos;

namespace {

std::vector<SceneSpec> three_specs() {
  std::vector<SceneSpec> specs(3);
  const Primitive prims[] = {Primitive::Sphere, Primitive::Box, Primitive::PlaneLetter};
  for (std::size_t i = 0; i < 3; ++i) {
    specs[i].primitive = prims[i];
    specs[i].seed = 100 + i;
    specs[i].sample_count = 200;
    specs[i].z = {0.5, 0.6};
    specs[i].label = static_cast<int>(i);
  }
  return specs;
}

}  // namespace

TEST_CASE("dataset generation writes files and a manifest") {
  testutil::TempDir dir("dataset");
  const auto g = testutil::small_geometry(6, 128);
  const auto report = generate_dataset(three_specs(), g, dir.path, {});
  CHECK(report.rendered == 3);
  CHECK(report.failures.empty());
  const auto rows = read_manifest(dir.path / "manifest.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].file == "scene_0000.trnv");
  CHECK(rows[1].seed == 101);
  CHECK(rows[2].primitive == "plane-letter");
  CHECK(rows[2].label == "2");
  for (const auto& r : rows) {
    const auto v = io::read_transient(dir.path / r.file);
    double peak = 0.0;
    for (double x : v.data()) peak = std::max(peak, x);
    CHECK(peak == 1.0);  // normalized and nonzero
  }
  std::ifstream in(dir.path / "manifest.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "file,seed,primitive,label");
}

TEST_CASE("dataset generation is reproducible and resumable") {
  testutil::TempDir a("ds_a"), b("ds_b");
  const auto g = testutil::small_geometry(5, 96);
  generate_dataset(three_specs(), g, a.path, {});
  generate_dataset(three_specs(), g, b.path, {});
  for (const char* f : {"scene_0000.trnv", "scene_0001.trnv", "scene_0002.trnv", "manifest.csv"}) {
    CHECK(io::read_file(a.path / f) == io::read_file(b.path / f));
  }

  const auto before = io::read_file(a.path / "scene_0001.trnv");
  std::filesystem::remove(a.path / "scene_0001.trnv");
  const auto again = generate_dataset(three_specs(), g, a.path, {});
  CHECK(again.rendered == 1);
  CHECK(again.skipped == 2);
  CHECK(io::read_file(a.path / "scene_0001.trnv") == before);

  // A corrupted file is regenerated, not trusted.
  io::write_file(a.path / "scene_0002.trnv", {1, 2, 3});
  CHECK(generate_dataset(three_specs(), g, a.path, {}).rendered == 1);
}

TEST_CASE("empty spec list gives an empty manifest") {
  testutil::TempDir dir("ds_empty");
  const auto report = generate_dataset({}, testutil::small_geometry(4, 32), dir.path, {});
  CHECK(report.manifest.empty());
  CHECK(read_manifest(dir.path / "manifest.csv").empty());
}

TEST_CASE("per-file failures are collected") {
  testutil::TempDir dir("ds_fail");
  auto specs = three_specs();
  specs[1].z = {0.05, 0.05};  // intersects the wall
  const auto report = generate_dataset(specs, testutil::small_geometry(4, 64), dir.path, {});
  CHECK(report.rendered == 2);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].find("scene_0001") != std::string::npos);
  CHECK(read_manifest(dir.path / "manifest.csv").size() == 2);
}

TEST_CASE("manifest parsing errors") {
  testutil::TempDir dir("ds_manifest");
  io::write_text(dir.path / "bad.csv", "nope\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "bad.csv"), IoError);
  io::write_text(dir.path / "bad2.csv", "file,seed,primitive,label\na.trnv,xyz,sphere,\n");
  CHECK_THROWS_AS(read_manifest(dir.path / "bad2.csv"), IoError);
  CHECK_THROWS_AS(read_manifest(dir.path / "none.csv"), IoError);
  io::write_text(dir.path / "ok.csv", "file,seed,primitive,label\na.trnv,5,sphere,\r\n");
  const auto rows = read_manifest(dir.path / "ok.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].label.empty());
}
