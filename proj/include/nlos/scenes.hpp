#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

struct ScenePoint {
  Vec3 position;  // m, z > 0 on the hidden side
  double albedo = 1.0;
};

struct HiddenScene {
  std::vector<ScenePoint> points;
  std::optional<int> label;
};

enum class Primitive { PlaneLetter, Sphere, Box, TwoPlane, RandomBlob };

const char* to_string(Primitive primitive);
Primitive parse_primitive(const std::string& name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Randomized placement of one procedural object. Every range is sampled
// uniformly by the seeded generator; a degenerate range (lo == hi) pins the
// value. `scale` is the object's characteristic half-extent: sphere radius,
// box half-side, letter half-height.
struct SceneSpec {
  Primitive primitive = Primitive::Sphere;
  std::size_t sample_count = 2000;
  Range x{0.0, 0.0};
  Range y{0.0, 0.0};
  Range z{0.4, 1.2};
  Range scale{0.1, 0.2};
  Range rot_x{0.0, 0.0};  // degrees
  Range rot_y{0.0, 0.0};
  Range rot_z{0.0, 0.0};
  double albedo = 1.0;
  char letter = 'T';
  std::uint64_t seed = 0;
  std::optional<int> label;

  // Rejects ranges that allow any point at z <= 0.
  void validate() const;
};

// Largest distance from the object center to any surface point, in units of
// `scale`.
double bounding_radius(const SceneSpec& spec);

HiddenScene generate_scene(const SceneSpec& spec);

struct ManifestRow {
  std::string file;
  std::uint64_t seed = 0;
  std::string primitive;
  std::string label;  // empty when unlabeled
};

struct DatasetReport {
  std::vector<ManifestRow> manifest;
  std::size_t rendered = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;  // one message per failed file
};

struct RenderOptions;

// Renders, normalizes and writes one container per spec into `output_dir`,
// plus `manifest.csv`. Files that already exist and parse with the expected
// shape are kept.
DatasetReport generate_dataset(const std::vector<SceneSpec>& specs, const ScanGeometry& geometry,
                               const std::filesystem::path& output_dir, const RenderOptions& options);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);

}  // namespace nlos
