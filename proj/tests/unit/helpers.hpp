#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "nlos/core.hpp"
#include "nlos/random.hpp"
#include "nlos/renderer.hpp"
#include "nlos/scenes.hpp"

namespace testutil {

inline nlos::ScanGeometry small_geometry(std::size_t n, std::size_t bins, double wall = 1.0) {
  nlos::ScanGeometry g;
  g.nx = g.ny = n;
  g.n_bins = bins;
  g.wall_width = g.wall_height = wall;
  return g;
}

inline nlos::HiddenScene single_point(nlos::Vec3 p, double albedo = 1.0) {
  nlos::HiddenScene s;
  s.points.push_back({p, albedo});
  return s;
}

// Center of natural-grid voxel (iz, iy, ix): lateral scan-pixel center,
// depth at the middle of bin iz.
inline nlos::Vec3 voxel_point(const nlos::ScanGeometry& g, std::size_t iz, std::size_t iy, std::size_t ix) {
  const auto s = g.scan_position(ix, iy);
  return {s.x, s.y, (static_cast<double>(iz) + 0.5) * g.bin_distance()};
}

inline std::array<std::size_t, 3> argmax3(const nlos::ReconVolume& v) {
  const auto it = std::max_element(v.data().begin(), v.data().end());
  const auto i = static_cast<std::size_t>(it - v.data().begin());
  return {i / (v.ny() * v.nx()), (i / v.nx()) % v.ny(), i % v.nx()};
}

inline nlos::TransientVolume random_volume(const nlos::ScanGeometry& g, std::uint64_t seed, double lo = 0.0,
                                           double hi = 1.0) {
  nlos::TransientVolume v(g);
  nlos::CounterRng rng(seed, 0);
  for (double& x : v.data()) x = rng.uniform(lo, hi);
  return v;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("nlos_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xffffff));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
