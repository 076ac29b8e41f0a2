#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nlos/error.hpp"

namespace nlos {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double norm(Vec3 v);

// Planar relay wall at z = 0, centered on the origin, scanned on a regular
// ny x nx grid. Scan positions sit at pixel centers.
struct ScanGeometry {
  double wall_width = 2.0;   // m, along x
  double wall_height = 2.0;  // m, along y
  std::size_t nx = 64;
  std::size_t ny = 64;
  std::size_t n_bins = 512;
  double bin_width = 32e-12;  // s
  double c = kSpeedOfLight;

  // Throws ValidationError if any invariant is broken.
  void validate() const;

  Vec3 scan_position(std::size_t ix, std::size_t iy) const;
  double pitch_x() const { return wall_width / static_cast<double>(nx); }
  double pitch_y() const { return wall_height / static_cast<double>(ny); }
  // One-way distance covered by one time bin.
  double bin_distance() const { return c * bin_width / 2.0; }
  // Largest one-way distance representable in the histogram.
  double max_range() const { return bin_distance() * static_cast<double>(n_bins); }
  std::size_t scan_count() const { return nx * ny; }
  std::size_t element_count() const { return nx * ny * n_bins; }

  bool operator==(const ScanGeometry&) const = default;
};

// Confocal time-of-flight bin for a one-way wall-to-point distance:
// floor(2 d / (c dt)), or nullopt when it falls past the last bin.
std::optional<std::size_t> round_trip_bin(const ScanGeometry& geometry, double distance);

// Photon-count histograms for every scan point, flat layout
// ((iy * nx + ix) * n_bins + it).
class TransientVolume {
 public:
  TransientVolume() = default;
  explicit TransientVolume(const ScanGeometry& geometry);
  TransientVolume(const ScanGeometry& geometry, std::vector<double> data);

  const ScanGeometry& geometry() const { return geometry_; }
  std::size_t ny() const { return geometry_.ny; }
  std::size_t nx() const { return geometry_.nx; }
  std::size_t n_bins() const { return geometry_.n_bins; }

  std::size_t offset(std::size_t iy, std::size_t ix, std::size_t it) const {
    return (iy * geometry_.nx + ix) * geometry_.n_bins + it;
  }
  double& at(std::size_t iy, std::size_t ix, std::size_t it) { return data_[offset(iy, ix, it)]; }
  double at(std::size_t iy, std::size_t ix, std::size_t it) const { return data_[offset(iy, ix, it)]; }

  // Histogram of scan point `index` (row-major scan order).
  std::span<double> histogram(std::size_t index);
  std::span<const double> histogram(std::size_t index) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Same grid dimensions (ny, nx, n_bins).
  bool same_shape(const TransientVolume& other) const;

 private:
  ScanGeometry geometry_;
  std::vector<double> data_;
};

// Rescales every histogram by its own maximum. All-zero histograms pass
// through untouched.
TransientVolume normalize_per_transient(const TransientVolume& volume);

// Axis-aligned voxel grid, data laid out (iz, iy, ix) with ix fastest.
class ReconVolume {
 public:
  ReconVolume() = default;
  ReconVolume(Vec3 origin, Vec3 voxel_size, std::array<std::size_t, 3> dims);

  const Vec3& origin() const { return origin_; }
  const Vec3& voxel_size() const { return voxel_size_; }
  // (nz, ny, nx)
  const std::array<std::size_t, 3>& dims() const { return dims_; }
  std::size_t nz() const { return dims_[0]; }
  std::size_t ny() const { return dims_[1]; }
  std::size_t nx() const { return dims_[2]; }

  std::size_t offset(std::size_t iz, std::size_t iy, std::size_t ix) const {
    return (iz * dims_[1] + iy) * dims_[2] + ix;
  }
  double& at(std::size_t iz, std::size_t iy, std::size_t ix) { return data_[offset(iz, iy, ix)]; }
  double at(std::size_t iz, std::size_t iy, std::size_t ix) const { return data_[offset(iz, iy, ix)]; }

  Vec3 voxel_center(std::size_t iz, std::size_t iy, std::size_t ix) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  Vec3 origin_;
  Vec3 voxel_size_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> dims_{1, 1, 1};
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

}  // namespace nlos
