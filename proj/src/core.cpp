#include "nlos/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlos {

const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::BadMagic: return "bad magic";
    case FormatErrorKind::BadVersion: return "unsupported version";
    case FormatErrorKind::Truncated: return "truncated file";
    case FormatErrorKind::SizeMismatch: return "size mismatch";
    case FormatErrorKind::CrcMismatch: return "CRC mismatch";
    case FormatErrorKind::BadValue: return "bad value";
  }
  return "format error";
}

FormatError::FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& detail)
    : IoError(std::string(to_string(kind)) + " at byte " + std::to_string(offset) +
              (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      offset_(offset) {}

double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

void ScanGeometry::validate() const {
  if (nx < 1 || ny < 1 || n_bins < 1) throw ValidationError("scan geometry: nx, ny and n_bins must be >= 1");
  if (!(wall_width > 0.0) || !(wall_height > 0.0)) throw ValidationError("scan geometry: wall extent must be > 0");
  if (!(bin_width > 0.0)) throw ValidationError("scan geometry: bin width must be > 0");
  if (!(c > 0.0)) throw ValidationError("scan geometry: speed of light must be > 0");
}

Vec3 ScanGeometry::scan_position(std::size_t ix, std::size_t iy) const {
  const double x = (static_cast<double>(ix) + 0.5) / static_cast<double>(nx) * wall_width - wall_width / 2.0;
  const double y = (static_cast<double>(iy) + 0.5) / static_cast<double>(ny) * wall_height - wall_height / 2.0;
  return {x, y, 0.0};
}

std::optional<std::size_t> round_trip_bin(const ScanGeometry& geometry, double distance) {
  const double index = std::floor(2.0 * distance / (geometry.c * geometry.bin_width));
  if (!(index >= 0.0) || index >= static_cast<double>(geometry.n_bins)) return std::nullopt;
  return static_cast<std::size_t>(index);
}

TransientVolume::TransientVolume(const ScanGeometry& geometry)
    : geometry_(geometry), data_(geometry.element_count(), 0.0) {
  geometry_.validate();
}

TransientVolume::TransientVolume(const ScanGeometry& geometry, std::vector<double> data)
    : geometry_(geometry), data_(std::move(data)) {
  geometry_.validate();
  if (data_.size() != geometry_.element_count()) {
    throw ValidationError("transient volume: data length " + std::to_string(data_.size()) + " != ny*nx*n_bins " +
                          std::to_string(geometry_.element_count()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("transient volume: non-finite value");
  }
}

std::span<double> TransientVolume::histogram(std::size_t index) {
  return std::span<double>(data_).subspan(index * geometry_.n_bins, geometry_.n_bins);
}

std::span<const double> TransientVolume::histogram(std::size_t index) const {
  return std::span<const double>(data_).subspan(index * geometry_.n_bins, geometry_.n_bins);
}

bool TransientVolume::same_shape(const TransientVolume& other) const {
  return ny() == other.ny() && nx() == other.nx() && n_bins() == other.n_bins();
}

TransientVolume normalize_per_transient(const TransientVolume& volume) {
  TransientVolume out = volume;
  for (std::size_t i = 0; i < out.geometry().scan_count(); ++i) {
    auto h = out.histogram(i);
    const double peak = *std::max_element(h.begin(), h.end());
    if (peak > 0.0) {
      for (double& v : h) v /= peak;
    }
  }
  return out;
}

ReconVolume::ReconVolume(Vec3 origin, Vec3 voxel_size, std::array<std::size_t, 3> dims)
    : origin_(origin), voxel_size_(voxel_size), dims_(dims) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw ValidationError("recon volume: dims must be >= 1");
  if (!(voxel_size.x > 0.0) || !(voxel_size.y > 0.0) || !(voxel_size.z > 0.0)) {
    throw ValidationError("recon volume: voxel size must be > 0");
  }
  data_.assign(dims[0] * dims[1] * dims[2], 0.0);
}

Vec3 ReconVolume::voxel_center(std::size_t iz, std::size_t iy, std::size_t ix) const {
  return {origin_.x + (static_cast<double>(ix) + 0.5) * voxel_size_.x,
          origin_.y + (static_cast<double>(iy) + 0.5) * voxel_size_.y,
          origin_.z + (static_cast<double>(iz) + 0.5) * voxel_size_.z};
}

}  // namespace nlos
