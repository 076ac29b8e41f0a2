#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "nlos/core.hpp"
#include "nlos/metrics.hpp"

namespace nlos {

enum class ReconMethod { Backprojection, LightCone, FkMigration };

const char* to_string(ReconMethod method);
ReconMethod parse_recon_method(const std::string& name);  // "bp" | "lct" | "fk"

struct ReconOptions {
  ReconMethod method = ReconMethod::Backprojection;
  // Output grid for backprojection. Zero selects the natural grid: scan grid
  // laterally, n_bins slices of one bin distance in depth. LCT and f-k always
  // use the natural grid.
  std::size_t nz = 0;
  std::size_t ny = 0;
  std::size_t nx = 0;
  double z_min = 0.0;  // m
  double z_max = 0.0;  // m; zero selects c * bin_width * n_bins / 2
  double lct_snr = 1e2;
  bool attenuation_compensation = true;
  bool laplacian_filter = false;  // backprojection only, along z
  double fk_epsilon = 1e-12;
};

// Scan grid laterally, n_bins slices of c * bin_width / 2 in depth.
ReconVolume natural_grid(const ScanGeometry& geometry);

ReconVolume backproject(const TransientVolume& volume, const ReconOptions& options);
ReconVolume lct(const TransientVolume& volume, const ReconOptions& options);
ReconVolume fk_migrate(const TransientVolume& volume, const ReconOptions& options);
ReconVolume reconstruct(const TransientVolume& volume, const ReconOptions& options);

// LCT before the final clamp; linear in the input.
ReconVolume lct_unclamped(const TransientVolume& volume, const ReconOptions& options);

// f-k field after the inverse transform and crop, before |.|^2. Layout
// (iz, iy, ix) on the natural grid; linear in the input.
std::vector<std::complex<double>> fk_field(const TransientVolume& volume, const ReconOptions& options);

// In-place unnormalized 3D DFT of a (n0, n1, n2) row-major array. The
// inverse direction is also unnormalized.
void fft3(std::vector<std::complex<double>>& data, std::size_t n0, std::size_t n1, std::size_t n2, bool inverse);

enum class ProjectionAxis { Z, Y, X };

// Per-pixel maximum along `axis`. Z gives an (ny, nx) image.
Image max_projection(const ReconVolume& recon, ProjectionAxis axis = ProjectionAxis::Z);

// Depth in meters of the per-pixel maximum along z; zero where a column is
// entirely zero.
Image depth_from_argmax(const ReconVolume& recon);

// Scales an image to [0, 1] by its maximum (or by `max_value` when > 0).
Image normalize_image(const Image& image, double max_value = 0.0);

}  // namespace nlos
