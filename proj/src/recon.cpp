#include "nlos/recon.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace nlos {

namespace {

using cplx = std::complex<double>;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Signed frequency index of array position i on an n-point DFT.
inline double signed_freq(std::size_t i, std::size_t n) {
  return i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

void require_square_wall(const ScanGeometry& g) {
  if (g.nx != g.ny || g.wall_width != g.wall_height) {
    throw ValidationError("lct: requires a square scan grid on a square wall");
  }
}

// Linear interpolation of samples[0..n) at fractional index s; zero outside.
template <typename V>
V lerp_at(const V* samples, std::size_t n, double s) {
  if (!(s > -1.0) || s >= static_cast<double>(n)) return V{};
  const double lo = std::floor(s);
  const double f = s - lo;
  const auto i = static_cast<std::ptrdiff_t>(lo);
  V a{}, b{};
  if (i >= 0) a = samples[i];
  if (i + 1 < static_cast<std::ptrdiff_t>(n)) b = samples[i + 1];
  return a * (1.0 - f) + b * f;
}

}  // namespace

const char* to_string(ReconMethod method) {
  switch (method) {
    case ReconMethod::Backprojection: return "bp";
    case ReconMethod::LightCone: return "lct";
    case ReconMethod::FkMigration: return "fk";
  }
  return "unknown";
}

ReconMethod parse_recon_method(const std::string& name) {
  if (name == "bp") return ReconMethod::Backprojection;
  if (name == "lct") return ReconMethod::LightCone;
  if (name == "fk") return ReconMethod::FkMigration;
  throw ValidationError("unknown reconstruction method '" + name + "' (expected bp, lct or fk)");
}

void fft3(std::vector<cplx>& data, std::size_t n0, std::size_t n1, std::size_t n2, bool inverse) {
  if (data.size() != n0 * n1 * n2) throw ValidationError("fft3: buffer size does not match dims");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_3d(static_cast<int>(n0), static_cast<int>(n1), static_cast<int>(n2), p, p,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericalError("fft3: FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

ReconVolume natural_grid(const ScanGeometry& g) {
  return ReconVolume({-g.wall_width / 2.0, -g.wall_height / 2.0, 0.0}, {g.pitch_x(), g.pitch_y(), g.bin_distance()},
                     {g.n_bins, g.ny, g.nx});
}

// --- backprojection ------------------------------------------------------

ReconVolume backproject(const TransientVolume& volume, const ReconOptions& options) {
  const auto& g = volume.geometry();
  ReconVolume out = natural_grid(g);
  if (options.nz || options.ny || options.nx || options.z_min != 0.0 || options.z_max != 0.0) {
    const std::size_t nz = options.nz ? options.nz : g.n_bins;
    const std::size_t ny = options.ny ? options.ny : g.ny;
    const std::size_t nx = options.nx ? options.nx : g.nx;
    const double z1 = options.z_max > 0.0 ? options.z_max : g.max_range();
    if (!(z1 > options.z_min) || options.z_min < 0.0) throw ValidationError("backproject: invalid z extent");
    out = ReconVolume({-g.wall_width / 2.0, -g.wall_height / 2.0, options.z_min},
                      {g.wall_width / static_cast<double>(nx), g.wall_height / static_cast<double>(ny),
                       (z1 - options.z_min) / static_cast<double>(nz)},
                      {nz, ny, nx});
  }

  std::vector<Vec3> walls(g.scan_count());
  for (std::size_t i = 0; i < walls.size(); ++i) walls[i] = g.scan_position(i % g.nx, i / g.nx);
  const auto& tau = volume.data();
  const std::size_t nb = g.n_bins;
  const auto total = static_cast<std::ptrdiff_t>(out.data().size());
  const std::size_t ny = out.ny(), nx = out.nx();

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t v = 0; v < total; ++v) {
    const auto idx = static_cast<std::size_t>(v);
    const Vec3 c = out.voxel_center(idx / (ny * nx), (idx / nx) % ny, idx % nx);
    double acc = 0.0;
    for (std::size_t s = 0; s < walls.size(); ++s) {
      const double r = norm(c - walls[s]);
      const auto bin = round_trip_bin(g, r);
      if (!bin) continue;
      const double sample = tau[s * nb + *bin];
      if (sample == 0.0) continue;
      acc += options.attenuation_compensation ? sample * std::pow(r, 4) : sample;
    }
    out.data()[idx] = acc;
  }

  if (options.laplacian_filter && out.nz() >= 3) {
    const auto src = out.data();
    const std::size_t plane = ny * nx;
    for (std::size_t z = 0; z < out.nz(); ++z) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double prev = z > 0 ? src[(z - 1) * plane + i] : 0.0;
        const double next = z + 1 < out.nz() ? src[(z + 1) * plane + i] : 0.0;
        out.data()[z * plane + i] = std::max(0.0, 2.0 * src[z * plane + i] - prev - next);
      }
    }
  }
  return out;
}

// --- light-cone transform ------------------------------------------------

ReconVolume lct_unclamped(const TransientVolume& volume, const ReconOptions& options) {
  const auto& g = volume.geometry();
  require_square_wall(g);
  if (!(options.lct_snr > 0.0)) throw ValidationError("lct: SNR must be > 0");
  const std::size_t n = g.nx, m = g.n_bins;
  const std::size_t pm = 2 * m, pn = 2 * n;
  const double dm = static_cast<double>(m);

  // Depth is normalized by the full range R = n_bins * c * dt / 2, so the
  // squared-depth axis v = z^2 lies in [0, 1] and is sampled at n_bins
  // uniform points.
  std::vector<cplx> meas(pm * pn * pn, cplx{});
  std::vector<double> hist(m);
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const auto src = volume.histogram(iy * n + ix);
      for (std::size_t t = 0; t < m; ++t) {
        const double z = (static_cast<double>(t) + 0.5) / dm;
        hist[t] = options.attenuation_compensation ? src[t] * std::pow(z, 4) : src[t];
      }
      // Resample onto the v grid, averaging linear interpolants over each v
      // cell, with the 1/z Jacobian of the change of variables.
      for (std::size_t j = 0; j < m; ++j) {
        const double v0 = static_cast<double>(j) / dm, v1 = static_cast<double>(j + 1) / dm;
        const double span_bins = (std::sqrt(v1) - std::sqrt(v0)) * dm;
        const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(2.0 * span_bins)));
        double acc = 0.0;
        for (std::size_t k = 0; k < sub; ++k) {
          const double v = v0 + (static_cast<double>(k) + 0.5) / static_cast<double>(sub) * (v1 - v0);
          const double z = std::sqrt(v);
          acc += lerp_at(hist.data(), m, z * dm - 0.5) / z;
        }
        meas[(j * pn + iy) * pn + ix] = acc / static_cast<double>(sub);
      }
    }
  }

  // Light-cone kernel: a point at the origin lights v = dx^2 + dy^2.
  std::vector<cplx> psf(pm * pn * pn, cplx{});
  const double range = g.max_range();
  const double pitch = g.pitch_x();
  double energy = 0.0;
  for (std::size_t py = 0; py < pn; ++py) {
    for (std::size_t px = 0; px < pn; ++px) {
      const double oy = signed_freq(py, pn) * pitch, ox = signed_freq(px, pn) * pitch;
      const double dv = (ox * ox + oy * oy) / (range * range) * dm;
      const auto d = static_cast<std::size_t>(std::lround(dv));
      if (d >= pm) continue;
      psf[(d * pn + py) * pn + px] = 1.0;
      energy += 1.0;
    }
  }
  const double inv_norm = 1.0 / std::sqrt(energy);
  for (auto& v : psf) v *= inv_norm;

  fft3(meas, pm, pn, pn, false);
  fft3(psf, pm, pn, pn, false);
  const double inv_snr = 1.0 / options.lct_snr;
  for (std::size_t i = 0; i < meas.size(); ++i) {
    meas[i] *= std::conj(psf[i]) / (std::norm(psf[i]) + inv_snr);
  }
  fft3(meas, pm, pn, pn, true);
  const double inv_total = 1.0 / static_cast<double>(meas.size());

  // Back from the v grid to depth, undoing the Jacobian.
  ReconVolume out = natural_grid(g);
  std::vector<double> column(m);
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      for (std::size_t j = 0; j < m; ++j) column[j] = meas[(j * pn + iy) * pn + ix].real() * inv_total;
      for (std::size_t k = 0; k < m; ++k) {
        const double z = (static_cast<double>(k) + 0.5) / dm;
        out.at(k, iy, ix) = 2.0 * z * lerp_at(column.data(), m, z * z * dm - 0.5);
      }
    }
  }
  return out;
}

ReconVolume lct(const TransientVolume& volume, const ReconOptions& options) {
  ReconVolume out = lct_unclamped(volume, options);
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

// --- f-k migration -------------------------------------------------------

std::vector<cplx> fk_field(const TransientVolume& volume, const ReconOptions& options) {
  const auto& g = volume.geometry();
  const std::size_t ny = g.ny, nx = g.nx, m = g.n_bins;
  const std::size_t pm = 2 * m, py = 2 * ny, px = 2 * nx;
  const double dm = static_cast<double>(m);

  std::vector<cplx> field(pm * py * px, cplx{});
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto src = volume.histogram(iy * nx + ix);
      for (std::size_t t = 0; t < m; ++t) {
        const double z = (static_cast<double>(t) + 0.5) / dm;
        field[(t * py + iy) * px + ix] = options.attenuation_compensation ? src[t] * z * z : src[t];
      }
    }
  }
  fft3(field, pm, py, px, false);

  // Stolt remap. Frequencies are in DFT index units of each padded axis;
  // alpha converts lateral indices into temporal ones.
  const double ax = dm * g.bin_distance() / (static_cast<double>(nx) * g.pitch_x());
  const double ay = dm * g.bin_distance() / (static_cast<double>(ny) * g.pitch_y());
  std::vector<cplx> remapped(field.size(), cplx{});
  std::vector<cplx> line(pm);
#pragma omp parallel for schedule(static) firstprivate(line)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(py * px); ++q) {
    const auto yi = static_cast<std::size_t>(q) / px, xi = static_cast<std::size_t>(q) % px;
    const double ky = ay * signed_freq(yi, py), kx = ax * signed_freq(xi, px);
    for (std::size_t t = 0; t < pm; ++t) line[t] = field[(t * py + yi) * px + xi];
    for (std::size_t t = 1; t < m; ++t) {
      const double kz = static_cast<double>(t);
      const double w = std::sqrt(kx * kx + ky * ky + kz * kz);
      if (w >= dm) continue;  // past the temporal Nyquist index
      const cplx sample = lerp_at(line.data(), m, w);
      remapped[(t * py + yi) * px + xi] = sample * (kz / std::max(w, options.fk_epsilon));
    }
  }
  fft3(remapped, pm, py, px, true);

  const double inv_total = 1.0 / static_cast<double>(remapped.size());
  std::vector<cplx> out(m * ny * nx);
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) out[(t * ny + iy) * nx + ix] = remapped[(t * py + iy) * px + ix] * inv_total;
  return out;
}

ReconVolume fk_migrate(const TransientVolume& volume, const ReconOptions& options) {
  const auto field = fk_field(volume, options);
  ReconVolume out = natural_grid(volume.geometry());
  for (std::size_t i = 0; i < field.size(); ++i) out.data()[i] = std::norm(field[i]);
  return out;
}

ReconVolume reconstruct(const TransientVolume& volume, const ReconOptions& options) {
  switch (options.method) {
    case ReconMethod::Backprojection: return backproject(volume, options);
    case ReconMethod::LightCone: return lct(volume, options);
    case ReconMethod::FkMigration: return fk_migrate(volume, options);
  }
  throw ValidationError("unknown reconstruction method");
}

// --- projections ---------------------------------------------------------

Image max_projection(const ReconVolume& recon, ProjectionAxis axis) {
  const std::size_t nz = recon.nz(), ny = recon.ny(), nx = recon.nx();
  Image img;
  switch (axis) {
    case ProjectionAxis::Z: img = {std::vector<double>(ny * nx, 0.0), ny, nx}; break;
    case ProjectionAxis::Y: img = {std::vector<double>(nz * nx, 0.0), nz, nx}; break;
    case ProjectionAxis::X: img = {std::vector<double>(nz * ny, 0.0), nz, ny}; break;
  }
  std::fill(img.data.begin(), img.data.end(), -std::numeric_limits<double>::infinity());
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) {
        const double v = recon.at(z, y, x);
        std::size_t i = 0;
        switch (axis) {
          case ProjectionAxis::Z: i = y * nx + x; break;
          case ProjectionAxis::Y: i = z * nx + x; break;
          case ProjectionAxis::X: i = z * ny + y; break;
        }
        img.data[i] = std::max(img.data[i], v);
      }
  return img;
}

Image depth_from_argmax(const ReconVolume& recon) {
  const std::size_t nz = recon.nz(), ny = recon.ny(), nx = recon.nx();
  Image img{std::vector<double>(ny * nx, 0.0), ny, nx};
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      double best = 0.0;
      std::size_t best_z = nz;
      for (std::size_t z = 0; z < nz; ++z) {
        if (recon.at(z, y, x) > best) {
          best = recon.at(z, y, x);
          best_z = z;
        }
      }
      if (best_z < nz) img.data[y * nx + x] = recon.voxel_center(best_z, y, x).z;
    }
  return img;
}

Image normalize_image(const Image& image, double max_value) {
  Image out = image;
  double peak = max_value;
  if (!(peak > 0.0)) {
    peak = 0.0;
    for (double v : image.data) peak = std::max(peak, v);
  }
  if (peak > 0.0) {
    for (double& v : out.data) v = std::clamp(v / peak, 0.0, 1.0);
  } else {
    std::fill(out.data.begin(), out.data.end(), 0.0);
  }
  return out;
}

}  // namespace nlos
