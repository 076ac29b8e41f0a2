#include "nlos/renderer.hpp"

#include <cmath>
#include <string>

namespace nlos {

void RenderOptions::validate() const {
  if (falloff_exponent != 0 && falloff_exponent != 2 && falloff_exponent != 4) {
    throw ValidationError("render: falloff exponent must be 0, 2 or 4");
  }
}

namespace {

// albedo / r^exponent and the optional cos^2 factor, evaluated in extended
// precision from the squared distance and rounded once.
double deposit_weight(Vec3 d, double albedo, int exponent, bool cosine) {
  const long double r2 = static_cast<long double>(d.x) * d.x + static_cast<long double>(d.y) * d.y +
                         static_cast<long double>(d.z) * d.z;
  long double w = albedo;
  if (exponent == 2) w /= r2;
  if (exponent == 4) w /= r2 * r2;
  if (cosine) w *= static_cast<long double>(d.z) * d.z / r2;
  return static_cast<double>(w);
}

}  // namespace

TransientVolume render_confocal(const HiddenScene& scene, const ScanGeometry& geometry,
                                const RenderOptions& options) {
  geometry.validate();
  options.validate();
  if (scene.points.empty()) throw ValidationError("render: empty scene");
  for (const auto& p : scene.points) {
    if (!(p.position.z > 0.0)) throw ValidationError("render: scene point with z <= 0");
    if (!(p.albedo >= 0.0)) throw ValidationError("render: negative albedo");
  }

  TransientVolume out(geometry);
  const auto n_scan = static_cast<std::ptrdiff_t>(geometry.scan_count());
  const double bins_per_meter = 2.0 / (geometry.c * geometry.bin_width);
  const auto n_bins = geometry.n_bins;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n_scan; ++s) {
    const auto idx = static_cast<std::size_t>(s);
    const Vec3 wall = geometry.scan_position(idx % geometry.nx, idx / geometry.nx);
    auto hist = out.histogram(idx);
    for (const auto& p : scene.points) {
      const Vec3 d = p.position - wall;
      const double r = norm(d);
      const double w = deposit_weight(d, p.albedo, options.falloff_exponent, options.include_cosine);
      if (options.bin_weighting == BinWeighting::Nearest) {
        if (const auto bin = round_trip_bin(geometry, r)) hist[*bin] += w;
      } else {
        // Linear split between the two bins whose centers straddle the
        // round-trip time.
        const double pos = r * bins_per_meter - 0.5;
        const double lo = std::floor(pos);
        const double frac = pos - lo;
        if (lo >= 0.0 && lo < static_cast<double>(n_bins)) hist[static_cast<std::size_t>(lo)] += w * (1.0 - frac);
        if (lo + 1.0 >= 0.0 && lo + 1.0 < static_cast<double>(n_bins)) {
          hist[static_cast<std::size_t>(lo + 1.0)] += w * frac;
        }
      }
    }
  }
  return out;
}

TransientVolume downsample_spatial(const TransientVolume& volume, std::size_t factor) {
  if (factor < 1 || volume.nx() % factor != 0 || volume.ny() % factor != 0) {
    throw ValidationError("downsample: factor " + std::to_string(factor) + " does not divide the " +
                          std::to_string(volume.ny()) + "x" + std::to_string(volume.nx()) + " scan grid");
  }
  ScanGeometry g = volume.geometry();
  g.nx /= factor;
  g.ny /= factor;
  TransientVolume out(g);
  const auto nb = g.n_bins;
  for (std::size_t iy = 0; iy < volume.ny(); ++iy) {
    for (std::size_t ix = 0; ix < volume.nx(); ++ix) {
      const auto src = volume.histogram(iy * volume.nx() + ix);
      auto dst = out.histogram((iy / factor) * g.nx + ix / factor);
      for (std::size_t t = 0; t < nb; ++t) dst[t] += src[t];
    }
  }
  return out;
}

}  // namespace nlos
