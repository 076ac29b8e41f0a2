#include "nlos/noise.hpp"

#include <cmath>

namespace nlos {

namespace {

constexpr double kFwhmToSigma = 2.3548;

// Hormann's PTRS; valid for lambda >= 10.
std::uint64_t poisson_ptrs(double lambda, CounterRng& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

void NoiseParams::validate() const {
  if (!(jitter_fwhm >= 0.0)) throw ValidationError("noise: jitter FWHM must be >= 0");
  if (!(bias >= 0.0)) throw ValidationError("noise: bias must be >= 0");
  if (!(photon_scale > 0.0)) throw ValidationError("noise: photon scale must be > 0");
}

std::uint64_t sample_poisson(double lambda, CounterRng& rng) {
  if (!(lambda > 0.0)) return 0;
  if (lambda >= 10.0) return poisson_ptrs(lambda, rng);
  // Sequential search of the CDF.
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::vector<double> jitter_kernel(double fwhm_seconds, double bin_width) {
  if (!(fwhm_seconds > 0.0)) return {1.0};
  const double sigma = fwhm_seconds / kFwhmToSigma / bin_width;
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -half; i <= half; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + half)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

TransientVolume apply_jitter(const TransientVolume& volume, const NoiseParams& params) {
  params.validate();
  if (params.jitter_fwhm == 0.0) return volume;
  const auto kernel = jitter_kernel(params.jitter_fwhm, volume.geometry().bin_width);
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto nb = static_cast<std::ptrdiff_t>(volume.n_bins());

  TransientVolume out(volume.geometry());
  const auto n_scan = static_cast<std::ptrdiff_t>(volume.geometry().scan_count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n_scan; ++s) {
    const auto src = volume.histogram(static_cast<std::size_t>(s));
    auto dst = out.histogram(static_cast<std::size_t>(s));
    for (std::ptrdiff_t t = 0; t < nb; ++t) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        const std::ptrdiff_t src_t = t - k;
        if (src_t >= 0 && src_t < nb) acc += kernel[static_cast<std::size_t>(k + half)] * src[static_cast<std::size_t>(src_t)];
      }
      dst[static_cast<std::size_t>(t)] = acc < 0.0 ? 0.0 : acc;
    }
  }
  return out;
}

TransientVolume apply_spad_noise(const TransientVolume& volume, const NoiseParams& params) {
  params.validate();
  for (double v : volume.data()) {
    if (!(v >= 0.0)) throw ValidationError("noise: input transient has negative or non-finite values");
  }
  TransientVolume out = apply_jitter(volume, params);
  auto& data = out.data();
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    CounterRng rng(params.seed, static_cast<std::uint64_t>(i));
    const double lambda = params.photon_scale * data[static_cast<std::size_t>(i)] + params.bias;
    data[static_cast<std::size_t>(i)] = static_cast<double>(sample_poisson(lambda, rng));
  }
  return out;
}

}  // namespace nlos
