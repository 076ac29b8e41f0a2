#pragma once

#include <cstdint>
#include <vector>

#include "nlos/core.hpp"
#include "nlos/random.hpp"

namespace nlos {

struct NoiseParams {
  double jitter_fwhm = 128e-12;  // s, Gaussian system jitter
  double bias = 0.0;             // expected counts per bin, constant in time
  double photon_scale = 1000.0;  // intensity -> expected photon count
  std::uint64_t seed = 0;

  void validate() const;
};

// Discrete Gaussian jitter kernel in units of bins, truncated at +-4 sigma
// and renormalized to unit sum. Centered: kernel[k] is the weight for a
// shift of (k - half_width) bins. A zero FWHM gives the delta kernel {1}.
std::vector<double> jitter_kernel(double fwhm_seconds, double bin_width);

// Convolves every histogram along time with the jitter kernel (zero padding).
TransientVolume apply_jitter(const TransientVolume& volume, const NoiseParams& params);

// Poisson(photon_scale * (tau * j) + bias), sampled per element from an
// independent counter-based stream. Rejects negative input.
TransientVolume apply_spad_noise(const TransientVolume& volume, const NoiseParams& params);

// Inversion below lambda = 10, transformed rejection with squeeze above.
std::uint64_t sample_poisson(double lambda, CounterRng& rng);

}  // namespace nlos
