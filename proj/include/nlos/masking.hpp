#pragma once

#include <cstdint>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

enum class MaskPattern { Random, RegularGrid, Custom };

// Scanning pattern mask over the ny x nx grid. `masked[i]` hides scan point
// i (row-major) from the encoder; unmasked points are the measured ones.
struct SpmMask {
  std::size_t ny = 0;
  std::size_t nx = 0;
  std::vector<std::uint8_t> masked;
  double ratio = 0.0;  // realized masked fraction
  MaskPattern pattern = MaskPattern::Custom;
  std::uint64_t seed = 0;

  std::size_t size() const { return ny * nx; }
  std::size_t masked_count() const;
  std::size_t unmasked_count() const { return size() - masked_count(); }
  bool is_masked(std::size_t index) const { return masked[index] != 0; }
  std::vector<std::size_t> unmasked_indices() const;
  std::vector<std::size_t> masked_indices() const;
};

// Number of masked points for a requested ratio: floor(ratio * n), with a
// 1e-9 guard against representation error in `ratio`.
std::size_t masked_count_for(double ratio, std::size_t n);

// Exactly masked_count_for(ratio, ny*nx) points, uniform without replacement.
SpmMask make_random_mask(std::size_t ny, std::size_t nx, double ratio, std::uint64_t seed);

// Unmasks points with iy % stride == 0 and ix % stride == 0.
SpmMask make_regular_mask(std::size_t ny, std::size_t nx, std::size_t stride);

// Wraps an explicit boolean pattern.
SpmMask make_custom_mask(std::size_t ny, std::size_t nx, std::vector<std::uint8_t> masked);

struct GatheredHistogram {
  std::size_t index;  // flat scan index
  std::vector<double> values;
};

// Unmasked histograms in row-major order.
std::vector<GatheredHistogram> gather_unmasked(const TransientVolume& volume, const SpmMask& mask);

// Writes gathered histograms back to their scan slots.
void scatter(TransientVolume& volume, const std::vector<GatheredHistogram>& items);

// Original values at unmasked points, predicted values at masked points.
TransientVolume combine_predictions(const TransientVolume& original, const TransientVolume& predicted,
                                    const SpmMask& mask);

enum class FillMode { Zero, Nearest };

// Replaces masked histograms with zeros or with the histogram of the nearest
// unmasked scan point (Euclidean grid distance, ties to the lowest index).
TransientVolume fill_masked(const TransientVolume& volume, const SpmMask& mask, FillMode mode);

void check_mask_matches(const TransientVolume& volume, const SpmMask& mask);

}  // namespace nlos
