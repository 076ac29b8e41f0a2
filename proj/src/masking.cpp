#include "nlos/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nlos/random.hpp"

namespace nlos {

std::size_t SpmMask::masked_count() const {
  return static_cast<std::size_t>(std::count_if(masked.begin(), masked.end(), [](auto m) { return m != 0; }));
}

std::vector<std::size_t> SpmMask::unmasked_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < masked.size(); ++i)
    if (!masked[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> SpmMask::masked_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < masked.size(); ++i)
    if (masked[i]) out.push_back(i);
  return out;
}

std::size_t masked_count_for(double ratio, std::size_t n) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ValidationError("mask: ratio must lie in [0, 1]");
  const auto count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  return std::min(count, n);
}

SpmMask make_random_mask(std::size_t ny, std::size_t nx, double ratio, std::uint64_t seed) {
  const std::size_t n = ny * nx;
  const std::size_t k = masked_count_for(ratio, n);
  if (n == 0) throw ValidationError("mask: empty grid");

  // Partial Fisher-Yates: the first k entries of the permutation are masked.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed, 0x5350u);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }

  SpmMask mask;
  mask.ny = ny;
  mask.nx = nx;
  mask.masked.assign(n, 0);
  for (std::size_t i = 0; i < k; ++i) mask.masked[order[i]] = 1;
  mask.ratio = static_cast<double>(k) / static_cast<double>(n);
  mask.pattern = MaskPattern::Random;
  mask.seed = seed;
  return mask;
}

SpmMask make_regular_mask(std::size_t ny, std::size_t nx, std::size_t stride) {
  if (stride < 1) throw ValidationError("mask: stride must be >= 1");
  if (ny * nx == 0) throw ValidationError("mask: empty grid");
  SpmMask mask;
  mask.ny = ny;
  mask.nx = nx;
  mask.masked.assign(ny * nx, 1);
  for (std::size_t iy = 0; iy < ny; iy += stride)
    for (std::size_t ix = 0; ix < nx; ix += stride) mask.masked[iy * nx + ix] = 0;
  mask.ratio = static_cast<double>(mask.masked_count()) / static_cast<double>(ny * nx);
  mask.pattern = MaskPattern::RegularGrid;
  return mask;
}

SpmMask make_custom_mask(std::size_t ny, std::size_t nx, std::vector<std::uint8_t> masked) {
  if (masked.size() != ny * nx) throw ValidationError("mask: pattern length does not match ny*nx");
  SpmMask mask;
  mask.ny = ny;
  mask.nx = nx;
  mask.masked = std::move(masked);
  for (auto& m : mask.masked) m = m ? 1 : 0;
  mask.ratio = mask.size() ? static_cast<double>(mask.masked_count()) / static_cast<double>(mask.size()) : 0.0;
  mask.pattern = MaskPattern::Custom;
  return mask;
}

void check_mask_matches(const TransientVolume& volume, const SpmMask& mask) {
  if (mask.ny != volume.ny() || mask.nx != volume.nx() || mask.masked.size() != mask.ny * mask.nx) {
    throw ValidationError("mask " + std::to_string(mask.ny) + "x" + std::to_string(mask.nx) +
                          " does not match scan grid " + std::to_string(volume.ny()) + "x" +
                          std::to_string(volume.nx()));
  }
}

std::vector<GatheredHistogram> gather_unmasked(const TransientVolume& volume, const SpmMask& mask) {
  check_mask_matches(volume, mask);
  std::vector<GatheredHistogram> out;
  out.reserve(mask.unmasked_count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.is_masked(i)) continue;
    const auto h = volume.histogram(i);
    out.push_back({i, std::vector<double>(h.begin(), h.end())});
  }
  return out;
}

void scatter(TransientVolume& volume, const std::vector<GatheredHistogram>& items) {
  for (const auto& item : items) {
    if (item.index >= volume.geometry().scan_count() || item.values.size() != volume.n_bins()) {
      throw ValidationError("scatter: item does not fit the volume");
    }
    std::copy(item.values.begin(), item.values.end(), volume.histogram(item.index).begin());
  }
}

TransientVolume combine_predictions(const TransientVolume& original, const TransientVolume& predicted,
                                    const SpmMask& mask) {
  if (!original.same_shape(predicted)) throw ValidationError("combine: original and predicted shapes differ");
  check_mask_matches(original, mask);
  TransientVolume out = original;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.is_masked(i)) continue;
    const auto src = predicted.histogram(i);
    std::copy(src.begin(), src.end(), out.histogram(i).begin());
  }
  return out;
}

TransientVolume fill_masked(const TransientVolume& volume, const SpmMask& mask, FillMode mode) {
  check_mask_matches(volume, mask);
  TransientVolume out = volume;
  const auto sources = mask.unmasked_indices();
  if (mode == FillMode::Nearest && sources.empty() && mask.size() > 0) {
    throw ValidationError("nearest fill: mask leaves no measured scan point");
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.is_masked(i)) continue;
    auto dst = out.histogram(i);
    if (mode == FillMode::Zero) {
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    const auto iy = static_cast<std::ptrdiff_t>(i / mask.nx), ix = static_cast<std::ptrdiff_t>(i % mask.nx);
    std::size_t best = sources.front();
    auto best_d2 = std::numeric_limits<std::ptrdiff_t>::max();
    for (std::size_t s : sources) {
      const auto dy = static_cast<std::ptrdiff_t>(s / mask.nx) - iy;
      const auto dx = static_cast<std::ptrdiff_t>(s % mask.nx) - ix;
      const auto d2 = dy * dy + dx * dx;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = s;
      }
    }
    const auto src = volume.histogram(best);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace nlos
