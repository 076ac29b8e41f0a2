#pragma once

#include <cstddef>

#include "nlos/core.hpp"
#include "nlos/scenes.hpp"

namespace nlos {

enum class BinWeighting { Nearest, Linear };

struct RenderOptions {
  // 0, 2 or 4. Four is r^2 out and r^2 back.
  int falloff_exponent = 4;
  // Weight by cos^2 of the angle to the wall normal (out and back).
  bool include_cosine = false;
  BinWeighting bin_weighting = BinWeighting::Nearest;

  void validate() const;
};

// Confocal single-bounce forward model. Each scene point deposits
// albedo / r^falloff into the bin of its round trip from every scan point;
// deposits past the last bin are dropped. Parallel over scan points.
TransientVolume render_confocal(const HiddenScene& scene, const ScanGeometry& geometry,
                                const RenderOptions& options = {});

// Sums factor x factor blocks of scan points. The wall extent is unchanged.
TransientVolume downsample_spatial(const TransientVolume& volume, std::size_t factor);

}  // namespace nlos
