#pragma once

#include <cstddef>
#include <string>

namespace nlos {

// Architecture of the masked transient autoencoder. One token is one scan
// point's full n_bins histogram.
struct MaeConfig {
  std::size_t n_bins = 128;
  std::size_t ny = 16;
  std::size_t nx = 16;
  std::size_t enc_width = 64;
  std::size_t enc_depth = 2;
  std::size_t enc_heads = 4;
  std::size_t dec_width = 32;
  std::size_t dec_depth = 1;
  std::size_t dec_heads = 4;
  double mask_ratio = 0.95;

  // Throws ValidationError: all sizes >= 1, widths divisible by their head
  // counts and by 4 (2D sin-cos positional embedding).
  void validate() const;
  std::size_t tokens() const { return ny * nx; }

  bool operator==(const MaeConfig&) const = default;
};

// Desk-scale architecture: 64/32 wide, 2/1 deep, 4 heads, 16x16 x 128 bins.
MaeConfig desk_config();
// Full-size architecture: encoder 1024 x 24, decoder 512 x 8, 16 heads.
MaeConfig full_config();
// Gradient-check architecture: 8 bins, width 16, depth 1, 2 heads, 4x4.
MaeConfig gradcheck_config();

// "tiny" (alias "desk") | "full" | "gradcheck"
MaeConfig config_preset(const std::string& name);

// Learnable parameter count implied by `config`, without the classifier.
std::size_t parameter_count(const MaeConfig& config);

}  // namespace nlos
