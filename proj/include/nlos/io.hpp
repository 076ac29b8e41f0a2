#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlos/core.hpp"
#include "nlos/mae_config.hpp"
#include "nlos/masking.hpp"
#include "nlos/metrics.hpp"

// Little-endian binary containers. Layouts are documented in docs/formats.md.
namespace nlos::io {

inline constexpr std::uint32_t kTransientVersion = 1;
inline constexpr std::uint32_t kMaskVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kReconVersion = 1;

// Payload is stored as f32; geometry as f32 picoseconds / meters.
std::vector<std::uint8_t> encode_transient(const TransientVolume& volume);
TransientVolume decode_transient(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_mask(const SpmMask& mask);
SpmMask decode_mask(const std::vector<std::uint8_t>& bytes);

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

struct Checkpoint {
  MaeConfig config;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_recon(const ReconVolume& volume);
ReconVolume decode_recon(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never see a
// partial file.
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

TransientVolume read_transient(const std::filesystem::path& path);
void write_transient(const std::filesystem::path& path, const TransientVolume& volume);
SpmMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const SpmMask& mask);
Checkpoint read_checkpoint(const std::filesystem::path& path);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
ReconVolume read_recon(const std::filesystem::path& path);
void write_recon(const std::filesystem::path& path, const ReconVolume& volume);

// Binary P5, maxval 255. Values are clamped to [0, 1] and quantized to
// round(v * 255).
std::vector<std::uint8_t> encode_pgm(const Image& image);
Image decode_pgm(const std::vector<std::uint8_t>& bytes);
void export_pgm(const std::filesystem::path& path, const Image& image);
Image read_pgm(const std::filesystem::path& path);

void export_csv(const std::filesystem::path& path, const MetricReport& report, bool wide = false);

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

}  // namespace nlos::io
