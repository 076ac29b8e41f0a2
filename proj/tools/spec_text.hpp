#pragma once

// Minimal reader for the TOML-like scene/spec files accepted by nlosforge.
// Supports `[table]`, `[[array-of-tables]]`, `key = value` with numbers,
// quoted strings, booleans and two-element `[lo, hi]` lists, and `#` comments.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlos/core.hpp"
#include "nlos/renderer.hpp"
#include "nlos/scenes.hpp"

namespace nlosforge {

struct Table {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::string> values;  // raw value text

  bool has(const std::string& key) const { return values.count(key) != 0; }
};

struct SpecText {
  std::vector<Table> tables;

  const Table* find(const std::string& name) const;
  std::vector<const Table*> all(const std::string& name) const;
};

SpecText parse_spec_text(const std::string& text);
SpecText read_spec_file(const std::filesystem::path& path);

// Applies a `[geometry]` table on top of `geometry`.
void apply_geometry(const Table& table, nlos::ScanGeometry& geometry);
// Applies a `[render]` table on top of `options`.
void apply_render(const Table& table, nlos::RenderOptions& options);

// Expands every `[[scene]]` table, honoring `repeat = N` with consecutive
// seeds. Scenes without a seed get `default_seed + index`.
std::vector<nlos::SceneSpec> scene_specs(const SpecText& spec, std::uint64_t default_seed);

}  // namespace nlosforge
