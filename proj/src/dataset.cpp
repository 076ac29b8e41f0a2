#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlos/io.hpp"
#include "nlos/renderer.hpp"
#include "nlos/scenes.hpp"

namespace nlos {

namespace {

std::string scene_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu.trnv", index);
  return buf;
}

bool existing_matches(const std::filesystem::path& path, const ScanGeometry& geometry) {
  if (!std::filesystem::exists(path)) return false;
  try {
    const auto v = io::read_transient(path);
    return v.ny() == geometry.ny && v.nx() == geometry.nx && v.n_bins() == geometry.n_bins;
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

DatasetReport generate_dataset(const std::vector<SceneSpec>& specs, const ScanGeometry& geometry,
                               const std::filesystem::path& output_dir, const RenderOptions& options) {
  geometry.validate();
  options.validate();
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + output_dir.string() + ": " + ec.message());

  DatasetReport report;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    ManifestRow row{scene_file_name(i), spec.seed, to_string(spec.primitive),
                    spec.label ? std::to_string(*spec.label) : std::string()};
    const auto path = output_dir / row.file;
    try {
      if (existing_matches(path, geometry)) {
        ++report.skipped;
      } else {
        const auto scene = generate_scene(spec);
        io::write_transient(path, normalize_per_transient(render_confocal(scene, geometry, options)));
        ++report.rendered;
      }
      report.manifest.push_back(std::move(row));
    } catch (const Error& e) {
      report.failures.push_back(row.file + ": " + e.what());
    }
  }
  write_manifest(output_dir / "manifest.csv", report.manifest);
  return report;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  std::ostringstream out;
  out << "file,seed,primitive,label\n";
  for (const auto& r : rows) out << r.file << ',' << r.seed << ',' << r.primitive << ',' << r.label << '\n';
  io::write_text(path, out.str());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("file,seed,primitive", 0) != 0) {
    throw IoError("manifest " + path.string() + ": missing header");
  }
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 3 || cells.size() > 4 || cells[0].empty()) {
      throw IoError("manifest " + path.string() + ": malformed line " + std::to_string(line_no));
    }
    ManifestRow row;
    row.file = cells[0];
    try {
      row.seed = std::stoull(cells[1]);
    } catch (const std::exception&) {
      throw IoError("manifest " + path.string() + ": bad seed on line " + std::to_string(line_no));
    }
    row.primitive = cells[2];
    if (cells.size() == 4) row.label = cells[3];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nlos
