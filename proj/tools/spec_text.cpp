#include "spec_text.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "nlos/error.hpp"
#include "nlos/io.hpp"

namespace nlosforge {

using nlos::ValidationError;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(const Table& t, const std::string& key, const std::string& what) {
  throw ValidationError("spec line " + std::to_string(t.line) + " [" + t.name + "] " + key + ": " + what);
}

double number(const Table& t, const std::string& key, const std::string& text) {
  const auto s = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) fail(t, key, "expected a number, got '" + s + "'");
  return v;
}

double get_number(const Table& t, const std::string& key) { return number(t, key, t.values.at(key)); }

std::uint64_t get_count(const Table& t, const std::string& key) {
  const auto s = trim(t.values.at(key));
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
    fail(t, key, "expected a non-negative integer, got '" + s + "'");
  return v;
}

std::string get_string(const Table& t, const std::string& key) {
  const auto s = trim(t.values.at(key));
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail(t, key, "expected a quoted string");
  return s.substr(1, s.size() - 2);
}

bool get_bool(const Table& t, const std::string& key) {
  const auto s = trim(t.values.at(key));
  if (s == "true") return true;
  if (s == "false") return false;
  fail(t, key, "expected true or false");
}

nlos::Range get_range(const Table& t, const std::string& key) {
  const auto s = trim(t.values.at(key));
  if (s.empty() || s.front() != '[') {
    const double v = number(t, key, s);
    return {v, v};
  }
  if (s.back() != ']') fail(t, key, "unterminated list");
  const auto body = s.substr(1, s.size() - 2);
  const auto comma = body.find(',');
  if (comma == std::string::npos || body.find(',', comma + 1) != std::string::npos)
    fail(t, key, "expected [lo, hi]");
  const nlos::Range r{number(t, key, body.substr(0, comma)), number(t, key, body.substr(comma + 1))};
  if (r.lo > r.hi) fail(t, key, "lo exceeds hi");
  return r;
}

void check_keys(const Table& t, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t.values)
    if (!allowed.count(k)) fail(t, k, "unknown key");
}

}  // namespace

const Table* SpecText::find(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<const Table*> SpecText::all(const std::string& name) const {
  std::vector<const Table*> out;
  for (const auto& t : tables)
    if (t.name == name) out.push_back(&t);
  return out;
}

SpecText parse_spec_text(const std::string& text) {
  SpecText spec;
  std::set<std::string> single_tables;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto where = "spec line " + std::to_string(line_no) + ": ";
    if (line.rfind("[[", 0) == 0) {
      if (line.size() < 5 || line.substr(line.size() - 2) != "]]") throw ValidationError(where + "malformed table header");
      spec.tables.push_back({trim(line.substr(2, line.size() - 4)), line_no, {}});
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + "malformed table header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!single_tables.insert(name).second) throw ValidationError(where + "duplicate table [" + name + "]");
      spec.tables.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    if (spec.tables.empty()) throw ValidationError(where + "key outside of any table");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ValidationError(where + "empty key or value");
    if (!spec.tables.back().values.emplace(key, value).second) throw ValidationError(where + "duplicate key " + key);
  }
  return spec;
}

SpecText read_spec_file(const std::filesystem::path& path) {
  const auto bytes = nlos::io::read_file(path);
  return parse_spec_text(std::string(bytes.begin(), bytes.end()));
}

void apply_geometry(const Table& t, nlos::ScanGeometry& g) {
  check_keys(t, {"nx", "ny", "bins", "bin_width_ps", "wall_width", "wall_height"});
  if (t.has("nx")) g.nx = get_count(t, "nx");
  if (t.has("ny")) g.ny = get_count(t, "ny");
  if (t.has("bins")) g.n_bins = get_count(t, "bins");
  if (t.has("bin_width_ps")) g.bin_width = get_number(t, "bin_width_ps") * 1e-12;
  if (t.has("wall_width")) g.wall_width = get_number(t, "wall_width");
  if (t.has("wall_height")) g.wall_height = get_number(t, "wall_height");
}

void apply_render(const Table& t, nlos::RenderOptions& o) {
  check_keys(t, {"falloff", "cosine", "linear_bins"});
  if (t.has("falloff")) o.falloff_exponent = static_cast<int>(get_count(t, "falloff"));
  if (t.has("cosine")) o.include_cosine = get_bool(t, "cosine");
  if (t.has("linear_bins"))
    o.bin_weighting = get_bool(t, "linear_bins") ? nlos::BinWeighting::Linear : nlos::BinWeighting::Nearest;
}

std::vector<nlos::SceneSpec> scene_specs(const SpecText& spec, std::uint64_t default_seed) {
  std::vector<nlos::SceneSpec> out;
  for (const auto& t : spec.tables)
    if (t.name != "geometry" && t.name != "render" && t.name != "scene")
      throw ValidationError("spec line " + std::to_string(t.line) + ": unknown table [" + t.name + "]");
  for (const Table* t : spec.all("scene")) {
    check_keys(*t, {"primitive", "samples", "x", "y", "z", "scale", "rot_x", "rot_y", "rot_z", "albedo", "letter", "seed",
                    "label", "repeat"});
    nlos::SceneSpec s;
    try {
      if (t->has("primitive")) s.primitive = nlos::parse_primitive(get_string(*t, "primitive"));
    } catch (const ValidationError& e) {
      fail(*t, "primitive", e.what());
    }
    if (t->has("samples")) s.sample_count = get_count(*t, "samples");
    if (t->has("x")) s.x = get_range(*t, "x");
    if (t->has("y")) s.y = get_range(*t, "y");
    if (t->has("z")) s.z = get_range(*t, "z");
    if (t->has("scale")) s.scale = get_range(*t, "scale");
    if (t->has("rot_x")) s.rot_x = get_range(*t, "rot_x");
    if (t->has("rot_y")) s.rot_y = get_range(*t, "rot_y");
    if (t->has("rot_z")) s.rot_z = get_range(*t, "rot_z");
    if (t->has("albedo")) s.albedo = get_number(*t, "albedo");
    if (t->has("letter")) {
      const auto l = get_string(*t, "letter");
      if (l.size() != 1) fail(*t, "letter", "expected a single character");
      s.letter = l[0];
    }
    if (t->has("label")) s.label = static_cast<int>(get_count(*t, "label"));
    const std::uint64_t repeat = t->has("repeat") ? get_count(*t, "repeat") : 1;
    if (repeat == 0) fail(*t, "repeat", "must be at least 1");
    const std::uint64_t base = t->has("seed") ? get_count(*t, "seed") : default_seed + out.size();
    for (std::uint64_t i = 0; i < repeat; ++i) {
      s.seed = base + i;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace nlosforge
