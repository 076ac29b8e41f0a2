#include "nlos/scenes.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string_view>

#include "nlos/random.hpp"

namespace nlos {

namespace {

// 5x7 bitmap glyphs, row 0 on top.
constexpr std::array<std::array<std::string_view, 7>, 26> kGlyphs{{
    {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // A
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // B
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // C
    {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."},  // D
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // E
    {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // F
    {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"},  // G
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // H
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"},  // I
    {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},  // J
    {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // K
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // L
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // M
    {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // N
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // O
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // P
    {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"},  // Q
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // R
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // S
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // T
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // U
    {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // V
    {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."},  // W
    {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // X
    {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."},  // Y
    {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"},  // Z
}};

constexpr double kCell = 2.0 / 7.0;  // glyph cell size at unit half-height

const std::array<std::string_view, 7>& glyph(char letter) {
  if (letter >= 'a' && letter <= 'z') letter = static_cast<char>(letter - 'a' + 'A');
  if (letter < 'A' || letter > 'Z') throw ValidationError(std::string("scene: unsupported letter '") + letter + "'");
  return kGlyphs[static_cast<std::size_t>(letter - 'A')];
}

double sample(CounterRng& rng, Range r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  // R = Rz * Ry * Rx, angles in degrees.
  static Rotation euler(double ax, double ay, double az) {
    const double d = std::numbers::pi / 180.0;
    const double cx = std::cos(ax * d), sx = std::sin(ax * d);
    const double cy = std::cos(ay * d), sy = std::sin(ay * d);
    const double cz = std::cos(az * d), sz = std::sin(az * d);
    Rotation r;
    r.m = {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
           sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
           -sy,     cy * sx,                cy * cx};
    return r;
  }

  Vec3 apply(Vec3 v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

Vec3 unit_vector(CounterRng& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return (1.0 / n) * v;
  }
}

// Surface samples of the canonical primitive, centered at the origin, unit
// scale.
std::vector<Vec3> canonical_points(const SceneSpec& spec, CounterRng& rng) {
  std::vector<Vec3> pts;
  pts.reserve(spec.sample_count);
  switch (spec.primitive) {
    case Primitive::Sphere:
      for (std::size_t i = 0; i < spec.sample_count; ++i) pts.push_back(unit_vector(rng));
      break;
    case Primitive::Box:
      for (std::size_t i = 0; i < spec.sample_count; ++i) {
        const auto face = rng.below(6);
        const double u = rng.uniform(-1.0, 1.0), v = rng.uniform(-1.0, 1.0);
        const double s = (face % 2 == 0) ? 1.0 : -1.0;
        switch (face / 2) {
          case 0: pts.push_back({s, u, v}); break;
          case 1: pts.push_back({u, s, v}); break;
          default: pts.push_back({u, v, s}); break;
        }
      }
      break;
    case Primitive::PlaneLetter: {
      const auto& rows = glyph(spec.letter);
      std::vector<std::pair<int, int>> cells;
      for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 5; ++c)
          if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '#') cells.emplace_back(r, c);
      for (std::size_t i = 0; i < spec.sample_count; ++i) {
        const auto [r, c] = cells[rng.below(cells.size())];
        const double x = (c + rng.uniform()) * kCell - 2.5 * kCell;
        const double y = 1.0 - (r + rng.uniform()) * kCell;
        pts.push_back({x, y, 0.0});
      }
      break;
    }
    case Primitive::TwoPlane:
      // Two square plates of half-side 0.4, offset diagonally in x and depth.
      for (std::size_t i = 0; i < spec.sample_count; ++i) {
        const double s = (rng.below(2) == 0) ? -1.0 : 1.0;
        pts.push_back({0.35 * s + rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.35 * s});
      }
      break;
    case Primitive::RandomBlob: {
      std::array<Vec3, 3> axes{};
      std::array<double, 3> freq{}, phase{};
      for (std::size_t k = 0; k < 3; ++k) {
        axes[k] = unit_vector(rng);
        freq[k] = rng.uniform(1.0, 3.0);
        phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
      for (std::size_t i = 0; i < spec.sample_count; ++i) {
        const Vec3 d = unit_vector(rng);
        double g = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          g += std::sin(freq[k] * (d.x * axes[k].x + d.y * axes[k].y + d.z * axes[k].z) + phase[k]);
        }
        pts.push_back((0.75 + 0.25 * g / 3.0) * d);
      }
      break;
    }
  }
  return pts;
}

}  // namespace

const char* to_string(Primitive primitive) {
  switch (primitive) {
    case Primitive::PlaneLetter: return "plane-letter";
    case Primitive::Sphere: return "sphere";
    case Primitive::Box: return "box";
    case Primitive::TwoPlane: return "two-plane";
    case Primitive::RandomBlob: return "random-blob";
  }
  return "unknown";
}

Primitive parse_primitive(const std::string& name) {
  for (auto p : {Primitive::PlaneLetter, Primitive::Sphere, Primitive::Box, Primitive::TwoPlane,
                 Primitive::RandomBlob}) {
    if (name == to_string(p)) return p;
  }
  throw ValidationError("unknown primitive '" + name + "'");
}

double bounding_radius(const SceneSpec& spec) {
  switch (spec.primitive) {
    case Primitive::Box: return std::sqrt(3.0);
    case Primitive::PlaneLetter: return std::hypot(1.0, 2.5 * kCell);
    default: return 1.0;
  }
}

void SceneSpec::validate() const {
  if (sample_count < 1) throw ValidationError("scene spec: sample_count must be >= 1");
  for (const Range* r : {&x, &y, &z, &scale, &rot_x, &rot_y, &rot_z}) {
    if (!(r->lo <= r->hi)) throw ValidationError("scene spec: range with lo > hi");
  }
  if (!(z.lo > 0.0)) throw ValidationError("scene spec: z_min must be > 0");
  if (!(scale.lo > 0.0)) throw ValidationError("scene spec: scale_min must be > 0");
  if (!(albedo >= 0.0)) throw ValidationError("scene spec: albedo must be >= 0");
  if (!(z.lo - scale.hi * bounding_radius(*this) > 0.0)) {
    throw ValidationError("scene spec: placement ranges permit points at z <= 0");
  }
  if (primitive == Primitive::PlaneLetter) glyph(letter);
}

HiddenScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  CounterRng placement(spec.seed, 0);
  const Vec3 center{sample(placement, spec.x), sample(placement, spec.y), sample(placement, spec.z)};
  const double scale = sample(placement, spec.scale);
  const Rotation rot =
      Rotation::euler(sample(placement, spec.rot_x), sample(placement, spec.rot_y), sample(placement, spec.rot_z));

  CounterRng surface(spec.seed, 1);
  const auto canon = canonical_points(spec, surface);

  HiddenScene scene;
  scene.label = spec.label;
  scene.points.reserve(canon.size());
  for (const Vec3& q : canon) {
    scene.points.push_back({center + rot.apply(scale * q), spec.albedo});
  }
  return scene;
}

}  // namespace nlos
