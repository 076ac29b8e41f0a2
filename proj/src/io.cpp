#include "nlos/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace nlos::io {

namespace {

class ByteWriter {
 public:
  void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  void expect_magic(const char (&m)[5]) {
    need(4, "magic");
    if (std::memcmp(bytes_.data() + pos_, m, 4) != 0) {
      throw FormatError(FormatErrorKind::BadMagic, pos_, std::string("expected '") + m + "'");
    }
    pos_ += 4;
  }
  void expect_version(std::uint32_t version) {
    const auto at = pos_;
    const auto v = u32("version");
    if (v != version) {
      throw FormatError(FormatErrorKind::BadVersion, at,
                        "found " + std::to_string(v) + ", supported " + std::to_string(version));
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return end_ - pos_; }

  // Declared payload of n bytes must end exactly at `end`.
  void expect_exact(std::uint64_t n, const char* what) {
    if (remaining() < n) {
      throw FormatError(FormatErrorKind::Truncated, end_,
                        std::string(what) + ": header declares " + std::to_string(n) + " bytes, " +
                            std::to_string(remaining()) + " present");
    }
    if (remaining() > n) {
      throw FormatError(FormatErrorKind::SizeMismatch, pos_ + n,
                        std::string(what) + ": " + std::to_string(remaining() - n) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t n, const char* what) {
    if (end_ - pos_ < n) throw FormatError(FormatErrorKind::Truncated, end_, std::string("reading ") + what);
  }
  std::uint64_t get(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw ValidationError(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

// --- transient container -------------------------------------------------

std::vector<std::uint8_t> encode_transient(const TransientVolume& volume) {
  const auto& g = volume.geometry();
  ByteWriter w;
  w.magic("TRNV");
  w.u32(kTransientVersion);
  w.u32(checked_u32(g.ny, "ny"));
  w.u32(checked_u32(g.nx, "nx"));
  w.u32(checked_u32(g.n_bins, "n_bins"));
  w.f32(static_cast<float>(g.bin_width * 1e12));
  w.f32(static_cast<float>(g.wall_width));
  w.f32(static_cast<float>(g.wall_height));
  w.bytes().reserve(w.bytes().size() + volume.data().size() * 4);
  for (double v : volume.data()) w.f32(static_cast<float>(v));
  return std::move(w.bytes());
}

TransientVolume decode_transient(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, bytes.size());
  r.expect_magic("TRNV");
  r.expect_version(kTransientVersion);
  const auto header_at = r.pos();
  ScanGeometry g;
  g.ny = r.u32("ny");
  g.nx = r.u32("nx");
  g.n_bins = r.u32("n_bins");
  g.bin_width = static_cast<double>(r.f32("bin_width_ps")) * 1e-12;
  g.wall_width = r.f32("wall_width_m");
  g.wall_height = r.f32("wall_height_m");
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw FormatError(FormatErrorKind::BadValue, header_at, e.what());
  }
  const std::uint64_t count = static_cast<std::uint64_t>(g.ny) * g.nx * g.n_bins;
  r.expect_exact(count * 4, "payload");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto at = r.pos();
    const float v = r.f32("payload");
    if (!std::isfinite(v)) throw FormatError(FormatErrorKind::BadValue, at, "non-finite sample");
    data[i] = v;
  }
  return TransientVolume(g, std::move(data));
}

// --- mask file -----------------------------------------------------------

std::vector<std::uint8_t> encode_mask(const SpmMask& mask) {
  ByteWriter w;
  w.magic("SPMK");
  w.u32(kMaskVersion);
  w.u32(checked_u32(mask.ny, "ny"));
  w.u32(checked_u32(mask.nx, "nx"));
  for (auto m : mask.masked) w.u8(m ? 1 : 0);
  return std::move(w.bytes());
}

SpmMask decode_mask(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, bytes.size());
  r.expect_magic("SPMK");
  r.expect_version(kMaskVersion);
  const auto dims_at = r.pos();
  const std::size_t ny = r.u32("ny");
  const std::size_t nx = r.u32("nx");
  if (ny == 0 || nx == 0) throw FormatError(FormatErrorKind::BadValue, dims_at, "zero grid dimension");
  r.expect_exact(static_cast<std::uint64_t>(ny) * nx, "mask payload");
  std::vector<std::uint8_t> masked(ny * nx);
  for (auto& m : masked) {
    const auto at = r.pos();
    m = r.u8("mask payload");
    if (m > 1) throw FormatError(FormatErrorKind::BadValue, at, "mask byte must be 0 or 1");
  }
  return make_custom_mask(ny, nx, std::move(masked));
}

// --- checkpoint ----------------------------------------------------------

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  ByteWriter w;
  w.magic("MRMT");
  w.u32(kCheckpointVersion);
  const auto& c = ck.config;
  for (std::size_t v : {c.n_bins, c.ny, c.nx, c.enc_width, c.enc_depth, c.enc_heads, c.dec_width, c.dec_depth,
                        c.dec_heads}) {
    w.u32(checked_u32(v, "config field"));
  }
  w.f32(static_cast<float>(c.mask_ratio));

  std::set<std::string> names;
  for (const auto& t : ck.tensors) {
    if (!names.insert(t.name).second) throw ValidationError("checkpoint: duplicate tensor name '" + t.name + "'");
    if (t.name.size() > 0xffff) throw ValidationError("checkpoint: tensor name too long");
    if (t.dims.size() > 0xff) throw ValidationError("checkpoint: tensor rank too large");
    std::uint64_t count = 1;
    for (auto d : t.dims) count *= d;
    if (count != t.data.size()) throw ValidationError("checkpoint: tensor '" + t.name + "' dims do not match data");
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.raw(t.name.data(), t.name.size());
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (float v : t.data) w.f32(v);
  }
  auto& bytes = w.bytes();
  const auto crc = crc32(bytes.data(), bytes.size());
  w.u32(crc);
  return std::move(bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  {
    ByteReader head(bytes, bytes.size());
    head.expect_magic("MRMT");
    head.expect_version(kCheckpointVersion);
  }
  if (bytes.size() < 8 + 40 + 4) throw FormatError(FormatErrorKind::Truncated, bytes.size(), "checkpoint header");
  const std::size_t body = bytes.size() - 4;
  const std::uint32_t stored = static_cast<std::uint32_t>(bytes[body]) | (static_cast<std::uint32_t>(bytes[body + 1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[body + 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[body + 3]) << 24);
  if (crc32(bytes.data(), body) != stored) throw FormatError(FormatErrorKind::CrcMismatch, body, "");

  ByteReader r(bytes, body);
  r.expect_magic("MRMT");
  r.expect_version(kCheckpointVersion);
  Checkpoint ck;
  auto& c = ck.config;
  for (std::size_t* f : {&c.n_bins, &c.ny, &c.nx, &c.enc_width, &c.enc_depth, &c.enc_heads, &c.dec_width,
                         &c.dec_depth, &c.dec_heads}) {
    *f = r.u32("config");
  }
  c.mask_ratio = r.f32("config mask_ratio");

  std::set<std::string> names;
  while (r.remaining() > 0) {
    const auto at = r.pos();
    NamedTensor t;
    const auto len = r.u16("tensor name length");
    t.name = r.str(len, "tensor name");
    if (!names.insert(t.name).second) throw FormatError(FormatErrorKind::BadValue, at, "duplicate tensor '" + t.name + "'");
    const auto rank = r.u8("tensor rank");
    std::uint64_t count = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
      t.dims.push_back(r.u32("tensor dim"));
      count *= t.dims.back();
    }
    if (count * 4 > r.remaining()) {
      throw FormatError(FormatErrorKind::Truncated, body, "tensor '" + t.name + "' data");
    }
    t.data.resize(count);
    for (auto& v : t.data) v = r.f32("tensor data");
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

// --- reconstruction volume ----------------------------------------------

std::vector<std::uint8_t> encode_recon(const ReconVolume& v) {
  ByteWriter w;
  w.magic("RCNV");
  w.u32(kReconVersion);
  for (auto d : v.dims()) w.u32(checked_u32(d, "recon dim"));
  for (double x : {v.origin().x, v.origin().y, v.origin().z, v.voxel_size().x, v.voxel_size().y, v.voxel_size().z}) {
    w.f32(static_cast<float>(x));
  }
  for (double x : v.data()) w.f32(static_cast<float>(x));
  return std::move(w.bytes());
}

ReconVolume decode_recon(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, bytes.size());
  r.expect_magic("RCNV");
  r.expect_version(kReconVersion);
  const auto header_at = r.pos();
  std::array<std::size_t, 3> dims{};
  for (auto& d : dims) d = r.u32("recon dim");
  float f[6];
  for (auto& x : f) x = r.f32("recon geometry");
  ReconVolume v;
  try {
    v = ReconVolume({f[0], f[1], f[2]}, {f[3], f[4], f[5]}, dims);
  } catch (const ValidationError& e) {
    throw FormatError(FormatErrorKind::BadValue, header_at, e.what());
  }
  r.expect_exact(static_cast<std::uint64_t>(v.data().size()) * 4, "recon payload");
  for (auto& x : v.data()) {
    const auto at = r.pos();
    x = r.f32("recon payload");
    if (!std::isfinite(x)) throw FormatError(FormatErrorKind::BadValue, at, "non-finite voxel");
  }
  return v;
}

// --- files ---------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

TransientVolume read_transient(const std::filesystem::path& p) { return decode_transient(read_file(p)); }
void write_transient(const std::filesystem::path& p, const TransientVolume& v) { write_file(p, encode_transient(v)); }
SpmMask read_mask(const std::filesystem::path& p) { return decode_mask(read_file(p)); }
void write_mask(const std::filesystem::path& p, const SpmMask& m) { write_file(p, encode_mask(m)); }
Checkpoint read_checkpoint(const std::filesystem::path& p) { return decode_checkpoint(read_file(p)); }
void write_checkpoint(const std::filesystem::path& p, const Checkpoint& c) { write_file(p, encode_checkpoint(c)); }
ReconVolume read_recon(const std::filesystem::path& p) { return decode_recon(read_file(p)); }
void write_recon(const std::filesystem::path& p, const ReconVolume& v) { write_file(p, encode_recon(v)); }

// --- PGM -----------------------------------------------------------------

std::vector<std::uint8_t> encode_pgm(const Image& image) {
  if (image.data.size() != image.height * image.width) throw ValidationError("pgm: image buffer size mismatch");
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
  }
  return out;
}

Image decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto token = [&](const char* what) {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    const auto start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    if (start == pos) throw FormatError(FormatErrorKind::Truncated, pos, std::string("pgm ") + what);
    return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
  };
  if (token("magic") != "P5") throw FormatError(FormatErrorKind::BadMagic, 0, "expected 'P5'");
  Image img;
  std::size_t maxval = 0;
  try {
    img.width = std::stoul(token("width"));
    img.height = std::stoul(token("height"));
    maxval = std::stoul(token("maxval"));
  } catch (const std::logic_error&) {
    throw FormatError(FormatErrorKind::BadValue, pos, "pgm header field is not a number");
  }
  if (maxval == 0 || maxval > 255) throw FormatError(FormatErrorKind::BadValue, pos, "only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t n = img.width * img.height;
  if (bytes.size() < pos + n) throw FormatError(FormatErrorKind::Truncated, bytes.size(), "pgm payload");
  if (bytes.size() > pos + n) throw FormatError(FormatErrorKind::SizeMismatch, pos + n, "pgm trailing bytes");
  img.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) img.data[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
  return img;
}

void export_pgm(const std::filesystem::path& p, const Image& image) { write_file(p, encode_pgm(image)); }
Image read_pgm(const std::filesystem::path& p) { return decode_pgm(read_file(p)); }

void export_csv(const std::filesystem::path& p, const MetricReport& report, bool wide) {
  write_text(p, wide ? to_csv_wide(report) : to_csv_long(report));
}

}  // namespace nlos::io
