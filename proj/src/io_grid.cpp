#include <charconv>
#include <cstring>

#include "wildocc/io/feature_file.hpp"
#include "wildocc/io/grid_file.hpp"

namespace wildocc::io {

namespace {

// Header reals are float32 on disk. Widen through the shortest decimal that
// names the float, so 0.2f reads back as the double 0.2 and re-encoding
// still yields the same bits.
double widen(float f) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, f).ptr;
  double d = 0.0;
  std::from_chars(buf, end, d);
  return static_cast<float>(d) == f ? d : static_cast<double>(f);
}

void put_spec(ByteWriter& w, const GridSpec& s) {
  for (int a = 0; a < 3; ++a) w.u32(static_cast<std::uint32_t>(s.dims[a]));
  w.f32(static_cast<float>(s.voxel_size));
  for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(s.origin[a]));
}

GridSpec get_spec(ByteReader& r) {
  GridSpec s;
  for (int a = 0; a < 3; ++a) {
    const std::uint32_t d = r.u32();
    if (d == 0 || d > (1u << 20)) throw Error(ErrorKind::kFormat, "implausible grid dimension");
    s.dims[a] = static_cast<int>(d);
  }
  s.voxel_size = widen(r.f32());
  for (int a = 0; a < 3; ++a) s.origin[a] = widen(r.f32());
  if (!(s.voxel_size > 0.0) || !s.origin.allFinite())
    throw Error(ErrorKind::kFormat, "invalid grid geometry in header");
  return s;
}

void expect_magic(ByteReader& r, const char* magic, std::uint16_t version) {
  if (std::memcmp(r.take(4), magic, 4) != 0)
    throw Error(ErrorKind::kFormat, std::string("bad magic, expected ") + magic);
  const std::uint16_t v = r.u16();
  if (v != version) throw Error(ErrorKind::kFormat, "unsupported version " + std::to_string(v));
}

}  // namespace

Bytes encode_grid(const OccupancyGrid& grid) {
  grid.spec.validate();
  if (grid.labels.size() != grid.spec.voxel_count())
    throw Error(ErrorKind::kPrecondition, "grid label count does not match its spec");
  ByteWriter w;
  w.bytes().reserve(kGridHeaderBytes + grid.labels.size());
  w.raw("WOCC", 4);
  w.u16(kGridVersion);
  put_spec(w, grid.spec);
  w.raw(grid.labels.data(), grid.labels.size());
  return std::move(w.bytes());
}

OccupancyGrid decode_grid(const Bytes& bytes) {
  ByteReader r(bytes);
  expect_magic(r, "WOCC", kGridVersion);
  OccupancyGrid g(get_spec(r));
  if (r.remaining() != g.labels.size())
    throw Error(ErrorKind::kFormat, "grid payload has " + std::to_string(r.remaining()) +
                                        " bytes, expected " + std::to_string(g.labels.size()));
  std::memcpy(g.labels.data(), r.take(g.labels.size()), g.labels.size());
  return g;
}

void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid) {
  atomic_write(path, encode_grid(grid));
}

OccupancyGrid read_grid(const std::filesystem::path& path) {
  try {
    return decode_grid(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

Bytes encode_feature_volume(const FeatureVolume& v) {
  ByteWriter w;
  w.raw("WFVL", 4);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(v.channels()));
  put_spec(w, v.spec());
  for (double x : v.storage()) w.f32(static_cast<float>(x));
  return std::move(w.bytes());
}

FeatureVolume decode_feature_volume(const Bytes& bytes) {
  ByteReader r(bytes);
  expect_magic(r, "WFVL", 1);
  const std::uint32_t channels = r.u32();
  if (channels == 0 || channels > 4096) throw Error(ErrorKind::kFormat, "implausible channel count");
  const GridSpec spec = get_spec(r);
  FeatureVolume v(spec, static_cast<int>(channels));
  if (r.remaining() != v.size() * 4)
    throw Error(ErrorKind::kFormat, "feature payload size does not match header");
  for (double& x : v.storage()) x = r.f32();
  return v;
}

void write_feature_volume(const std::filesystem::path& path, const FeatureVolume& v) {
  atomic_write(path, encode_feature_volume(v));
}

FeatureVolume read_feature_volume(const std::filesystem::path& path) {
  try {
    return decode_feature_volume(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace wildocc::io
