#include <fstream>
#include <sstream>

#include "wildocc/io/binary.hpp"
#include "wildocc/io/scan.hpp"

namespace wildocc::io {

namespace fs = std::filesystem;

SemanticPointCloud read_point_bin(const fs::path& path) {
  const Bytes bytes = read_file(path);
  if (bytes.size() % 16 != 0)
    throw Error(ErrorKind::kMalformedFile,
                path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 16");
  const std::size_t n = bytes.size() / 16;
  SemanticPointCloud cloud;
  cloud.points.resize(n);
  cloud.intensity.resize(n);
  cloud.labels.assign(n, kNoiseClass);
  ByteReader r(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    const float x = r.f32(), y = r.f32(), z = r.f32();
    cloud.points[i] = Point3(x, y, z);
    cloud.intensity[i] = r.f32();
  }
  return cloud;
}

void write_point_bin(const fs::path& path, const SemanticPointCloud& cloud) {
  ByteWriter w;
  w.bytes().reserve(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(cloud.points[i][a]));
    w.f32(cloud.has_intensity() ? cloud.intensity[i] : 0.0f);
  }
  atomic_write(path, w.bytes());
}

std::vector<std::uint32_t> read_raw_labels(const fs::path& path) {
  const Bytes bytes = read_file(path);
  if (bytes.size() % 4 != 0)
    throw Error(ErrorKind::kMalformedFile,
                path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 4");
  std::vector<std::uint32_t> raw(bytes.size() / 4);
  ByteReader r(bytes);
  for (auto& v : raw) v = r.u32();
  return raw;
}

void write_raw_labels(const fs::path& path, const std::vector<std::uint32_t>& raw) {
  ByteWriter w;
  for (auto v : raw) w.u32(v);
  atomic_write(path, w.bytes());
}

std::vector<ClassId> read_labels(const fs::path& path, const LabelMap& map) {
  const auto raw = read_raw_labels(path);
  std::vector<ClassId> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = map.remap(raw[i] & 0xFFFFu);
  return out;
}

SemanticPointCloud read_labeled_scan(const fs::path& bin, const fs::path& label, const LabelMap& map) {
  SemanticPointCloud cloud = read_point_bin(bin);
  auto labels = read_labels(label, map);
  if (labels.size() != cloud.size())
    throw Error(ErrorKind::kPairing, bin.string() + " has " + std::to_string(cloud.size()) +
                                         " points but " + label.string() + " has " +
                                         std::to_string(labels.size()) + " labels");
  cloud.labels = std::move(labels);
  return cloud;
}

LabelMap read_label_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::pair<ClassId, std::string>> classes;
  std::set<ClassId> ground;
  std::map<std::uint32_t, ClassId> remap;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    if (kind == "class") {
      long id;
      std::string name, flag;
      if (!(ss >> id >> name)) fail("expected `class <id> <name> [ground]`");
      if (id < 1 || id > 254) fail("class id out of range");
      if (ss >> flag) {
        if (flag != "ground") fail("unexpected token `" + flag + "`");
        ground.insert(static_cast<ClassId>(id));
      }
      classes.emplace_back(static_cast<ClassId>(id), name);
    } else if (kind == "remap") {
      long raw, id;
      if (!(ss >> raw >> id)) fail("expected `remap <raw> <class>`");
      if (raw < 0 || id < 0 || id > 255) fail("remap value out of range");
      remap[static_cast<std::uint32_t>(raw)] = static_cast<ClassId>(id);
    } else {
      fail("unknown directive `" + kind + "`");
    }
    std::string extra;
    if (ss >> extra) fail("trailing token `" + extra + "`");
  }
  return LabelMap(std::move(classes), std::move(ground), std::move(remap));
}

void write_label_map(const fs::path& path, const LabelMap& map) {
  std::ostringstream out;
  for (const auto& [id, name] : map.classes()) {
    out << "class " << int(id) << ' ' << name;
    if (map.is_ground(id)) out << " ground";
    out << '\n';
  }
  for (const auto& [raw, id] : map.remap_table()) out << "remap " << raw << ' ' << int(id) << '\n';
  atomic_write(path, out.str());
}

}  // namespace wildocc::io
