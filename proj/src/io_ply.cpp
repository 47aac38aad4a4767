#include <cstring>
#include <functional>
#include <sstream>

#include "wildocc/io/binary.hpp"
#include "wildocc/io/ply.hpp"

namespace wildocc::io {

namespace {

std::string header(PlyFormat format, std::size_t vertices, bool label, std::size_t faces, bool with_faces) {
  std::ostringstream h;
  h << "ply\nformat " << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n";
  h << "element vertex " << vertices << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (label) h << "property uchar label\n";
  if (with_faces) h << "element face " << faces << "\nproperty list uchar int vertex_indices\n";
  h << "end_header\n";
  return h.str();
}

std::string finish(std::string head, ByteWriter& body) {
  head.append(reinterpret_cast<const char*>(body.bytes().data()), body.bytes().size());
  return head;
}

}  // namespace

std::string encode_mesh_ply(const TriangleMesh& mesh, PlyFormat format) {
  std::string out = header(format, mesh.vertices.size(), false, mesh.triangles.size(), true);
  if (format == PlyFormat::kAscii) {
    std::ostringstream s;
    s.precision(9);
    for (const auto& v : mesh.vertices)
      s << static_cast<float>(v.x()) << ' ' << static_cast<float>(v.y()) << ' ' << static_cast<float>(v.z()) << '\n';
    for (const auto& t : mesh.triangles) s << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    return out + s.str();
  }
  ByteWriter w;
  for (const auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(v[a]));
  for (const auto& t : mesh.triangles) {
    w.u8(3);
    for (int a = 0; a < 3; ++a) w.u32(static_cast<std::uint32_t>(t[a]));
  }
  return finish(std::move(out), w);
}

void write_mesh_ply(const std::filesystem::path& path, const TriangleMesh& mesh, PlyFormat format) {
  atomic_write(path, encode_mesh_ply(mesh, format));
}

void write_cloud_ply(const std::filesystem::path& path, const SemanticPointCloud& cloud, PlyFormat format) {
  const bool label = cloud.labels.size() == cloud.size();
  std::string out = header(format, cloud.size(), label, 0, false);
  if (format == PlyFormat::kAscii) {
    std::ostringstream s;
    s.precision(9);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto& p = cloud.points[i];
      s << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' ' << static_cast<float>(p.z());
      if (label) s << ' ' << int(cloud.labels[i]);
      s << '\n';
    }
    atomic_write(path, out + s.str());
    return;
  }
  ByteWriter w;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(cloud.points[i][a]));
    if (label) w.u8(cloud.labels[i]);
  }
  atomic_write(path, finish(std::move(out), w));
}

namespace {

struct Property {
  std::string name, type, count_type;  // count_type non-empty for lists
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

int type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw Error(ErrorKind::kFormat, "unknown PLY type " + t);
}

double read_binary(ByteReader& r, const std::string& t) {
  const int n = type_size(t);
  const std::uint8_t* p = r.take(n);
  auto as = [p](auto v) {
    std::memcpy(&v, p, sizeof v);
    return static_cast<double>(v);
  };
  if (t == "char" || t == "int8") return as(std::int8_t{});
  if (t == "uchar" || t == "uint8") return as(std::uint8_t{});
  if (t == "short" || t == "int16") return as(std::int16_t{});
  if (t == "ushort" || t == "uint16") return as(std::uint16_t{});
  if (t == "int" || t == "int32") return as(std::int32_t{});
  if (t == "uint" || t == "uint32") return as(std::uint32_t{});
  if (t == "float" || t == "float32") return as(float{});
  return as(double{});
}


using VertexFn = std::function<void(const Point3&, int label)>;
using FaceFn = std::function<void(const std::vector<std::int32_t>&)>;

// Walks every element of an ASCII or binary little-endian PLY. `label` is
// -1 when the vertex has no label property.
void parse_ply(const std::filesystem::path& path, const VertexFn& on_vertex, const FaceFn& on_face) {
  const Bytes bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  const std::size_t end = text.find("end_header");
  if (text.rfind("ply", 0) != 0 || end == std::string::npos)
    throw Error(ErrorKind::kFormat, path.string() + ": not a PLY file");
  const std::size_t body = text.find('\n', end) + 1;

  std::istringstream hs(text.substr(0, end));
  std::string line, format;
  std::vector<Element> elements;
  while (std::getline(hs, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      ls >> format;
    } else if (kw == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw Error(ErrorKind::kFormat, "PLY property before element");
      Property p;
      ls >> p.type;
      if (p.type == "list") ls >> p.count_type >> p.type;
      ls >> p.name;
      elements.back().props.push_back(p);
    }
  }
  if (format != "ascii" && format != "binary_little_endian")
    throw Error(ErrorKind::kFormat, path.string() + ": unsupported PLY format " + format);

  const bool ascii = format == "ascii";
  std::istringstream as(ascii ? text.substr(body) : std::string());
  ByteReader br(bytes.data() + body, ascii ? 0 : bytes.size() - body);
  auto next = [&](const std::string& type) -> double {
    if (!ascii) return read_binary(br, type);
    double v;
    if (!(as >> v)) throw Error(ErrorKind::kFormat, path.string() + ": truncated PLY body");
    return v;
  };

  for (const auto& e : elements) {
    for (std::size_t n = 0; n < e.count; ++n) {
      Point3 p = Point3::Zero();
      int label = -1;
      std::vector<std::int32_t> idx;
      for (const auto& prop : e.props) {
        if (!prop.count_type.empty()) {
          const auto cnt = static_cast<std::size_t>(next(prop.count_type));
          for (std::size_t c = 0; c < cnt; ++c) idx.push_back(static_cast<std::int32_t>(next(prop.type)));
          continue;
        }
        const double v = next(prop.type);
        if (prop.name == "x") p.x() = v;
        else if (prop.name == "y") p.y() = v;
        else if (prop.name == "z") p.z() = v;
        else if (prop.name == "label") label = static_cast<int>(v);
      }
      if (e.name == "vertex") on_vertex(p, label);
      else if (e.name == "face") on_face(idx);
    }
  }
}

}  // namespace

TriangleMesh read_mesh_ply(const std::filesystem::path& path) {
  TriangleMesh mesh;
  parse_ply(
      path, [&](const Point3& p, int) { mesh.vertices.push_back(p); },
      [&](const std::vector<std::int32_t>& idx) {
        for (std::size_t c = 2; c < idx.size(); ++c) mesh.triangles.push_back({idx[0], idx[c - 1], idx[c]});
      });
  mesh.validate();
  return mesh;
}

SemanticPointCloud read_cloud_ply(const std::filesystem::path& path) {
  SemanticPointCloud cloud;
  parse_ply(
      path,
      [&](const Point3& p, int label) {
        cloud.points.push_back(p);
        cloud.labels.push_back(label < 0 || label > 255 ? kNoiseClass : static_cast<ClassId>(label));
      },
      [](const std::vector<std::int32_t>&) {});
  cloud.validate();
  return cloud;
}

}  // namespace wildocc::io
