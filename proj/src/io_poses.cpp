#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wildocc/io/binary.hpp"
#include "wildocc/io/poses.hpp"

namespace wildocc::io {

namespace {
constexpr double kRepairTol = 1e-3;
}

std::vector<RigidPose> parse_poses(const std::string& text, std::vector<std::string>* warnings) {
  std::vector<RigidPose> poses;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kParse, "pose line " + std::to_string(lineno) + ": bad number `" + tok + "`");
      }
    }
    if (v.empty()) continue;
    if (v.size() != 12)
      throw Error(ErrorKind::kParse, "pose line " + std::to_string(lineno) + ": expected 12 values, got " +
                                         std::to_string(v.size()));
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = v[r * 4 + c];
    if (!m.allFinite())
      throw Error(ErrorKind::kInvalidPose, "pose line " + std::to_string(lineno) + ": non-finite value");
    const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
    const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (err > RigidPose::kOrthoTol || r.determinant() <= 0.0) {
      if (err > kRepairTol || r.determinant() <= 0.0)
        throw Error(ErrorKind::kInvalidPose,
                    "pose line " + std::to_string(lineno) + ": rotation is not orthonormal");
      m.topLeftCorner<3, 3>() = orthonormalize(r);
      if (warnings)
        warnings->push_back("pose line " + std::to_string(lineno) + ": re-orthonormalized (error " +
                            std::to_string(err) + ")");
    }
    poses.emplace_back(m);
  }
  return poses;
}

std::vector<RigidPose> read_poses(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const Bytes b = read_file(path);
  try {
    return parse_poses(std::string(b.begin(), b.end()), warnings);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_poses(const std::vector<RigidPose>& poses) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& p : poses) {
    const auto& m = p.matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) out << m(r, c) << (r == 2 && c == 3 ? '\n' : ' ');
  }
  return out.str();
}

std::vector<double> read_timestamps(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  std::istringstream in(std::string(b.begin(), b.end()));
  std::vector<double> t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) {
      std::string tok;
      std::istringstream probe(line);
      if (probe >> tok)
        throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": bad timestamp");
      continue;
    }
    t.push_back(v);
  }
  return t;
}

}  // namespace wildocc::io
