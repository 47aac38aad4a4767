#include <gtest/gtest.h>

#include <fstream>

#include "test_util.hpp"
#include "wildocc/io/feature_file.hpp"
#include "wildocc/io/grid_file.hpp"
#include "wildocc/io/key_value.hpp"
#include "wildocc/io/ply.hpp"
#include "wildocc/io/poses.hpp"
#include "wildocc/io/scan.hpp"

using namespace wildocc;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

using test::kind_of;

}  // namespace

TEST(PointBin, ThirtyTwoBytesIsTwoPoints) {
  const auto dir = test::scratch_dir("bin32");
  io::ByteWriter w;
  for (float v : {1.f, 2.f, 3.f, 0.5f, -1.f, -2.f, -3.f, 0.25f}) w.f32(v);
  write_bytes(dir / "a.bin", w.bytes());
  const auto c = io::read_point_bin(dir / "a.bin");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], Point3(-1, -2, -3));
  EXPECT_EQ(c.intensity[0], 0.5f);
}

TEST(PointBin, MalformedSize) {
  const auto dir = test::scratch_dir("binbad");
  write_bytes(dir / "a.bin", std::vector<std::uint8_t>(33, 0));
  EXPECT_EQ(kind_of([&] { io::read_point_bin(dir / "a.bin"); }), ErrorKind::kMalformedFile);
  write_bytes(dir / "a.label", std::vector<std::uint8_t>(6, 0));
  EXPECT_EQ(kind_of([&] { io::read_raw_labels(dir / "a.label"); }), ErrorKind::kMalformedFile);
}

TEST(Labels, LowSixteenBitsRemapped) {
  const auto dir = test::scratch_dir("labels");
  io::write_raw_labels(dir / "a.label", {0x00010003u, 4u, 0x7FFF0000u, 12345u});
  const LabelMap m = LabelMap::default_map();
  const auto l = io::read_labels(dir / "a.label", m);
  EXPECT_EQ(l, (std::vector<ClassId>{m.remap(3), m.id_of("tree"), kNoiseClass, kNoiseClass}));
  EXPECT_EQ(l[0], m.id_of("grass"));
}

TEST(Scan, RoundTripAndPairing) {
  const auto dir = test::scratch_dir("scan");
  std::mt19937_64 rng(1);
  SemanticPointCloud c;
  for (int i = 0; i < 100; ++i) {
    // float-representable values round-trip exactly
    std::uniform_real_distribution<float> u(-50.f, 50.f);
    const float x = u(rng), y = u(rng), z = u(rng);
    c.points.emplace_back(x, y, z);
    c.intensity.push_back(static_cast<float>(i) / 100.f);
    c.labels.push_back(static_cast<ClassId>(1 + i % 7));
  }
  io::write_point_bin(dir / "a.bin", c);
  std::vector<std::uint32_t> raw;
  const std::uint32_t raw_of[] = {0, 3, 4, 19, 31, 33, 27, 34};
  for (auto l : c.labels) raw.push_back(raw_of[l] | 0xABCD0000u);
  io::write_raw_labels(dir / "a.label", raw);
  const auto back = io::read_labeled_scan(dir / "a.bin", dir / "a.label", LabelMap::default_map());
  EXPECT_EQ(back.points, c.points);
  EXPECT_EQ(back.intensity, c.intensity);
  EXPECT_EQ(back.labels, c.labels);

  raw.pop_back();
  io::write_raw_labels(dir / "b.label", raw);
  EXPECT_EQ(kind_of([&] { io::read_labeled_scan(dir / "a.bin", dir / "b.label", LabelMap::default_map()); }),
            ErrorKind::kPairing);
}

TEST(Poses, ParseExamples) {
  auto p = io::parse_poses("1 0 0 0 0 1 0 0 0 0 1 0\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].matrix(), Eigen::Matrix4d::Identity());
  p = io::parse_poses("1 0 0 4.5 0 1 0 -2 0 0 1 7\n\n1 0 0 0 0 1 0 0 0 0 1 0\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].translation(), Eigen::Vector3d(4.5, -2, 7));
  EXPECT_EQ(p[0].rotation(), Eigen::Matrix3d::Identity());
}

TEST(Poses, WrongTokenCountNamesLine) {
  try {
    io::parse_poses("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { io::parse_poses("1 0 0 0 0 1 0 0 0 0 1 x\n"); }), ErrorKind::kParse);
}

TEST(Poses, NearOrthonormalIsRepairedWithWarning) {
  std::vector<std::string> warnings;
  const auto p = io::parse_poses("1.0002 0 0 0 0 1 0 0 0 0 1 0\n", &warnings);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
  const Eigen::Matrix3d r = p[0].rotation();
  EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_EQ(kind_of([] { io::parse_poses("1.01 0 0 0 0 1 0 0 0 0 1 0\n"); }), ErrorKind::kInvalidPose);
}

TEST(Poses, FormatRoundTrip) {
  std::mt19937_64 rng(2);
  std::vector<RigidPose> poses;
  for (int i = 0; i < 10; ++i) poses.push_back(test::random_pose(rng, 100));
  const auto back = io::parse_poses(io::format_poses(poses));
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) EXPECT_EQ(back[i].matrix(), poses[i].matrix());
}

TEST(GridFile, DefaultSizeAndLayout) {
  OccupancyGrid g{GridSpec{}};
  g.at({1, 2, 3}) = 5;
  const auto bytes = io::encode_grid(g);
  EXPECT_EQ(bytes.size(), 4u + 2 + 12 + 4 + 12 + 400000);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "WOCC");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 100);  // nx little-endian
  EXPECT_EQ(bytes[34 + (1 * 100 + 2) * 40 + 3], 5);
}

TEST(GridFile, RandomRoundTripBitExact) {
  const auto dir = test::scratch_dir("grid");
  std::mt19937_64 rng(3);
  GridSpec spec;
  spec.dims = {17, 9, 5};
  spec.origin = Point3(-3.25, 1.5, 0.125);
  spec.voxel_size = 0.25;
  OccupancyGrid g(spec);
  for (auto& l : g.labels) l = static_cast<ClassId>(rng() % 9 == 8 ? 255 : rng() % 8);
  io::write_grid(dir / "g.wocc", g);
  const OccupancyGrid back = io::read_grid(dir / "g.wocc");
  EXPECT_EQ(back, g);
  EXPECT_EQ(io::encode_grid(back), io::read_file(dir / "g.wocc"));
}

TEST(GridFile, BadMagicVersionTruncated) {
  auto bytes = io::encode_grid(OccupancyGrid{GridSpec{}});
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(kind_of([&] { io::decode_grid(bad); }), ErrorKind::kFormat);
  bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(kind_of([&] { io::decode_grid(bad); }), ErrorKind::kFormat);
  bad.assign(bytes.begin(), bytes.end() - 1);
  EXPECT_EQ(kind_of([&] { io::decode_grid(bad); }), ErrorKind::kFormat);
  bad.assign(bytes.begin(), bytes.begin() + 20);
  EXPECT_EQ(kind_of([&] { io::decode_grid(bad); }), ErrorKind::kFormat);
}

TEST(AtomicWrite, NoPartialFileOnFailure) {
  const auto dir = test::scratch_dir("atomic");
  EXPECT_EQ(kind_of([&] { io::write_grid(dir / "missing" / "g.wocc", OccupancyGrid{GridSpec{}}); }), ErrorKind::kIo);
  io::atomic_write(dir / "t.txt", std::string("hello"));
  io::atomic_write(dir / "t.txt", std::string("bye"));
  EXPECT_EQ(io::read_file(dir / "t.txt").size(), 3u);
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
}

TEST(Ply, MeshRoundTripBothFormats) {
  const auto dir = test::scratch_dir("ply");
  TriangleMesh m;
  m.vertices = {Point3(0, 0, 0), Point3(1.5, 0, 0), Point3(0, 2.25, 0), Point3(0, 0, -3)};
  m.triangles = {{0, 1, 2}, {0, 3, 1}};
  for (auto fmt : {io::PlyFormat::kAscii, io::PlyFormat::kBinaryLittleEndian}) {
    io::write_mesh_ply(dir / "m.ply", m, fmt);
    const TriangleMesh back = io::read_mesh_ply(dir / "m.ply");
    EXPECT_EQ(back.vertices, m.vertices);
    EXPECT_EQ(back.triangles, m.triangles);
  }
  const std::string text = io::encode_mesh_ply(m, io::PlyFormat::kBinaryLittleEndian);
  EXPECT_NE(text.find("format binary_little_endian 1.0"), std::string::npos);
  EXPECT_NE(text.find("property float x"), std::string::npos);
}

TEST(Ply, CloudRoundTripWithLabels) {
  const auto dir = test::scratch_dir("plycloud");
  SemanticPointCloud c;
  c.points = {Point3(1, 2, 3), Point3(-0.5, 0.25, 8)};
  c.labels = {3, 255};
  for (auto fmt : {io::PlyFormat::kAscii, io::PlyFormat::kBinaryLittleEndian}) {
    io::write_cloud_ply(dir / "c.ply", c, fmt);
    const auto back = io::read_cloud_ply(dir / "c.ply");
    EXPECT_EQ(back.points, c.points);
    EXPECT_EQ(back.labels, c.labels);
  }
}

TEST(FeatureFile, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-3, 3);
  GridSpec spec;
  spec.dims = {3, 4, 5};
  FeatureVolume v(spec, 2);
  for (double& x : v.storage()) x = u(rng);
  const FeatureVolume back = io::decode_feature_volume(io::encode_feature_volume(v));
  EXPECT_EQ(back, v);
  EXPECT_EQ(io::encode_feature_volume(v).size(), 4u + 2 + 4 + 12 + 4 + 12 + 2 * 60 * 4);
  auto bytes = io::encode_feature_volume(v);
  bytes.pop_back();
  EXPECT_EQ(kind_of([&] { io::decode_feature_volume(bytes); }), ErrorKind::kFormat);
}

TEST(KeyValue, ParseRepeatAndComments) {
  const auto kv = io::KeyValueFile::parse("# comment\nwindow = 400\n\n frame = a b \nframe=c d\nwindow=3\n");
  EXPECT_EQ(*kv.get("window"), "3");
  EXPECT_EQ(kv.get_all("frame"), (std::vector<std::string>{"a b", "c d"}));
  EXPECT_FALSE(kv.get("missing").has_value());
  EXPECT_EQ(kind_of([] { io::KeyValueFile::parse("novalue\n"); }), ErrorKind::kParse);
  EXPECT_EQ(kind_of([] { io::KeyValueFile::parse(" = 3\n"); }), ErrorKind::kParse);
}

TEST(LabelMapFile, RoundTripAndErrors) {
  const auto dir = test::scratch_dir("labelmap");
  io::write_label_map(dir / "m.txt", LabelMap::default_map());
  const LabelMap back = io::read_label_map(dir / "m.txt");
  const LabelMap ref = LabelMap::default_map();
  EXPECT_EQ(back.classes(), ref.classes());
  EXPECT_EQ(back.ground_classes(), ref.ground_classes());
  EXPECT_EQ(back.remap_table(), ref.remap_table());

  io::atomic_write(dir / "bad.txt", std::string("class 1 grass\nremap 3\n"));
  EXPECT_EQ(kind_of([&] { io::read_label_map(dir / "bad.txt"); }), ErrorKind::kParse);
  io::atomic_write(dir / "gap.txt", std::string("class 1 a\nclass 3 b\n"));
  EXPECT_THROW(io::read_label_map(dir / "gap.txt"), Error);
}
