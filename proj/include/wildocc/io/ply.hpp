#pragma once

#include <filesystem>
#include <string>

#include "wildocc/core/types.hpp"

namespace wildocc::io {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Float32 vertex positions and int32 triangle faces.
std::string encode_mesh_ply(const TriangleMesh& mesh, PlyFormat format);
void write_mesh_ply(const std::filesystem::path& path, const TriangleMesh& mesh, PlyFormat format);
/// Reads meshes written by write_mesh_ply (and most simple x/y/z PLYs).
TriangleMesh read_mesh_ply(const std::filesystem::path& path);

/// Point cloud with a uchar `label` property per vertex.
void write_cloud_ply(const std::filesystem::path& path, const SemanticPointCloud& cloud,
                     PlyFormat format);
/// Vertices of any PLY; labels from a `label` property, else noise.
SemanticPointCloud read_cloud_ply(const std::filesystem::path& path);

}  // namespace wildocc::io
