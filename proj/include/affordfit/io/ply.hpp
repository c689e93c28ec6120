#pragma once

#include "affordfit/types.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace affordfit {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Reads vertex x/y/z (any numeric type) and, when present, the integer
/// "part_label" property. ASCII and binary little-endian are supported.
PointCloud read_ply_cloud(const std::filesystem::path& path);
void write_ply_cloud(const std::filesystem::path& path, const PointCloud& cloud, bool binary = true);

TriangleMesh read_ply_mesh(const std::filesystem::path& path);
void write_ply_mesh(const std::filesystem::path& path, const TriangleMesh& mesh, bool binary = true);

/// Wavefront OBJ: `v` and `f` records; polygons are fan-triangulated.
TriangleMesh read_obj(const std::filesystem::path& path);

/// Dispatches on extension (.obj / .ply).
TriangleMesh read_mesh(const std::filesystem::path& path);

}  // namespace affordfit
