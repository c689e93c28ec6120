#pragma once

#include "affordfit/io/ply.hpp"
#include "affordfit/kernels/nearest.hpp"
#include "affordfit/types.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <vector>

namespace affordfit {

/// Dense signed-distance samples on a regular grid; negative inside.
/// values are stored x-fastest: index = i + nx * (j + ny * k).
struct SdfGrid {
  Vec3 origin = Vec3::Zero();
  double cell_size = 0.0;
  std::array<int, 3> dims = {0, 0, 0};
  std::vector<float> values;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
  }
  float at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 node(int i, int j, int k) const { return origin + cell_size * Vec3(i, j, k); }
  Vec3 upper() const { return node(dims[0] - 1, dims[1] - 1, dims[2] - 1); }

  void validate() const;
};

inline constexpr int kDefaultSdfResolution = 128;

struct SdfSample {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  /// Flattened cell index used for the interpolation (or -1 outside the grid);
  /// lets callers detect when a perturbation crosses a cell boundary.
  long cell = -1;
};

/// Trilinear interpolation inside the grid. Outside, the point is clamped to the
/// grid box and the Euclidean distance to the box is added, so values stay
/// finite and grow monotonically outward.
SdfSample sample_sdf(const SdfGrid& grid, const Vec3& p);
inline double query_sdf(const SdfGrid& grid, const Vec3& p) { return sample_sdf(grid, p).value; }
std::vector<double> query_sdf(const SdfGrid& grid, const PointCloud& points);

/// Grid over the mesh bounds plus a 10% margin of the longest extent, with
/// `resolution` cells along the longest axis. Sign comes from ray parity on
/// watertight meshes and from the generalized winding number otherwise.
/// Throws DegenerateMesh for empty meshes or meshes with only zero-area faces.
SdfGrid build_sdf(const TriangleMesh& mesh, int resolution = kDefaultSdfResolution,
                  kernels::Exec exec = kernels::Exec::parallel);

/// Samples an analytic signed distance function over [lo, hi] plus the same margin.
SdfGrid sample_sdf_function(const std::function<double(const Vec3&)>& sdf, const Vec3& lo, const Vec3& hi,
                            int resolution);

/// Raw binary layout: 8-byte magic "AFSDF01\0", origin (3 x float64), cell size
/// (float64), dims (3 x int32), then nx*ny*nz float32 values x-fastest.
void write_sdf(const std::filesystem::path& path, const SdfGrid& grid);
SdfGrid read_sdf(const std::filesystem::path& path);

}  // namespace affordfit
