#pragma once

#include "affordfit/geom/camera.hpp"
#include "affordfit/hoiopt/scene.hpp"
#include "affordfit/kernels/nearest.hpp"
#include "affordfit/types.hpp"

#include <cstdint>
#include <vector>

namespace affordfit::hoiopt {

/// x -> scale * R x + t.
struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 operator*(const Vec3& x) const { return scale * (rotation * x) + translation; }
};

struct AlignOptions {
  int steps = 300;
  double learning_rate = 1e-2;
  int max_points = 4096;
  double pixel_scale = 0.0;  // <= 0 means 1 / fx
  std::uint64_t seed = 0;
  kernels::Exec exec = kernels::Exec::parallel;
};

struct AlignResult {
  std::vector<Similarity> transforms;
  std::vector<bool> interpolated;   // frame had no human points
  std::vector<double> final_loss;   // 0 for interpolated frames
};

/// Per-frame similarity taking the human points of each depth point map onto
/// the recovered body: 3D Chamfer to the body vertices plus 2D Chamfer between
/// the projected transformed points and the human mask pixels (skipped when a
/// frame has no pixels). Each frame starts from moment matching (centroid and
/// RMS radius) and runs Adam on (log scale, 6D rotation, translation). Frames
/// with no human points are interpolated from their neighbours; throws
/// EmptyHumanObservation when no frame has any.
AlignResult align_point_maps(const std::vector<PointCloud>& human_points,
                             const std::vector<std::vector<Vec2>>& human_pixels, const HumanMotionSequence& motion,
                             const CameraIntrinsics& intrinsics, const AlignOptions& options = {});

/// Geodesic interpolation: log-scale and translation linearly, rotation by slerp.
Similarity interpolate(const Similarity& a, const Similarity& b, double alpha);

}  // namespace affordfit::hoiopt
