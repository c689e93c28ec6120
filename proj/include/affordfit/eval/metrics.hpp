#pragma once

#include "affordfit/geom/rotation.hpp"
#include "affordfit/geom/sdf.hpp"
#include "affordfit/hoiopt/scene.hpp"
#include "affordfit/kernels/nearest.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace affordfit::eval {

using BoxCorners = std::array<Vec3, 8>;

/// Corners of the axis-aligned bounding box; corner c has x from bit 0, y from
/// bit 1 and z from bit 2 (0 = min, 1 = max). Throws EmptyCloud.
BoxCorners bounding_box_corners(const std::vector<Vec3>& points);

struct ObjectTrack {
  std::string id;
  BoxCorners corners;  // canonical frame
  PoseTrajectory trajectory;
  std::shared_ptr<const SdfGrid> sdf;  // may be null
};

struct InteractionSample {
  std::vector<hoiopt::HumanMotionSequence> humans;
  std::vector<ObjectTrack> objects;

  /// Throws FrameCountMismatch when humans and trajectories disagree.
  int frame_count() const;
};

/// Human and object scores. A side with no joints (or no objects) scores 0.
struct Score {
  double human = 0.0;
  double object = 0.0;
};

struct Plausibility {
  double non_collision = 1.0;
  double contact = 0.0;
};

inline constexpr double kDefaultCollisionTolerance = 0.005;

/// Mean over joints (box corners) and interior frames of |x_t - (x_{t-1} + x_{t+1}) / 2|.
/// Throws TooFewFrames when T < 3.
Score temporal_smoothness(const InteractionSample& sample, kernels::Exec exec = kernels::Exec::parallel);

/// Mean over unordered sample pairs, then joints (box corners), then frames of
/// the Euclidean distance between corresponding positions. Throws TooFewSamples
/// when fewer than two samples are given, SchemaError when they are not comparable.
Score motion_diversity(const std::vector<InteractionSample>& samples, kernels::Exec exec = kernels::Exec::parallel);

/// A body vertex collides when, in some object's canonical frame, its SDF value
/// is below `tolerance`. non_collision is the mean per-frame fraction of
/// vertices that do not collide; contact is the fraction of frames with at
/// least one colliding vertex.
Plausibility physical_plausibility(const InteractionSample& sample, double tolerance = kDefaultCollisionTolerance,
                                   kernels::Exec exec = kernels::Exec::parallel);

/// Builds a sample from a scene's humans and geometry plus fitted trajectories
/// (in scene object order).
InteractionSample make_sample(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories);

}  // namespace affordfit::eval
