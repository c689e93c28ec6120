#pragma once

#include "affordfit/geom/rotation.hpp"

#include <string>
#include <vector>

namespace affordfit::hoiopt {

/// Flat optimisation vector: for every object and frame, the 6D rotation
/// encoding (two 3-vectors) followed by the translation.
struct TrajectoryParams {
  static constexpr int kBlock = 9;

  int frame_count = 0;
  std::vector<std::string> objects;
  std::vector<double> values;

  TrajectoryParams() = default;
  TrajectoryParams(std::vector<std::string> object_ids, int frames);
  static TrajectoryParams from_trajectories(std::vector<std::string> object_ids,
                                            const std::vector<PoseTrajectory>& trajectories);

  int object_count() const { return static_cast<int>(objects.size()); }
  std::size_t offset(int object, int frame) const {
    return (static_cast<std::size_t>(object) * frame_count + frame) * kBlock;
  }
  double* block(int object, int frame) { return values.data() + offset(object, frame); }
  const double* block(int object, int frame) const { return values.data() + offset(object, frame); }

  RigidPose pose(int object, int frame) const;
  void set_pose(int object, int frame, const RigidPose& pose);
  std::vector<PoseTrajectory> decode() const;
};

}  // namespace affordfit::hoiopt
