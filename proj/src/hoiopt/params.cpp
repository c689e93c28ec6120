#include "affordfit/hoiopt/params.hpp"

#include "affordfit/error.hpp"

namespace affordfit::hoiopt {

TrajectoryParams::TrajectoryParams(std::vector<std::string> object_ids, int frames)
    : frame_count(frames), objects(std::move(object_ids)) {
  values.assign(objects.size() * static_cast<std::size_t>(frames) * kBlock, 0.0);
  for (int o = 0; o < object_count(); ++o)
    for (int t = 0; t < frame_count; ++t) set_pose(o, t, RigidPose::identity());
}

TrajectoryParams TrajectoryParams::from_trajectories(std::vector<std::string> object_ids,
                                                     const std::vector<PoseTrajectory>& trajectories) {
  if (object_ids.size() != trajectories.size()) {
    throw Error(ErrorCode::FrameCountMismatch, "one trajectory per object is required");
  }
  const int frames = trajectories.empty() ? 0 : static_cast<int>(trajectories.front().size());
  TrajectoryParams p(std::move(object_ids), frames);
  for (int o = 0; o < p.object_count(); ++o) {
    if (static_cast<int>(trajectories[o].size()) != frames) {
      throw Error(ErrorCode::FrameCountMismatch, "trajectories have different frame counts");
    }
    for (int t = 0; t < frames; ++t) p.set_pose(o, t, trajectories[o][t]);
  }
  return p;
}

RigidPose TrajectoryParams::pose(int object, int frame) const {
  const double* b = block(object, frame);
  return {decode_rotation_6d<double>(b), Vec3(b[6], b[7], b[8])};
}

void TrajectoryParams::set_pose(int object, int frame, const RigidPose& pose) {
  double* b = block(object, frame);
  const Rotation6d a = encode_rotation_6d(pose.rotation);
  for (int i = 0; i < 6; ++i) b[i] = a[i];
  for (int i = 0; i < 3; ++i) b[6 + i] = pose.translation[i];
}

std::vector<PoseTrajectory> TrajectoryParams::decode() const {
  std::vector<PoseTrajectory> out(objects.size(), PoseTrajectory(frame_count));
  for (int o = 0; o < object_count(); ++o)
    for (int t = 0; t < frame_count; ++t) out[o][t] = pose(o, t);
  return out;
}

}  // namespace affordfit::hoiopt
