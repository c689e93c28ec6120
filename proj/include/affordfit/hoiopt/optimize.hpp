#pragma once

#include "affordfit/hoiopt/loss.hpp"
#include "affordfit/hoiopt/params.hpp"
#include "affordfit/hoiopt/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace affordfit::hoiopt {

struct OptimizeConfig {
  int steps = 600;
  int restarts = 4;
  double learning_rate = 1e-2;  // Adam base step, cosine-decayed to 0
  LossWeights weights;
  int max_points = 4096;  // per-frame observation cap, 0 disables
  double softmin_temperature = 0.01;
  double pixel_scale = 0.0;
  /// Draw restart yaws uniformly at random instead of evenly spaced.
  bool random_yaw = false;
  int trace_every = 10;
  kernels::Exec exec = kernels::Exec::parallel;

  void validate() const;
};

struct TraceRow {
  int restart = 0;
  int step = 0;
  double learning_rate = 0.0;
  bool exact = false;  // final exact evaluation rather than a step loss
  LossBreakdown loss;
};

struct RestartReport {
  int index = 0;
  double yaw = 0.0;  // radians about the up axis
  bool completed = false;
  std::string error;
  LossBreakdown final_loss;  // exact: hard MD, no subsampling
};

struct OptimizeResult {
  std::vector<std::string> objects;
  std::vector<PoseTrajectory> trajectories;
  LossBreakdown final_loss;
  int best_restart = -1;
  std::vector<RestartReport> restarts;
  std::vector<TraceRow> trace;
};

/// The up axis is -y (camera frame, image y pointing down).
inline const Vec3 kUpAxis{0.0, -1.0, 0.0};

/// Identity rotation turned by `yaw` about the up axis, with per-frame
/// translations that move the model centroid onto the observed centroid.
/// Frames without observations reuse the previous frame (or the next one
/// for leading gaps).
TrajectoryParams initial_params(const Scene& scene, double yaw);

/// Restarts from evenly spaced (or seeded random) yaws, each running Adam on
/// L_total with softmin contact, and keeps the restart with the lowest exact
/// final loss. Throws ValidationError, or NonFiniteLoss when every restart fails.
OptimizeResult optimize(const Scene& scene, const OptimizeConfig& config, std::uint64_t seed);

}  // namespace affordfit::hoiopt
