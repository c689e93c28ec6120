#pragma once
// Brute-force reference implementations used by tests and the acceptance suite.

#include "affordfit/eval/metrics.hpp"
#include "affordfit/hoiopt/loss.hpp"
#include "affordfit/hoiopt/scene.hpp"

#include <vector>

namespace affordfit::synth {

/// Every loss term by exhaustive O(N^2) search over all points (no
/// subsampling, exact contact minimum). `trajectories` are in scene object
/// order; pixel_scale <= 0 means 1 / fx.
hoiopt::LossBreakdown oracle_losses(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories,
                                    const hoiopt::LossWeights& weights, double pixel_scale = 0.0);

/// Trilinear SDF lookup written independently of geom.
double oracle_sdf(const SdfGrid& grid, const Vec3& p);

eval::Score oracle_temporal_smoothness(const eval::InteractionSample& sample);
eval::Score oracle_motion_diversity(const std::vector<eval::InteractionSample>& samples);
eval::Plausibility oracle_physical_plausibility(const eval::InteractionSample& sample,
                                                double tolerance = eval::kDefaultCollisionTolerance);

}  // namespace affordfit::synth
