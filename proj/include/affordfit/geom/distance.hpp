#pragma once

#include "affordfit/kernels/nearest.hpp"
#include "affordfit/types.hpp"

namespace affordfit {

/// Symmetric Chamfer distance with unsquared Euclidean terms:
/// 0.5 * (mean_a min_b |a-b| + mean_b min_a |a-b|). Throws EmptyCloud.
double chamfer_distance(const PointCloud& a, const PointCloud& b,
                        kernels::Exec exec = kernels::Exec::parallel);

/// min over all pairs of |p - q|. Throws EmptyCloud.
double min_pair_distance(const PointCloud& a, const PointCloud& b,
                         kernels::Exec exec = kernels::Exec::parallel);

}  // namespace affordfit
