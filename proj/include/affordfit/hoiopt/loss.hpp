#pragma once

#include "affordfit/hoiopt/params.hpp"
#include "affordfit/hoiopt/scene.hpp"
#include "affordfit/kernels/nearest.hpp"
#include "affordfit/pag/pag.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace affordfit::hoiopt {

struct LossOptions {
  /// Softmin pair distance inside MD (for optimisation) instead of the exact minimum.
  bool soft_contact = false;
  double softmin_temperature = 0.01;
  /// Per-frame cap on observation clouds and mask pixels; 0 disables subsampling.
  int max_points = 4096;
  std::uint64_t seed = 0;
  /// Multiplies 2D Chamfer distances; <= 0 means 1 / fx (normalised image units).
  double pixel_scale = 0.0;
  /// Skip terms whose weight is zero (their breakdown entries stay 0).
  bool skip_unweighted = false;
  kernels::Exec exec = kernels::Exec::parallel;
};

/// Unweighted components plus the weighted total.
struct LossBreakdown {
  double fit_3d_object = 0.0;
  double fit_3d_part = 0.0;
  double fit_2d_object = 0.0;
  double fit_2d_part = 0.0;
  double contact_continuity = 0.0;
  double contact_dynamics = 0.0;
  double penetration = 0.0;
  double smooth_rotation = 0.0;
  double smooth_translation = 0.0;
  double total = 0.0;

  double fit() const { return fit_3d_object + fit_3d_part + fit_2d_object + fit_2d_part; }
  double contact() const { return contact_continuity + contact_dynamics; }
  double smooth() const { return smooth_rotation + smooth_translation; }
  double weighted(const LossWeights& w) const {
    return w.fit * fit() + w.contact * contact() + w.penetration * penetration + w.smooth * smooth();
  }
};

/// Borrowed views of everything the loss reads; they must outlive any
/// evaluator built from them. Any pointer may be null, in which case the terms
/// needing it contribute 0.
struct LossInputs {
  int frame_count = 0;
  const std::vector<ObjectModel>* objects = nullptr;
  const ObservationBundle* observations = nullptr;
  const std::vector<HumanMotionSequence>* humans = nullptr;
  const pag::ConstraintSet* constraints = nullptr;
};

/// Precomputes spatial indices and subsamples once, then evaluates L_total and
/// its gradient for any parameter vector over the same objects.
class LossEvaluator {
 public:
  LossEvaluator(const LossInputs& inputs, const LossWeights& weights, const LossOptions& options = {});
  LossEvaluator(const Scene& scene, const pag::ConstraintSet& constraints, const LossWeights& weights,
                const LossOptions& options = {});
  ~LossEvaluator();
  LossEvaluator(LossEvaluator&&) noexcept;
  LossEvaluator& operator=(LossEvaluator&&) noexcept;

  /// `gradient` (if given) receives dL_total/dparams. `signature` (if given)
  /// receives a hash of every discrete choice made: nearest-neighbour
  /// assignments, argmins, SDF cells, penetration signs and fallbacks.
  /// Throws FrameCountMismatch, NonPositiveDepth, TooFewFrames or NonFiniteLoss.
  LossBreakdown evaluate(const TrajectoryParams& params, std::vector<double>* gradient = nullptr,
                         std::uint64_t* signature = nullptr) const;

  const std::vector<std::string>& object_ids() const;
  int frame_count() const;
  const LossWeights& weights() const;
  const LossOptions& options() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// Object- and part-level 3D and 2D Chamfer terms; frames or parts without
/// observations contribute 0.
LossBreakdown loss_fit(const TrajectoryParams& params, const ObservationBundle& observations,
                       const std::vector<ObjectModel>& objects, const LossOptions& options = {});
/// Contact continuity plus contact dynamics over every constraint.
LossBreakdown loss_contact(const TrajectoryParams& params, const pag::ConstraintSet& constraints,
                           const std::vector<HumanMotionSequence>& humans, const std::vector<ObjectModel>& objects,
                           const LossOptions& options = {});
/// Frame-averaged sum of max(0, -sdf) over human vertices for every object with an SDF.
double loss_penetration(const TrajectoryParams& params, const std::vector<ObjectModel>& objects,
                        const std::vector<HumanMotionSequence>& humans);
/// Rotation and translation smoothness under each object's motion flags
/// (objects without a record are treated as stationary).
LossBreakdown loss_smooth(const TrajectoryParams& params, const std::vector<pag::MotionState>& motion);
LossBreakdown total_loss(const TrajectoryParams& params, const Scene& scene, const LossWeights& weights,
                         const LossOptions& options = {});

}  // namespace affordfit::hoiopt
