#pragma once
// Shared state of LossEvaluator and the per-term kernels.

#include "affordfit/geom/kdtree.hpp"
#include "affordfit/hoiopt/loss.hpp"

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affordfit::hoiopt {

struct PoseGrad {
  Mat3 rotation = Mat3::Zero();
  Vec3 translation = Vec3::Zero();

  PoseGrad& operator+=(const PoseGrad& o) {
    rotation += o.rotation;
    translation += o.translation;
    return *this;
  }
};

// FNV-1a over the discrete decisions taken during one evaluation.
struct Hasher {
  std::uint64_t state = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state ^= (v >> (8 * i)) & 0xffu;
      state *= 1099511628211ull;
    }
  }
  void add(std::int64_t v) { add(static_cast<std::uint64_t>(v)); }
  void add(int v) { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
};

// Runs body(i) for i in [0, n), under OpenMP when requested. Exceptions are
// captured per index and the lowest-index one is rethrown afterwards.
template <typename Body>
void for_each_index(int n, kernels::Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const bool parallel = exec == kernels::Exec::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Cloud3 {
  std::vector<Vec3> points;
  KdTree3 tree;
};

struct Pixels {
  std::vector<Vec2> points;
  KdTree2 tree;
};

struct ModelPart {
  std::vector<int> indices;  // into ObjectData::points
  std::vector<Vec3> points;
  KdTree3 tree;
};

struct FrameTargets {
  std::optional<Cloud3> cloud;
  std::vector<std::pair<int, Cloud3>> part_clouds;  // (part index, target)
  std::optional<Pixels> mask;
  std::vector<std::pair<int, Pixels>> part_masks;
};

struct ObjectData {
  std::string id;
  std::vector<Vec3> points;  // canonical model points used by the fit terms
  KdTree3 tree;
  std::vector<ModelPart> parts;  // indexed like ObjectModel::parts
  std::vector<Vec3> all_points;  // full canonical cloud (contact terms)
  std::vector<int> all_labels;
  const SdfGrid* sdf = nullptr;
  bool rotates = false;
  bool translates = false;
  std::vector<FrameTargets> frames;  // empty when the object has no observations
};

struct EdgeData {
  int first_object = -1;
  std::vector<Vec3> first_points;  // canonical points of the object part
  int second_object = -1;          // -1 when the second node is a human part
  std::vector<Vec3> second_points;  // canonical points when second_object >= 0
  int human = -1;
  std::string human_label;
  bool continuous = false;
  bool static_contact = false;
};

struct HumanData {
  std::string id;
  // frames[t] -> part label -> points; vertices per frame.
  std::vector<std::map<std::string, std::vector<Vec3>>> parts;
  std::vector<std::vector<Vec3>> vertices;
};

struct LossEvaluator::Impl {
  int frame_count = 0;
  LossWeights weights;
  LossOptions options;
  std::vector<std::string> ids;
  std::vector<ObjectData> objects;
  std::vector<EdgeData> edges;
  std::vector<HumanData> humans;
  CameraIntrinsics intrinsics;
  double pixel_scale = 1.0;
  bool has_observations = false;
  bool has_motion = false;
};

// Posed state for one evaluation.
struct PoseTable {
  int frames = 0;
  std::vector<RigidPose> poses;  // [object * frames + t]
  const RigidPose& at(int object, int t) const { return poses[static_cast<std::size_t>(object) * frames + t]; }
};

struct TermResult {
  double value = 0.0;
  double second = 0.0;  // used by terms with two parts (contact: dynamics, smooth: translation)
};

// Each kernel adds `scale * dTerm/dPose` into `grads` when it is non-null and
// folds its discrete choices into `hash` when non-null.
void fit_terms(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale, std::vector<PoseGrad>* grads,
               Hasher* hash, LossBreakdown& out);
TermResult contact_terms(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale,
                         std::vector<PoseGrad>* grads, Hasher* hash);
double penetration_term(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale,
                        std::vector<PoseGrad>* grads, Hasher* hash);
// Smoothness differentiates directly with respect to the flat parameters.
TermResult smooth_terms(const LossEvaluator::Impl& impl, const TrajectoryParams& params, double scale,
                        std::vector<double>* gradient, Hasher* hash);

}  // namespace affordfit::hoiopt
