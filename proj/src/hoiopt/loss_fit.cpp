#include "affordfit/error.hpp"
#include "loss_internal.hpp"

#include <cmath>

namespace affordfit::hoiopt {

namespace {

void accumulate(PoseGrad& g, const std::vector<Vec3>& x, const std::vector<Vec3>& dy) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.rotation.noalias() += dy[i] * x[i].transpose();
    g.translation += dy[i];
  }
}

// Chamfer between posed model points y = R x + t and a target cloud. The
// target-to-model direction searches the canonical tree with R^T (b - t).
double chamfer_3d(const std::vector<Vec3>& x, const KdTree3& model_tree, const RigidPose& pose, const Cloud3& target,
                  double scale, PoseGrad* g, Hasher* h) {
  const std::size_t na = x.size();
  const std::size_t nb = target.points.size();
  std::vector<Vec3> y(na);
  for (std::size_t i = 0; i < na; ++i) y[i] = pose * x[i];
  std::vector<Vec3> dy(g ? na : 0, Vec3::Zero());
  const double wa = 0.5 / static_cast<double>(na);
  const double wb = 0.5 / static_cast<double>(nb);

  double sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const auto hit = target.tree.nearest(y[i]);
    const Vec3 diff = y[i] - target.points[hit.index];
    const double d = diff.norm();
    sum_a += d;
    if (g && d > 0.0) dy[i] += (scale * wa / d) * diff;
    if (h) h->add(hit.index);
  }
  const Mat3 rt = pose.rotation.transpose();
  double sum_b = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    const Vec3& b = target.points[j];
    const auto hit = model_tree.nearest(rt * (b - pose.translation));
    const Vec3 diff = y[hit.index] - b;
    const double d = diff.norm();
    sum_b += d;
    if (g && d > 0.0) dy[hit.index] += (scale * wb / d) * diff;
    if (h) h->add(hit.index);
  }
  if (g) accumulate(*g, x, dy);
  return wa * sum_a + wb * sum_b;
}

double chamfer_2d(const std::vector<Vec3>& x, const RigidPose& pose, const Pixels& target, const CameraIntrinsics& k,
                  double pixel_scale, double scale, PoseGrad* g, Hasher* h) {
  const std::size_t na = x.size();
  const std::size_t nb = target.points.size();
  std::vector<Vec3> y(na);
  std::vector<Vec2> p(na);
  for (std::size_t i = 0; i < na; ++i) {
    y[i] = pose * x[i];
    if (!(y[i].z() > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "posed object point behind the camera");
    p[i] = Vec2(k.fx * y[i].x() / y[i].z() + k.cx, k.fy * y[i].y() / y[i].z() + k.cy);
  }
  const KdTree2 projected(p);
  std::vector<Vec2> dp(g ? na : 0, Vec2::Zero());
  const double wa = 0.5 / static_cast<double>(na);
  const double wb = 0.5 / static_cast<double>(nb);
  const double gs = scale * pixel_scale;

  double sum_a = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const auto hit = target.tree.nearest(p[i]);
    const Vec2 diff = p[i] - target.points[hit.index];
    const double d = diff.norm();
    sum_a += d;
    if (g && d > 0.0) dp[i] += (gs * wa / d) * diff;
    if (h) h->add(hit.index);
  }
  double sum_b = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    const auto hit = projected.nearest(target.points[j]);
    const Vec2 diff = p[hit.index] - target.points[j];
    const double d = diff.norm();
    sum_b += d;
    if (g && d > 0.0) dp[hit.index] += (gs * wb / d) * diff;
    if (h) h->add(hit.index);
  }
  if (g) {
    std::vector<Vec3> dy(na);
    for (std::size_t i = 0; i < na; ++i) {
      const double iz = 1.0 / y[i].z();
      const double du = dp[i].x();
      const double dv = dp[i].y();
      dy[i] = Vec3(k.fx * iz * du, k.fy * iz * dv, -(k.fx * y[i].x() * du + k.fy * y[i].y() * dv) * iz * iz);
    }
    accumulate(*g, x, dy);
  }
  return pixel_scale * (wa * sum_a + wb * sum_b);
}

struct Slot {
  double object_3d = 0.0;
  double part_3d = 0.0;
  double object_2d = 0.0;
  double part_2d = 0.0;
  PoseGrad grad;
  Hasher hash;
};

}  // namespace

void fit_terms(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale, std::vector<PoseGrad>* grads,
               Hasher* hash, LossBreakdown& out) {
  if (!impl.has_observations) return;
  const int T = impl.frame_count;
  std::vector<std::pair<int, int>> work;
  for (int o = 0; o < static_cast<int>(impl.objects.size()); ++o)
    if (!impl.objects[o].frames.empty())
      for (int t = 0; t < T; ++t) work.emplace_back(o, t);

  std::vector<Slot> slots(work.size());
  for_each_index(static_cast<int>(work.size()), impl.options.exec, [&](int w) {
    const auto [o, t] = work[w];
    const ObjectData& obj = impl.objects[o];
    const FrameTargets& target = obj.frames[t];
    const RigidPose& pose = poses.at(o, t);
    Slot& s = slots[w];
    PoseGrad* g = grads ? &s.grad : nullptr;
    Hasher* h = hash ? &s.hash : nullptr;
    if (target.cloud) s.object_3d = chamfer_3d(obj.points, obj.tree, pose, *target.cloud, scale, g, h);
    for (const auto& [p, cloud] : target.part_clouds) {
      const ModelPart& part = obj.parts[p];
      s.part_3d += chamfer_3d(part.points, part.tree, pose, cloud, scale, g, h);
    }
    if (target.mask) {
      s.object_2d = chamfer_2d(obj.points, pose, *target.mask, impl.intrinsics, impl.pixel_scale, scale, g, h);
    }
    for (const auto& [p, mask] : target.part_masks) {
      s.part_2d += chamfer_2d(obj.parts[p].points, pose, mask, impl.intrinsics, impl.pixel_scale, scale, g, h);
    }
  });

  for (std::size_t w = 0; w < work.size(); ++w) {
    const Slot& s = slots[w];
    out.fit_3d_object += s.object_3d;
    out.fit_3d_part += s.part_3d;
    out.fit_2d_object += s.object_2d;
    out.fit_2d_part += s.part_2d;
    if (grads) (*grads)[static_cast<std::size_t>(work[w].first) * T + work[w].second] += s.grad;
    if (hash) hash->add(s.hash.state);
  }
}

}  // namespace affordfit::hoiopt
