#include "affordfit/hoiopt/align.hpp"

#include "affordfit/error.hpp"
#include "affordfit/geom/kdtree.hpp"
#include "affordfit/geom/rotation.hpp"

#include <ceres/jet.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>

namespace affordfit::hoiopt {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

template <typename P>
std::vector<P> cap_points(const std::vector<P>& points, int cap, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (cap <= 0 || n <= static_cast<std::size_t>(cap)) return points;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cap); ++i) {
    state = splitmix(state);
    std::swap(idx[i], idx[i + state % (n - i)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<P> out;
  for (std::size_t i : idx) out.push_back(points[i]);
  return out;
}

double rms_radius(const std::vector<Vec3>& pts, const Vec3& c) {
  double s = 0.0;
  for (const auto& p : pts) s += (p - c).squaredNorm();
  return std::sqrt(s / static_cast<double>(pts.size()));
}

struct FrameProblem {
  std::vector<Vec3> source;  // point-map human points
  KdTree3 source_tree;
  std::vector<Vec3> target;  // body vertices
  KdTree3 target_tree;
  std::vector<Vec2> pixels;
  KdTree2 pixel_tree;
  Vec3 anchor = Vec3::Zero();  // source centroid; rotation and scale act about it
  const CameraIntrinsics* k = nullptr;
  double pixel_scale = 1.0;

  // params: log scale, 6D rotation, image of the anchor. Turning about the
  // anchor keeps rotation and translation from trading off through the lever
  // arm to the camera origin.
  double evaluate(const double* x, double* grad) const {
    using Jet6 = ceres::Jet<double, 6>;
    Jet6 a[6];
    for (int i = 0; i < 6; ++i) a[i] = Jet6(x[1 + i], i);
    const Eigen::Matrix<Jet6, 3, 3> rj = decode_rotation_6d<Jet6>(a);
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = rj(i, j).a;
    const double s = std::exp(x[0]);
    const Vec3 t(x[7], x[8], x[9]);
    const std::size_t n = source.size();
    std::vector<Vec3> rp(n);
    std::vector<Vec3> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      rp[i] = r * (source[i] - anchor);
      y[i] = s * rp[i] + t;
    }
    std::vector<Vec3> dy(n, Vec3::Zero());

    // 3D Chamfer against the body vertices.
    const double wa = 0.5 / static_cast<double>(n);
    const double wb = 0.5 / static_cast<double>(target.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto hit = target_tree.nearest(y[i]);
      const Vec3 diff = y[i] - target[hit.index];
      const double d = diff.norm();
      loss += wa * d;
      if (d > 0.0) dy[i] += (wa / d) * diff;
    }
    const Mat3 rt = r.transpose();
    for (const Vec3& v : target) {
      const auto hit = source_tree.nearest(rt * (v - t) / s + anchor);
      const Vec3 diff = y[hit.index] - v;
      const double d = diff.norm();
      loss += wb * d;
      if (d > 0.0) dy[hit.index] += (wb / d) * diff;
    }

    // 2D Chamfer against the human mask pixels.
    if (!pixels.empty()) {
      std::vector<Vec2> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i].z() > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "aligned point behind the camera");
        p[i] = Vec2(k->fx * y[i].x() / y[i].z() + k->cx, k->fy * y[i].y() / y[i].z() + k->cy);
      }
      const KdTree2 projected(p);
      std::vector<Vec2> dp(n, Vec2::Zero());
      const double wp = 0.5 / static_cast<double>(pixels.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto hit = pixel_tree.nearest(p[i]);
        const Vec2 diff = p[i] - pixels[hit.index];
        const double d = diff.norm();
        loss += pixel_scale * wa * d;
        if (d > 0.0) dp[i] += (pixel_scale * wa / d) * diff;
      }
      for (const Vec2& m : pixels) {
        const auto hit = projected.nearest(m);
        const Vec2 diff = p[hit.index] - m;
        const double d = diff.norm();
        loss += pixel_scale * wp * d;
        if (d > 0.0) dp[hit.index] += (pixel_scale * wp / d) * diff;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double iz = 1.0 / y[i].z();
        const double du = dp[i].x();
        const double dv = dp[i].y();
        dy[i] += Vec3(k->fx * iz * du, k->fy * iz * dv, -(k->fx * y[i].x() * du + k->fy * y[i].y() * dv) * iz * iz);
      }
    }

    if (grad) {
      Mat3 dr = Mat3::Zero();
      double ds = 0.0;
      Vec3 dt = Vec3::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        dr.noalias() += s * dy[i] * (source[i] - anchor).transpose();
        ds += dy[i].dot(rp[i]);
        dt += dy[i];
      }
      grad[0] = ds * s;
      for (int k6 = 0; k6 < 6; ++k6) {
        double g = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) g += dr(i, j) * rj(i, j).v[k6];
        grad[1 + k6] = g;
      }
      for (int i = 0; i < 3; ++i) grad[7 + i] = dt[i];
    }
    return loss;
  }
};

}  // namespace

Similarity interpolate(const Similarity& a, const Similarity& b, double alpha) {
  Similarity out;
  out.scale = std::exp((1.0 - alpha) * std::log(a.scale) + alpha * std::log(b.scale));
  out.translation = (1.0 - alpha) * a.translation + alpha * b.translation;
  const Eigen::Quaterniond qa(a.rotation);
  const Eigen::Quaterniond qb(b.rotation);
  out.rotation = qa.slerp(alpha, qb).toRotationMatrix();
  return out;
}

AlignResult align_point_maps(const std::vector<PointCloud>& human_points,
                             const std::vector<std::vector<Vec2>>& human_pixels, const HumanMotionSequence& motion,
                             const CameraIntrinsics& intrinsics, const AlignOptions& options) {
  const int T = static_cast<int>(human_points.size());
  if (motion.frame_count() != T) {
    throw Error(ErrorCode::FrameCountMismatch, "point maps and human motion have different frame counts");
  }
  if (!human_pixels.empty() && static_cast<int>(human_pixels.size()) != T) {
    throw Error(ErrorCode::FrameCountMismatch, "human pixel sets do not cover every frame");
  }
  if (options.steps < 1) throw Error(ErrorCode::ValidationError, "alignment needs at least one step");
  intrinsics.validate();
  const double pixel_scale = options.pixel_scale > 0.0 ? options.pixel_scale : 1.0 / intrinsics.fx;

  AlignResult result;
  result.transforms.assign(T, Similarity{});
  result.interpolated.assign(T, true);
  result.final_loss.assign(T, 0.0);
  std::vector<int> valid;
  for (int t = 0; t < T; ++t) {
    if (!human_points[t].empty()) valid.push_back(t);
  }
  if (valid.empty()) throw Error(ErrorCode::EmptyHumanObservation, "no frame has human points");

  std::vector<std::exception_ptr> errors(valid.size());
  const bool parallel = options.exec == kernels::Exec::parallel;
  const int nvalid = static_cast<int>(valid.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int vi = 0; vi < nvalid; ++vi) {
    try {
      const int t = valid[vi];
      if (motion.frames[t].vertices.empty()) {
        throw Error(ErrorCode::EmptyHumanObservation, "human motion frame " + std::to_string(t) + " has no vertices");
      }
      FrameProblem problem;
      problem.k = &intrinsics;
      problem.pixel_scale = pixel_scale;
      const std::uint64_t base = splitmix(options.seed ^ static_cast<std::uint64_t>(t));
      problem.source = cap_points(human_points[t].points, options.max_points, base ^ 1u);
      problem.target = cap_points(motion.frames[t].vertices, options.max_points, base ^ 2u);
      if (!human_pixels.empty()) problem.pixels = cap_points(human_pixels[t], options.max_points, base ^ 3u);
      problem.source_tree = KdTree3(problem.source);
      problem.target_tree = KdTree3(problem.target);
      problem.pixel_tree = KdTree2(problem.pixels);

      const Vec3 cs = centroid(problem.source);
      const Vec3 ct = centroid(problem.target);
      const double rs = rms_radius(problem.source, cs);
      const double s0 = rs > 0.0 ? rms_radius(problem.target, ct) / rs : 1.0;
      problem.anchor = cs;
      std::vector<double> x = {std::log(s0), 1, 0, 0, 0, 1, 0, ct.x(), ct.y(), ct.z()};
      std::vector<double> m(10, 0.0), v(10, 0.0), g(10, 0.0);
      for (int step = 0; step < options.steps; ++step) {
        const double lr =
            options.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * step / static_cast<double>(options.steps)));
        problem.evaluate(x.data(), g.data());
        const double c1 = 1.0 - std::pow(0.9, step + 1);
        const double c2 = 1.0 - std::pow(0.999, step + 1);
        for (int i = 0; i < 10; ++i) {
          m[i] = 0.9 * m[i] + 0.1 * g[i];
          v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
          x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
        }
      }
      result.final_loss[t] = problem.evaluate(x.data(), nullptr);
      if (!std::isfinite(result.final_loss[t])) throw Error(ErrorCode::NonFiniteLoss, "alignment diverged");
      Similarity& sim = result.transforms[t];
      sim.scale = std::exp(x[0]);
      sim.rotation = decode_rotation_6d<double>(x.data() + 1);
      sim.translation = Vec3(x[7], x[8], x[9]) - sim.scale * (sim.rotation * cs);
      result.interpolated[t] = false;
    } catch (...) {
      errors[vi] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int t = 0; t < T; ++t) {
    if (!result.interpolated[t]) continue;
    const auto next = std::lower_bound(valid.begin(), valid.end(), t);
    if (next == valid.begin()) {
      result.transforms[t] = result.transforms[*next];
    } else if (next == valid.end()) {
      result.transforms[t] = result.transforms[valid.back()];
    } else {
      const int a = *(next - 1);
      const int b = *next;
      result.transforms[t] =
          interpolate(result.transforms[a], result.transforms[b], static_cast<double>(t - a) / (b - a));
    }
  }
  return result;
}

}  // namespace affordfit::hoiopt
