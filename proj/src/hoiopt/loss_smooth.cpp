#include "affordfit/error.hpp"
#include "loss_internal.hpp"

#include <ceres/jet.h>

#include <cmath>

namespace affordfit::hoiopt {

namespace {

using Jet = ceres::Jet<double, 18>;
using JMat = Eigen::Matrix<Jet, 3, 3>;
using JQuat = Eigen::Matrix<Jet, 4, 1>;  // (w, x, y, z)

// Geodesic angle via atan2 of the skew and trace parts, which stays
// differentiable near pi and avoids the acos singularity at 0.
Jet geodesic(const JMat& r1, const JMat& r2) {
  const JMat m = r1.transpose() * r2;
  const Jet sx = 0.5 * (m(2, 1) - m(1, 2));
  const Jet sy = 0.5 * (m(0, 2) - m(2, 0));
  const Jet sz = 0.5 * (m(1, 0) - m(0, 1));
  const Jet s2 = sx * sx + sy * sy + sz * sz;
  const Jet c = 0.5 * (m(0, 0) + m(1, 1) + m(2, 2) - 1.0);
  if (s2.a < 1e-24) {
    // Identical rotations: the angle is not differentiable here.
    if (c.a > 0.0) return Jet(0.0);
    return Jet(M_PI);
  }
  return atan2(sqrt(s2), c);
}

JQuat to_quaternion(const JMat& m) {
  JQuat q;
  const Jet tr = m(0, 0) + m(1, 1) + m(2, 2);
  if (tr.a > 0.0) {
    const Jet s = 2.0 * sqrt(tr + 1.0);
    q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0).a > m(1, 1).a && m(0, 0).a > m(2, 2).a) {
    const Jet s = 2.0 * sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1).a > m(2, 2).a) {
    const Jet s = 2.0 * sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s;
  } else {
    const Jet s = 2.0 * sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s;
  }
  return q;
}

JMat from_quaternion(const JQuat& q) {
  const Jet w = q[0], x = q[1], y = q[2], z = q[3];
  JMat r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

JMat decode(const double* block, int slot) {
  Jet a[6];
  for (int k = 0; k < 6; ++k) a[k] = Jet(block[k], 6 * slot + k);
  return decode_rotation_6d<Jet>(a);
}

void scatter(const Jet& value, double scale, const TrajectoryParams& params, int object, const int (&frames)[3],
             std::vector<double>& gradient) {
  for (int slot = 0; slot < 3; ++slot) {
    if (frames[slot] < 0) continue;
    double* g = gradient.data() + params.offset(object, frames[slot]);
    for (int k = 0; k < 6; ++k) g[k] += scale * value.v[6 * slot + k];
  }
}

Vec3 translation(const TrajectoryParams& params, int object, int t) {
  const double* b = params.block(object, t);
  return {b[6], b[7], b[8]};
}

void add_translation_grad(const TrajectoryParams& params, int object, int t, const Vec3& g,
                          std::vector<double>& gradient) {
  double* b = gradient.data() + params.offset(object, t);
  for (int k = 0; k < 3; ++k) b[6 + k] += g[k];
}

}  // namespace

TermResult smooth_terms(const LossEvaluator::Impl& impl, const TrajectoryParams& params, double scale,
                        std::vector<double>* gradient, Hasher* hash) {
  const int T = impl.frame_count;
  TermResult result;
  for (int o = 0; o < static_cast<int>(impl.objects.size()); ++o) {
    const ObjectData& obj = impl.objects[o];
    if (T < ((obj.rotates || obj.translates) ? 3 : 2)) {
      throw Error(ErrorCode::TooFewFrames, "smoothness of '" + obj.id + "' needs more frames");
    }

    // Rotation.
    if (obj.rotates) {
      for (int t = 1; t + 1 < T; ++t) {
        const JMat prev = decode(params.block(o, t - 1), 0);
        const JMat cur = decode(params.block(o, t), 1);
        const JMat next = decode(params.block(o, t + 1), 2);
        const JQuat q1 = to_quaternion(prev);
        JQuat q2 = to_quaternion(next);
        const Jet dot = q1.dot(q2);
        Jet angle;
        if (std::abs(dot.a) < 1e-12) {
          // Antipodal neighbours have no unique midpoint.
          angle = geodesic(cur, next);
          if (hash) hash->add(t);
        } else {
          if (dot.a < 0.0) q2 = -q2;
          JQuat mid = q1 + q2;
          mid /= sqrt(mid.squaredNorm());
          angle = geodesic(cur, from_quaternion(mid));
        }
        result.value += angle.a;
        if (gradient) scatter(angle, scale, params, o, {t - 1, t, t + 1}, *gradient);
      }
    } else {
      for (int t = 0; t + 1 < T; ++t) {
        const JMat cur = decode(params.block(o, t), 1);
        const JMat next = decode(params.block(o, t + 1), 2);
        const Jet angle = geodesic(cur, next);
        result.value += angle.a;
        if (gradient) scatter(angle, scale, params, o, {-1, t, t + 1}, *gradient);
      }
    }

    // Translation.
    auto term = [&](const Vec3& r, int t_self, int t_a, int t_b) {
      const double len = r.norm();
      result.second += len;
      if (len == 0.0) {
        if (hash) hash->add(T + t_self);
        return;
      }
      if (!gradient) return;
      const Vec3 u = (scale / len) * r;
      add_translation_grad(params, o, t_self, u, *gradient);
      if (t_b < 0) {
        add_translation_grad(params, o, t_a, -u, *gradient);
      } else {
        add_translation_grad(params, o, t_a, -0.5 * u, *gradient);
        add_translation_grad(params, o, t_b, -0.5 * u, *gradient);
      }
    };
    if (obj.translates) {
      for (int t = 1; t + 1 < T; ++t) {
        term(translation(params, o, t) - 0.5 * (translation(params, o, t - 1) + translation(params, o, t + 1)), t,
             t - 1, t + 1);
      }
    } else {
      for (int t = 0; t + 1 < T; ++t) term(translation(params, o, t) - translation(params, o, t + 1), t, t + 1, -1);
    }
  }
  return result;
}

}  // namespace affordfit::hoiopt
