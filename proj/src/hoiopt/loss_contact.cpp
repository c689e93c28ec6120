#include "loss_internal.hpp"

#include <cmath>
#include <limits>

namespace affordfit::hoiopt {

namespace {

struct FrameMd {
  double value = 0.0;
  std::vector<Vec3> da;  // dMD/da_i
  std::vector<Vec3> db;  // dMD/db_j
  Hasher hash;
};

void exact_md(const std::vector<Vec3>& a, const std::vector<Vec3>& b, bool want_grad, FrameMd& out) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0;
  std::size_t bj = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d2 = (a[i] - b[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        bi = i;
        bj = j;
      }
    }
  }
  out.value = std::sqrt(best);
  out.hash.add(static_cast<std::int64_t>(bi));
  out.hash.add(static_cast<std::int64_t>(bj));
  if (want_grad && out.value > 0.0) {
    const Vec3 u = (a[bi] - b[bj]) / out.value;
    out.da[bi] += u;
    out.db[bj] -= u;
  }
}

// Boltzmann-weighted mean of all pair distances: sum w d / sum w with
// w = exp(-(d - dmin) / tau). Smooth, non-negative, and tends to the exact
// minimum as tau -> 0.
void soft_md(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tau, bool want_grad, FrameMd& out) {
  const std::size_t nb = b.size();
  std::vector<double> d(a.size() * nb);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double v = (a[i] - b[j]).norm();
      d[i * nb + j] = v;
      dmin = std::min(dmin, v);
    }
  }
  double wsum = 0.0;
  double wd = 0.0;
  for (double v : d) {
    const double w = std::exp(-(v - dmin) / tau);
    wsum += w;
    wd += w * v;
  }
  const double s = wd / wsum;
  out.value = s;
  if (!want_grad) return;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double v = d[i * nb + j];
      if (v == 0.0) {
        out.hash.add(static_cast<std::int64_t>(i * nb + j));
        continue;
      }
      const double c = std::exp(-(v - dmin) / tau) / wsum * (1.0 - (v - s) / tau);
      const Vec3 u = (c / v) * (a[i] - b[j]);
      out.da[i] += u;
      out.db[j] -= u;
    }
  }
}

void add_object_grad(PoseGrad& g, const std::vector<Vec3>& x, const std::vector<Vec3>& dy, double coef) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.rotation.noalias() += coef * dy[i] * x[i].transpose();
    g.translation += coef * dy[i];
  }
}

}  // namespace

TermResult contact_terms(const LossEvaluator::Impl& impl, const PoseTable& poses, double scale,
                         std::vector<PoseGrad>* grads, Hasher* hash) {
  TermResult result;
  const int T = impl.frame_count;
  const bool want_grad = grads != nullptr;
  auto slot = [&](int object, int t) -> PoseGrad& { return (*grads)[static_cast<std::size_t>(object) * T + t]; };

  for (const EdgeData& e : impl.edges) {
    // Posed geometry of both nodes at every frame.
    std::vector<std::vector<Vec3>> a(T);
    std::vector<std::vector<Vec3>> b(T);
    for (int t = 0; t < T; ++t) {
      const RigidPose& p1 = poses.at(e.first_object, t);
      a[t].reserve(e.first_points.size());
      for (const auto& x : e.first_points) a[t].push_back(p1 * x);
      if (e.second_object >= 0) {
        const RigidPose& p2 = poses.at(e.second_object, t);
        for (const auto& x : e.second_points) b[t].push_back(p2 * x);
      } else {
        b[t] = impl.humans[e.human].parts[t].at(e.human_label);
      }
    }

    // Continuity.
    std::vector<FrameMd> md(T);
    for_each_index(T, impl.options.exec, [&](int t) {
      FrameMd& m = md[t];
      if (want_grad) {
        m.da.assign(a[t].size(), Vec3::Zero());
        m.db.assign(b[t].size(), Vec3::Zero());
      }
      if (impl.options.soft_contact) soft_md(a[t], b[t], impl.options.softmin_temperature, want_grad, m);
      else exact_md(a[t], b[t], want_grad, m);
    });
    std::vector<double> frame_weight(T, 0.0);
    if (e.continuous) {
      for (int t = 0; t < T; ++t) {
        result.value += md[t].value / T;
        frame_weight[t] = 1.0 / T;
      }
    } else {
      int best = 0;
      for (int t = 1; t < T; ++t)
        if (md[t].value < md[best].value) best = t;
      result.value += md[best].value;
      frame_weight[best] = 1.0;
      if (hash) hash->add(best);
    }
    if (hash)
      for (const auto& m : md) hash->add(m.hash.state);
    if (want_grad) {
      for (int t = 0; t < T; ++t) {
        if (frame_weight[t] == 0.0) continue;
        add_object_grad(slot(e.first_object, t), e.first_points, md[t].da, scale * frame_weight[t]);
        if (e.second_object >= 0) {
          add_object_grad(slot(e.second_object, t), e.second_points, md[t].db, scale * frame_weight[t]);
        }
      }
    }

    // Dynamics: the second node's points in the first node's canonical frame.
    const std::size_t n = b.front().size();
    if (n == 0) continue;
    std::vector<std::vector<Vec3>> q(T, std::vector<Vec3>(n));
    for (int t = 0; t < T; ++t) {
      const RigidPose& p1 = poses.at(e.first_object, t);
      const Mat3 rt = p1.rotation.transpose();
      for (std::size_t i = 0; i < n; ++i) q[t][i] = rt * (b[t][i] - p1.translation);
    }
    std::vector<std::vector<Vec3>> dq(want_grad ? T : 0, std::vector<Vec3>(n, Vec3::Zero()));
    const double inv_n = 1.0 / static_cast<double>(n);
    auto residual = [&](const Vec3& r, int t_self, int t_other_a, int t_other_b, std::size_t i) {
      const double len = r.norm();
      result.second += inv_n * len;
      if (len == 0.0) {
        if (hash) hash->add(static_cast<std::int64_t>(t_self * n + i));
        return;
      }
      if (!want_grad) return;
      const Vec3 u = (scale * inv_n / len) * r;
      dq[t_self][i] += u;
      if (t_other_b < 0) {
        dq[t_other_a][i] -= u;
      } else {
        dq[t_other_a][i] -= 0.5 * u;
        dq[t_other_b][i] -= 0.5 * u;
      }
    };
    if (e.static_contact) {
      for (int t = 0; t + 1 < T; ++t)
        for (std::size_t i = 0; i < n; ++i) residual(q[t][i] - q[t + 1][i], t, t + 1, -1, i);
    } else {
      for (int t = 1; t + 1 < T; ++t)
        for (std::size_t i = 0; i < n; ++i)
          residual(q[t][i] - 0.5 * (q[t - 1][i] + q[t + 1][i]), t, t - 1, t + 1, i);
    }
    if (want_grad) {
      for (int t = 0; t < T; ++t) {
        const RigidPose& p1 = poses.at(e.first_object, t);
        PoseGrad& g1 = slot(e.first_object, t);
        std::vector<Vec3> db(e.second_object >= 0 ? n : 0);
        for (std::size_t i = 0; i < n; ++i) {
          const Vec3& d = dq[t][i];
          g1.rotation.noalias() += (b[t][i] - p1.translation) * d.transpose();
          g1.translation -= p1.rotation * d;
          if (e.second_object >= 0) db[i] = p1.rotation * d;
        }
        if (e.second_object >= 0) add_object_grad(slot(e.second_object, t), e.second_points, db, 1.0);
      }
    }
  }
  return result;
}

}  // namespace affordfit::hoiopt
