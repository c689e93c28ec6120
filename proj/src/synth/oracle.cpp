#include "affordfit/synth/oracle.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace affordfit::synth {
namespace {

template <typename V>
double nearest(const V& p, const std::vector<V>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) best = std::min(best, (p - q).norm());
  return best;
}

template <typename V>
double chamfer(const std::vector<V>& a, const std::vector<V>& b) {
  double sa = 0.0, sb = 0.0;
  for (const auto& p : a) sa += nearest(p, b);
  for (const auto& q : b) sb += nearest(q, a);
  return 0.5 * sa / a.size() + 0.5 * sb / b.size();
}

std::vector<Vec3> posed(const RigidPose& pose, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  for (const auto& p : pts) out.push_back(pose.rotation * p + pose.translation);
  return out;
}

std::vector<Vec2> project(const std::vector<Vec3>& pts, const CameraIntrinsics& k) {
  std::vector<Vec2> out;
  for (const auto& p : pts) out.emplace_back(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
  return out;
}

std::vector<Vec3> labeled(const hoiopt::ObjectModel& m, const std::string& label) {
  std::vector<Vec3> out;
  const auto it = std::find(m.parts.begin(), m.parts.end(), label);
  if (it == m.parts.end()) return out;
  const int id = static_cast<int>(it - m.parts.begin());
  for (std::size_t i = 0; i < m.cloud.size(); ++i)
    if (m.cloud.labels[i] == id) out.push_back(m.cloud.points[i]);
  return out;
}

double min_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a) best = std::min(best, nearest(p, b));
  return best;
}

double angle_between(const Mat3& a, const Mat3& b) {
  return Eigen::AngleAxisd(Eigen::Quaterniond(a.transpose() * b).normalized()).angle();
}

int index_of(const hoiopt::Scene& scene, const std::string& id) {
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (scene.objects[i].id == id) return static_cast<int>(i);
  return -1;
}

}  // namespace

double oracle_sdf(const SdfGrid& grid, const Vec3& p) {
  const Vec3 hi = grid.origin + grid.cell_size * Vec3(grid.dims[0] - 1, grid.dims[1] - 1, grid.dims[2] - 1);
  Vec3 q;
  for (int a = 0; a < 3; ++a) q[a] = std::min(std::max(p[a], grid.origin[a]), hi[a]);
  double value = 0.0;
  int cell[3];
  double f[3];
  for (int a = 0; a < 3; ++a) {
    const double g = (q[a] - grid.origin[a]) / grid.cell_size;
    cell[a] = std::min(std::max(static_cast<int>(std::floor(g)), 0), grid.dims[a] - 2);
    f[a] = std::min(std::max(g - cell[a], 0.0), 1.0);
  }
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    int idx[3];
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = cell[a] + bit;
      w *= bit ? f[a] : 1.0 - f[a];
    }
    const std::size_t flat = idx[0] + static_cast<std::size_t>(grid.dims[0]) * (idx[1] + grid.dims[1] * idx[2]);
    value += w * grid.values[flat];
  }
  return value + (p - q).norm();
}

hoiopt::LossBreakdown oracle_losses(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories,
                                    const hoiopt::LossWeights& weights, double pixel_scale) {
  const pag::ConstraintSet constraints = scene.validate();
  const int T = scene.frame_count();
  const auto& obs = scene.observations;
  const double px = pixel_scale > 0.0 ? pixel_scale : 1.0 / obs.intrinsics.fx;
  hoiopt::LossBreakdown out;

  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    const auto& model = scene.objects[o];
    const auto it = obs.objects.find(model.id);
    if (it == obs.objects.end()) continue;
    for (int t = 0; t < T; ++t) {
      const auto& f = it->second[t];
      const RigidPose& pose = trajectories[o][t];
      const auto all = posed(pose, model.cloud.points);
      if (!f.cloud.empty()) out.fit_3d_object += chamfer(all, f.cloud);
      if (!f.mask.empty()) out.fit_2d_object += px * chamfer(project(all, obs.intrinsics), f.mask);
      for (const auto& [label, pts] : f.part_clouds) {
        const auto part = posed(pose, labeled(model, label));
        if (!pts.empty() && !part.empty()) out.fit_3d_part += chamfer(part, pts);
      }
      for (const auto& [label, pix] : f.part_masks) {
        const auto part = posed(pose, labeled(model, label));
        if (!pix.empty() && !part.empty()) out.fit_2d_part += px * chamfer(project(part, obs.intrinsics), pix);
      }
    }
  }

  for (const auto& c : constraints.contacts) {
    const int a = index_of(scene, c.first.owner);
    const auto a_local = labeled(scene.objects[a], c.first.label);
    std::vector<std::vector<Vec3>> b(T);
    int b_obj = -1;
    if (c.second.entity == pag::EntityKind::object) {
      b_obj = index_of(scene, c.second.owner);
      const auto b_local = labeled(scene.objects[b_obj], c.second.label);
      for (int t = 0; t < T; ++t) b[t] = posed(trajectories[b_obj][t], b_local);
    } else {
      const auto* human = scene.find_human(c.second.owner);
      for (int t = 0; t < T; ++t) b[t] = human->frames[t].parts.at(c.second.label);
    }
    std::vector<double> md(T);
    for (int t = 0; t < T; ++t) md[t] = min_distance(posed(trajectories[a][t], a_local), b[t]);
    if (c.continuous) {
      for (double v : md) out.contact_continuity += v / T;
    } else {
      out.contact_continuity += *std::min_element(md.begin(), md.end());
    }
    // Second node expressed in the first node's canonical frame.
    std::vector<std::vector<Vec3>> q(T);
    for (int t = 0; t < T; ++t) q[t] = posed(trajectories[a][t].inverse(), b[t]);
    const double n = static_cast<double>(b.front().size());
    for (std::size_t i = 0; i < b.front().size(); ++i) {
      if (c.static_contact) {
        for (int t = 0; t + 1 < T; ++t) out.contact_dynamics += (q[t][i] - q[t + 1][i]).norm() / n;
      } else {
        for (int t = 1; t + 1 < T; ++t)
          out.contact_dynamics += (q[t][i] - 0.5 * (q[t - 1][i] + q[t + 1][i])).norm() / n;
      }
    }
  }

  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    if (!scene.objects[o].sdf) continue;
    for (const auto& h : scene.humans) {
      for (int t = 0; t < T; ++t) {
        const RigidPose inv = trajectories[o][t].inverse();
        for (const auto& v : h.frames[t].vertices)
          out.penetration += std::max(0.0, -oracle_sdf(*scene.objects[o].sdf, inv * v)) / T;
      }
    }
  }

  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    const pag::MotionState* m = constraints.motion_of(scene.objects[o].id);
    const bool rotates = m && m->rotates;
    const bool translates = m && m->translates;
    const auto& tr = trajectories[o];
    if (rotates) {
      for (int t = 1; t + 1 < T; ++t) {
        const Eigen::Quaterniond q1(tr[t - 1].rotation), q2(tr[t + 1].rotation);
        if (std::abs(q1.dot(q2)) < 1e-12) {
          out.smooth_rotation += angle_between(tr[t].rotation, tr[t + 1].rotation);
        } else {
          out.smooth_rotation += angle_between(tr[t].rotation, q1.slerp(0.5, q2).toRotationMatrix());
        }
      }
    } else {
      for (int t = 0; t + 1 < T; ++t) out.smooth_rotation += angle_between(tr[t].rotation, tr[t + 1].rotation);
    }
    if (translates) {
      for (int t = 1; t + 1 < T; ++t)
        out.smooth_translation += (tr[t].translation - 0.5 * (tr[t - 1].translation + tr[t + 1].translation)).norm();
    } else {
      for (int t = 0; t + 1 < T; ++t) out.smooth_translation += (tr[t].translation - tr[t + 1].translation).norm();
    }
  }

  out.total = out.weighted(weights);
  return out;
}

eval::Score oracle_temporal_smoothness(const eval::InteractionSample& sample) {
  const int T = sample.frame_count();
  eval::Score s;
  double sum = 0.0;
  long count = 0;
  for (const auto& h : sample.humans)
    for (std::size_t j = 0; j < h.frames.front().joints.size(); ++j)
      for (int t = 1; t + 1 < T; ++t, ++count) {
        const auto& f = h.frames;
        sum += (f[t].joints[j] - 0.5 * (f[t - 1].joints[j] + f[t + 1].joints[j])).norm();
      }
  s.human = count ? sum / count : 0.0;
  sum = 0.0;
  count = 0;
  for (const auto& o : sample.objects)
    for (const auto& c : o.corners)
      for (int t = 1; t + 1 < T; ++t, ++count) {
        const auto& p = o.trajectory;
        sum += (p[t] * c - 0.5 * (p[t - 1] * c + p[t + 1] * c)).norm();
      }
  s.object = count ? sum / count : 0.0;
  return s;
}

eval::Score oracle_motion_diversity(const std::vector<eval::InteractionSample>& samples) {
  const int T = samples.front().frame_count();
  double human = 0.0, object = 0.0;
  long pairs = 0;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b, ++pairs) {
      double sum = 0.0;
      long n = 0;
      for (std::size_t h = 0; h < samples[a].humans.size(); ++h)
        for (std::size_t j = 0; j < samples[a].humans[h].frames.front().joints.size(); ++j)
          for (int t = 0; t < T; ++t, ++n)
            sum += (samples[a].humans[h].frames[t].joints[j] - samples[b].humans[h].frames[t].joints[j]).norm();
      human += n ? sum / n : 0.0;
      sum = 0.0;
      n = 0;
      for (std::size_t o = 0; o < samples[a].objects.size(); ++o)
        for (int c = 0; c < 8; ++c)
          for (int t = 0; t < T; ++t, ++n) {
            const auto& oa = samples[a].objects[o];
            const auto& ob = samples[b].objects[o];
            sum += (oa.trajectory[t] * oa.corners[c] - ob.trajectory[t] * ob.corners[c]).norm();
          }
      object += n ? sum / n : 0.0;
    }
  }
  return {human / pairs, object / pairs};
}

eval::Plausibility oracle_physical_plausibility(const eval::InteractionSample& sample, double tolerance) {
  const int T = sample.frame_count();
  eval::Plausibility p;
  if (T == 0) return p;
  double ratio_sum = 0.0;
  int touching = 0;
  for (int t = 0; t < T; ++t) {
    int total = 0, hit = 0;
    for (const auto& h : sample.humans) {
      for (const auto& v : h.frames[t].vertices) {
        ++total;
        bool collides = false;
        for (const auto& o : sample.objects)
          if (o.sdf && oracle_sdf(*o.sdf, o.trajectory[t].inverse() * v) < tolerance) collides = true;
        hit += collides;
      }
    }
    ratio_sum += total ? 1.0 - static_cast<double>(hit) / total : 1.0;
    touching += hit > 0;
  }
  p.non_collision = ratio_sum / T;
  p.contact = static_cast<double>(touching) / T;
  return p;
}

}  // namespace affordfit::synth
