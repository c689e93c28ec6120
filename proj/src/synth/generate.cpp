#include "affordfit/error.hpp"
#include "affordfit/hoiopt/optimize.hpp"
#include "affordfit/synth/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>

namespace affordfit::synth {
namespace {

struct BodyPart {
  const char* label;
  Vec3 center;
  Vec3 radii;
};

// Standing figure, hips at the origin, up = -y, facing +z.
const std::array<BodyPart, 12> kBody = {{
    {"head", {0.0, -0.65, 0.0}, {0.09, 0.11, 0.10}},
    {"torso", {0.0, -0.33, 0.02}, {0.16, 0.20, 0.09}},
    {"back", {0.0, -0.33, -0.09}, {0.14, 0.18, 0.02}},
    {"hips", {0.0, 0.0, 0.0}, {0.16, 0.10, 0.10}},
    {"left_upper_arm", {0.22, -0.38, 0.0}, {0.045, 0.14, 0.045}},
    {"right_upper_arm", {-0.22, -0.38, 0.0}, {0.045, 0.14, 0.045}},
    {"left_hand", {0.28, 0.02, 0.0}, {0.045, 0.06, 0.03}},
    {"right_hand", {-0.28, 0.02, 0.0}, {0.045, 0.06, 0.03}},
    {"left_leg", {0.09, 0.45, 0.0}, {0.07, 0.35, 0.07}},
    {"right_leg", {-0.09, 0.45, 0.0}, {0.07, 0.35, 0.07}},
    {"left_foot", {0.09, 0.86, 0.05}, {0.05, 0.03, 0.10}},
    {"right_foot", {-0.09, 0.86, 0.05}, {0.05, 0.03, 0.10}},
}};

constexpr double kHandClearance = 0.01;
constexpr double kPatchRadius = 0.03;
constexpr double kVertexLift = 0.002;
constexpr double kConstancyTolerance = 1e-9;

[[noreturn]] void infeasible(const std::string& msg) { throw Error(ErrorCode::InfeasibleSpec, msg); }

Mat3 yaw_rotation(double degrees) { return axis_angle(hoiopt::kUpAxis, degrees * std::numbers::pi / 180.0); }

double phase(int t, int frames) { return frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.0; }

const BodyPart& body_part(const std::string& label) {
  for (const auto& p : kBody)
    if (label == p.label) return p;
  throw Error(ErrorCode::SchemaError, "unknown body part '" + label + "'");
}

std::vector<Vec3> ellipsoid_points(const BodyPart& part, int n) {
  std::vector<Vec3> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double a = golden * i;
    out.push_back(part.center + part.radii.cwiseProduct(Vec3(r * std::cos(a), y, r * std::sin(a))));
  }
  return out;
}

PoseTrajectory human_roots(const HumanSpec& h, int frames) {
  PoseTrajectory roots(frames);
  for (int t = 0; t < frames; ++t) {
    const double s = phase(t, frames);
    roots[t].rotation = yaw_rotation(h.yaw + s * (h.yaw_end - h.yaw));
    roots[t].translation = h.start + s * (h.end - h.start);
  }
  return roots;
}

Vec3 outward_normal(const ObjectSpec& spec, const Vec3& x) {
  constexpr double h = 1e-5;
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = h;
    g[k] = primitive_sdf(spec, x + e) - primitive_sdf(spec, x - e);
  }
  const double n = g.norm();
  return n > 0.0 ? Vec3(g / n) : Vec3(hoiopt::kUpAxis);
}

// Indices of a part's samples, ordered along x then z.
std::vector<int> part_indices(const hoiopt::ObjectModel& model, int label) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < model.cloud.size(); ++i)
    if (model.cloud.labels[i] == label) idx.push_back(static_cast<int>(i));
  return idx;
}

// The sample nearest the centre of the part's top (min y, up side) or bottom face.
int face_anchor(const hoiopt::ObjectModel& model, const std::vector<int>& idx, bool top) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int i : idx) {
    lo = lo.cwiseMin(model.cloud.points[i]);
    hi = hi.cwiseMax(model.cloud.points[i]);
  }
  Vec3 target = 0.5 * (lo + hi);
  target.y() = top ? lo.y() : hi.y();
  int best = idx.front();
  for (int i : idx)
    if ((model.cloud.points[i] - target).squaredNorm() < (model.cloud.points[best] - target).squaredNorm()) best = i;
  return best;
}

// Samples on the part's top face, sorted along x then z: the sliding path.
std::vector<int> top_path(const hoiopt::ObjectModel& model, const std::vector<int>& idx) {
  double top = std::numeric_limits<double>::infinity();
  for (int i : idx) top = std::min(top, model.cloud.points[i].y());
  std::vector<int> path;
  for (int i : idx)
    if (model.cloud.points[i].y() <= top + 1e-9) path.push_back(i);
  std::sort(path.begin(), path.end(), [&](int a, int b) {
    const Vec3& p = model.cloud.points[a];
    const Vec3& q = model.cloud.points[b];
    return p.x() != q.x() ? p.x() < q.x() : p.z() < q.z();
  });
  return path;
}

int path_index(const std::vector<int>& path, bool sliding, int t, int frames, int fixed) {
  if (!sliding) return fixed;
  const auto n = static_cast<int>(path.size());
  return path[std::min(n - 1, static_cast<int>(std::floor(phase(t, frames) * (n - 1) + 0.5)))];
}

bool varies(const PoseTrajectory& traj, bool rotation) {
  for (const auto& p : traj) {
    const double d = rotation ? (p.rotation - traj.front().rotation).cwiseAbs().maxCoeff()
                              : (p.translation - traj.front().translation).norm();
    if (d > kConstancyTolerance) return true;
  }
  return false;
}

struct Contact {
  int object = -1;             // spec object index
  std::vector<int> samples;    // per-frame model sample index, or the fixed patch
  bool patch = false;          // hand-follow palm patch (all samples every frame)
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<Vec2> dilate(const std::vector<Vec2>& pixels, int radius, const CameraIntrinsics& k) {
  std::set<std::pair<int, int>> on;
  for (const auto& px : pixels) {
    const int u0 = static_cast<int>(std::floor(px.x()));
    const int v0 = static_cast<int>(std::floor(px.y()));
    for (int dv = -radius; dv <= radius; ++dv)
      for (int du = -radius; du <= radius; ++du) {
        const int u = u0 + du, v = v0 + dv;
        if (u >= 0 && v >= 0 && u < k.width && v < k.height) on.emplace(v, u);
      }
  }
  std::vector<Vec2> out;
  out.reserve(on.size());
  for (const auto& [v, u] : on) out.emplace_back(u + 0.5, v + 0.5);
  return out;
}

}  // namespace

GeneratedScene generate_scene(const ScenarioSpec& spec) {
  const int T = spec.frame_count;
  if (T < 1) throw Error(ErrorCode::SchemaError, "scenario: frame_count must be positive");
  if (!(spec.noise.sigma >= 0.0) || spec.noise.mask_dilation < 0 || !(spec.noise.dropout >= 0.0) ||
      spec.noise.dropout > 1.0 || !(spec.noise.offset >= 0.0))
    throw Error(ErrorCode::SchemaError, "scenario: invalid noise model");
  if (spec.sdf_resolution < 2) throw Error(ErrorCode::SchemaError, "scenario: sdf_resolution must be >= 2");
  spec.intrinsics.validate();

  pag::PartAffordanceGraph graph = spec.pag;
  if (graph.frame_count == 0) graph.frame_count = T;
  if (graph.frame_count != T)
    throw Error(ErrorCode::FrameCountMismatch, "scenario: graph frame_count differs from the scenario's");
  if (const auto report = pag::validate_pag(graph); !report.empty())
    throw Error(ErrorCode::ValidationError, "scenario graph: " + report.front().message);

  const auto n_obj = spec.objects.size();
  std::map<std::string, int> object_of, human_of;
  for (std::size_t i = 0; i < n_obj; ++i) {
    if (!object_of.emplace(spec.objects[i].id, static_cast<int>(i)).second)
      throw Error(ErrorCode::SchemaError, "scenario: duplicate object '" + spec.objects[i].id + "'");
  }
  for (std::size_t i = 0; i < spec.humans.size(); ++i) {
    if (!human_of.emplace(spec.humans[i].id, static_cast<int>(i)).second || object_of.count(spec.humans[i].id))
      throw Error(ErrorCode::SchemaError, "scenario: duplicate entity '" + spec.humans[i].id + "'");
    if (spec.humans[i].points_per_part < 4)
      throw Error(ErrorCode::SchemaError, "scenario: points_per_part must be >= 4");
  }
  for (const auto& v : graph.virtual_nodes) {
    const bool known = v.kind == pag::EntityKind::object ? object_of.count(v.id) : human_of.count(v.id);
    if (!known) infeasible("graph node '" + v.id + "' has no geometry in the scenario");
  }

  GeneratedScene out;
  std::vector<hoiopt::ObjectModel> models;
  for (const auto& o : spec.objects) models.push_back(build_object(o));
  for (const auto& p : graph.part_nodes) {
    if (p.kind != pag::PartKind::object_part) continue;
    const auto it = object_of.find(p.owner);
    if (it == object_of.end() || models[it->second].part_index(p.label) < 0)
      infeasible("object part '" + p.id + "' (" + p.label + ") is not covered by any primitive");
  }

  std::vector<PoseTrajectory> roots;
  for (const auto& h : spec.humans) roots.push_back(human_roots(h, T));

  // Edge lookup: the edge joining some part of `object` to part node `other`.
  auto edge_between = [&](int object, const std::string& other) -> const pag::ContactEdge* {
    for (const auto& e : graph.edges) {
      const pag::PartNode* a = graph.find_part(e.first);
      if (a->owner == spec.objects[object].id && e.second == other) return &e;
      const pag::PartNode* b = graph.find_part(e.second);
      if (b->owner == spec.objects[object].id && e.first == other) return &e;
    }
    return nullptr;
  };
  auto own_part = [&](int object, const pag::ContactEdge& e) {
    const pag::PartNode* a = graph.find_part(e.first);
    return a->owner == spec.objects[object].id ? a : graph.find_part(e.second);
  };

  // Resolve object trajectories; attached objects wait for their parent.
  std::vector<std::optional<PoseTrajectory>> traj(n_obj);
  std::map<std::string, std::vector<Contact>> human_contacts;  // human part node id -> contacts
  std::vector<const pag::ContactEdge*> realized;
  for (std::size_t pass = 0; pass <= n_obj; ++pass) {
    bool progress = false;
    for (std::size_t i = 0; i < n_obj; ++i) {
      if (traj[i]) continue;
      const auto& o = spec.objects[i];
      const auto& s = o.trajectory;
      PoseTrajectory poses(T);
      switch (s.family) {
        case Family::stationary:
          for (auto& p : poses) p = {yaw_rotation(s.yaw), s.start};
          break;
        case Family::linear:
          for (int t = 0; t < T; ++t) {
            const double a = phase(t, T);
            poses[t] = {yaw_rotation(s.yaw + a * (s.yaw_end - s.yaw)), s.start + a * (s.end - s.start)};
          }
          break;
        case Family::circular_arc:
          if (!(s.radius > 0.0)) throw Error(ErrorCode::SchemaError, "object '" + o.id + "': arc radius must be positive");
          for (int t = 0; t < T; ++t) {
            const double deg = s.angle_start + phase(t, T) * (s.angle_end - s.angle_start);
            poses[t] = {yaw_rotation(deg + s.yaw), s.center + yaw_rotation(deg) * Vec3(s.radius, 0.0, 0.0)};
          }
          break;
        case Family::hand_follow: {
          const pag::PartNode* hand = graph.find_part(s.follow);
          if (!hand || hand->kind != pag::PartKind::human_part)
            infeasible("object '" + o.id + "': hand_follow needs a human part node to follow, got '" + s.follow + "'");
          const pag::ContactEdge* e = edge_between(static_cast<int>(i), s.follow);
          if (!e) infeasible("object '" + o.id + "': no contact edge to '" + s.follow + "' to follow");
          const auto& model = models[i];
          const auto idx = part_indices(model, model.part_index(own_part(static_cast<int>(i), *e)->label));
          const int anchor = face_anchor(model, idx, true);
          const Vec3& a = model.cloud.points[anchor];
          const BodyPart& bp = body_part(hand->label);
          const Vec3 palm = bp.center + Vec3(0.0, bp.radii.y() + kHandClearance, 0.0);
          RigidPose offset;
          offset.rotation = yaw_rotation(s.yaw);
          offset.translation = palm - offset.rotation * a;
          const auto& root = roots[human_of.at(hand->owner)];
          for (int t = 0; t < T; ++t) poses[t] = root[t] * offset;
          Contact c{static_cast<int>(i), {}, true};
          for (int k : idx)
            if (model.cloud.points[k].y() <= a.y() + 1e-9 && (model.cloud.points[k] - a).norm() <= kPatchRadius)
              c.samples.push_back(k);
          human_contacts[s.follow].push_back(std::move(c));
          realized.push_back(e);
          break;
        }
        case Family::attached: {
          const pag::PartNode* base = graph.find_part(s.follow);
          if (!base || base->kind != pag::PartKind::object_part || base->owner == o.id)
            infeasible("object '" + o.id + "': attached needs another object's part node, got '" + s.follow + "'");
          const int parent = object_of.at(base->owner);
          if (!traj[parent]) continue;
          const pag::ContactEdge* e = edge_between(static_cast<int>(i), s.follow);
          if (!e) infeasible("object '" + o.id + "': no contact edge to '" + s.follow + "'");
          const auto& pm = models[parent];
          const auto pidx = part_indices(pm, pm.part_index(base->label));
          const auto path = top_path(pm, pidx);
          const int fixed = face_anchor(pm, pidx, true);
          const auto& model = models[i];
          const auto idx = part_indices(model, model.part_index(own_part(static_cast<int>(i), *e)->label));
          const Vec3& b = model.cloud.points[face_anchor(model, idx, false)];
          const Mat3 r = yaw_rotation(s.yaw);
          for (int t = 0; t < T; ++t) {
            const Vec3& a = pm.cloud.points[path_index(path, !e->static_contact, t, T, fixed)];
            poses[t] = (*traj[parent])[t] * RigidPose{r, a - r * b};
          }
          realized.push_back(e);
          break;
        }
      }
      traj[i] = std::move(poses);
      progress = true;
    }
    if (!progress) break;
  }
  for (std::size_t i = 0; i < n_obj; ++i)
    if (!traj[i]) infeasible("object '" + spec.objects[i].id + "': attachment chain has a cycle");

  // Every edge must be realized by construction.
  for (const auto& e : graph.edges) {
    if (std::find(realized.begin(), realized.end(), &e) != realized.end()) continue;
    const pag::PartNode* a = graph.find_part(e.first);
    const pag::PartNode* b = graph.find_part(e.second);
    const std::string name = "edge " + e.first + " - " + e.second;
    if (b->kind != pag::PartKind::human_part)
      infeasible(name + ": object-object contact requires one object attached to the other through it");
    const int oi = object_of.at(a->owner);
    const int hi = human_of.at(b->owner);
    if (e.static_contact && (varies(*traj[oi], true) || varies(*traj[oi], false) || varies(roots[hi], true) ||
                             varies(roots[hi], false)))
      infeasible(name + ": static contact demands the object move with the human; use hand_follow");
    const auto& model = models[oi];
    const auto idx = part_indices(model, model.part_index(a->label));
    const auto path = top_path(model, idx);
    const int fixed = face_anchor(model, idx, true);
    Contact c{oi, {}, false};
    for (int t = 0; t < T; ++t) c.samples.push_back(path_index(path, !e.static_contact, t, T, fixed));
    human_contacts[e.second].push_back(std::move(c));
  }

  for (std::size_t i = 0; i < n_obj; ++i) {
    const pag::VirtualNode* v = graph.find_virtual(spec.objects[i].id);
    if (!v) continue;
    if (!v->rotates && varies(*traj[i], true))
      infeasible("object '" + v->id + "' rotates but its graph node says it does not");
    if (!v->translates && varies(*traj[i], false))
      infeasible("object '" + v->id + "' translates but its graph node says it does not");
  }

  // Humans: rigid template following the root, plus contact samples.
  for (std::size_t h = 0; h < spec.humans.size(); ++h) {
    const auto& hs = spec.humans[h];
    hoiopt::HumanMotionSequence seq;
    seq.id = hs.id;
    seq.frames.resize(T);
    std::vector<std::vector<Vec3>> local;
    for (const auto& bp : kBody) local.push_back(ellipsoid_points(bp, hs.points_per_part));
    for (int t = 0; t < T; ++t) {
      auto& f = seq.frames[t];
      const RigidPose& root = roots[h][t];
      for (std::size_t k = 0; k < kBody.size(); ++k) {
        f.joints.push_back(root * kBody[k].center);
        auto& pts = f.parts[kBody[k].label];
        for (const Vec3& p : local[k]) pts.push_back(root * p);
        f.vertices.insert(f.vertices.end(), pts.begin(), pts.end());
      }
    }
    for (const auto& pn : graph.part_nodes) {
      if (pn.owner != hs.id) continue;
      const auto it = human_contacts.find(pn.id);
      if (it == human_contacts.end()) continue;
      for (const Contact& c : it->second) {
        const auto& model = models[c.object];
        const auto& o = spec.objects[c.object];
        for (int t = 0; t < T; ++t) {
          const RigidPose& pose = (*traj[c.object])[t];
          auto& f = seq.frames[t];
          auto emit = [&](int k) {
            const Vec3& x = model.cloud.points[k];
            f.parts[pn.label].push_back(pose * x);
            f.vertices.push_back(pose * (x + kVertexLift * outward_normal(o, x)));
          };
          if (c.patch) {
            for (int k : c.samples) emit(k);
          } else {
            emit(c.samples[t]);
          }
        }
      }
    }
    out.scene.humans.push_back(std::move(seq));
  }

  // Observations, parallel across frames with per-(object, frame) streams.
  auto& clean = out.clean_observations;
  auto& noisy = out.scene.observations;
  clean.intrinsics = noisy.intrinsics = spec.intrinsics;
  clean.frame_count = noisy.frame_count = T;
  for (std::size_t i = 0; i < n_obj; ++i) {
    const auto& model = models[i];
    auto& cf = clean.objects[model.id];
    auto& nf = noisy.objects[model.id];
    cf.resize(T);
    nf.resize(T);
    std::vector<int> bad(T, 0);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < T; ++t) {
      const RigidPose& pose = (*traj[i])[t];
      std::mt19937_64 rng(splitmix(spec.seed ^ splitmix(i * 0x100000001b3ull + static_cast<std::uint64_t>(t))));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const bool dropped = spec.noise.dropout > 0.0 && unit(rng) < spec.noise.dropout;
      Vec3 shift = Vec3::Zero();
      if (spec.noise.offset > 0.0)
        for (int d = 0; d < 3; ++d) shift[d] = spec.noise.offset * gauss(rng);
      hoiopt::FrameObservation c, n;
      for (std::size_t k = 0; k < model.cloud.size(); ++k) {
        const Vec3 p = pose * model.cloud.points[k];
        if (!(p.z() > kMinDepth)) {
          bad[t] = 1;
          break;
        }
        Vec3 q = p + shift;
        if (spec.noise.sigma > 0.0)
          for (int d = 0; d < 3; ++d) q[d] += spec.noise.sigma * gauss(rng);
        const std::string& label = model.parts[model.cloud.labels[k]];
        c.cloud.push_back(p);
        c.part_clouds[label].push_back(p);
        n.cloud.push_back(q);
        n.part_clouds[label].push_back(q);
        const Vec2 px = project_point(p, spec.intrinsics);
        if (spec.intrinsics.contains(px)) {
          c.mask.push_back(px);
          c.part_masks[label].push_back(px);
        }
      }
      if (spec.noise.mask_dilation > 0) {
        n.mask = dilate(c.mask, spec.noise.mask_dilation, spec.intrinsics);
        for (const auto& [label, px] : c.part_masks)
          n.part_masks[label] = dilate(px, spec.noise.mask_dilation, spec.intrinsics);
      } else {
        n.mask = c.mask;
        n.part_masks = c.part_masks;
      }
      cf[t] = std::move(c);
      nf[t] = dropped ? hoiopt::FrameObservation{} : std::move(n);
    }
    for (int t = 0; t < T; ++t)
      if (bad[t]) infeasible("object '" + model.id + "' is behind the camera at frame " + std::to_string(t));
  }

  for (std::size_t i = 0; i < n_obj; ++i) {
    auto& model = models[i];
    Vec3 lo = model.cloud.points.front(), hi = lo;
    for (const auto& p : model.cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const auto& o = spec.objects[i];
    model.sdf = sample_sdf_function([&o](const Vec3& p) { return primitive_sdf(o, p); }, lo, hi, spec.sdf_resolution);
    out.ground_truth.push_back(*traj[i]);
  }
  out.scene.pag = std::move(graph);
  out.scene.objects = std::move(models);
  out.scene.validate();
  return out;
}

}  // namespace affordfit::synth
