#include "fixtures.hpp"

#include "affordfit/geom/camera.hpp"
#include "affordfit/hoiopt/params.hpp"
#include "affordfit/synth/oracle.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unistd.h>

namespace affordfit::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("affordfit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

synth::Primitive box(const std::string& part, const Vec3& center, const Vec3& size, double spacing = 0.0) {
  synth::Primitive p;
  p.part = part;
  p.center = center;
  p.size = size;
  p.spacing = spacing;
  return p;
}

}  // namespace

synth::ScenarioSpec random_scenario(std::uint64_t seed, int max_frames) {
  std::mt19937_64 rng(seed * 7919 + 17);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  synth::ScenarioSpec s;
  s.seed = seed;
  s.frame_count = 3 + pick(std::max(1, max_frames - 2));
  s.pag.frame_count = s.frame_count;
  s.sdf_resolution = 24 + pick(24);
  s.noise.sigma = pick(3) == 0 ? 0.0 : uni(0.0, 0.01);
  s.noise.mask_dilation = pick(2);
  s.noise.dropout = pick(3) == 0 ? 0.2 : 0.0;

  synth::ObjectSpec a;
  a.id = "a";
  a.spacing = 0.06;
  const Vec3 body(uni(0.15, 0.35), uni(0.12, 0.3), uni(0.1, 0.3));
  a.primitives.push_back(box("body", Vec3::Zero(), body));
  a.primitives.push_back(box("handle", Vec3(uni(-0.03, 0.03), -0.5 * body.y() - 0.04, uni(-0.03, 0.03)),
                             Vec3(uni(0.08, 0.14), 0.025, 0.025), 0.03));
  if (pick(2)) {
    synth::Primitive knob;
    knob.part = "knob";
    knob.shape = pick(2) ? synth::Shape::sphere : synth::Shape::cylinder;
    knob.radius = 0.04;
    knob.height = 0.05;
    knob.spacing = 0.03;
    knob.center = Vec3(0.5 * body.x() + 0.04, 0.0, 0.0);
    a.primitives.push_back(knob);
  }

  const int family = pick(4);
  bool rotates = false, translates = false;
  const Vec3 base(uni(-0.2, 0.2), uni(-0.1, 0.2), uni(2.3, 2.8));
  auto& tr = a.trajectory;
  tr.yaw = uni(0.0, 360.0);
  if (family == 0) {
    tr.family = synth::Family::stationary;
    tr.start = base;
  } else if (family == 1) {
    tr.family = synth::Family::linear;
    tr.start = base;
    tr.end = base + Vec3(uni(-0.3, 0.3), uni(-0.1, 0.1), uni(-0.2, 0.2));
    tr.yaw_end = tr.yaw + uni(-60.0, 60.0);
    rotates = translates = true;
  } else if (family == 2) {
    tr.family = synth::Family::circular_arc;
    tr.center = base;
    tr.radius = uni(0.1, 0.4);
    tr.angle_start = uni(0.0, 360.0);
    tr.angle_end = tr.angle_start + uni(-90.0, 90.0);
    rotates = translates = true;
  } else {
    tr.family = synth::Family::hand_follow;
    tr.follow = "h_right_hand";
  }

  const bool human = family == 3 || pick(2);
  if (human) {
    synth::HumanSpec h;
    h.id = "h";
    h.points_per_part = 8 + pick(16);
    h.start = base + Vec3(uni(-0.3, 0.3), -0.1, 0.4);
    h.end = family == 3 ? h.start + Vec3(uni(-0.4, 0.4), 0.0, uni(-0.2, 0.2)) : h.start;
    h.yaw = uni(0.0, 360.0);
    h.yaw_end = family == 3 && pick(2) ? h.yaw + uni(-30.0, 30.0) : h.yaw;
    if (family == 3) {
      translates = true;
      rotates = h.yaw_end != h.yaw;
    }
    s.humans.push_back(h);
  }

  // Flags may be looser than the motion but never tighter.
  s.pag.virtual_nodes.push_back({"a", pag::EntityKind::object, rotates || pick(4) == 0, translates || pick(4) == 0});
  for (const auto& p : a.primitives)
    if (!s.pag.find_part("a_" + p.part)) s.pag.part_nodes.push_back({"a_" + p.part, pag::PartKind::object_part, "a", p.part});

  if (human) {
    s.pag.virtual_nodes.push_back({"h", pag::EntityKind::human, false, false});
    if (family == 3) {
      s.pag.part_nodes.push_back({"h_right_hand", pag::PartKind::human_part, "h", "right_hand"});
      s.pag.edges.push_back({"a_handle", "h_right_hand", true, true});
    }
    // A sliding witness contact, continuous or not.
    s.pag.part_nodes.push_back({"h_left_hand", pag::PartKind::human_part, "h", "left_hand"});
    s.pag.edges.push_back({"a_body", "h_left_hand", pick(2) == 1, false});
  }

  s.objects.push_back(a);
  if (pick(3) == 0) {
    synth::ObjectSpec b;
    b.id = "b";
    b.spacing = 0.04;
    b.primitives.push_back(box("base", Vec3::Zero(), Vec3(uni(0.06, 0.12), 0.04, uni(0.06, 0.12))));
    b.primitives.push_back(box("top", Vec3(0.0, -0.04, 0.0), Vec3(0.04, 0.04, 0.04), 0.02));
    b.trajectory.family = synth::Family::attached;
    b.trajectory.follow = "a_body";
    b.trajectory.yaw = uni(0.0, 360.0);
    s.pag.virtual_nodes.push_back({"b", pag::EntityKind::object, true, true});
    s.pag.part_nodes.push_back({"b_base", pag::PartKind::object_part, "b", "base"});
    s.pag.part_nodes.push_back({"b_top", pag::PartKind::object_part, "b", "top"});
    s.pag.edges.push_back({"b_base", "a_body", true, pick(2) == 1});
    s.objects.push_back(b);
  }
  return s;
}

std::vector<PoseTrajectory> perturb(const std::vector<PoseTrajectory>& poses, double max_angle, double max_shift,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto out = poses;
  for (auto& traj : out) {
    for (auto& p : traj) {
      Vec3 axis(u(rng), u(rng), u(rng));
      if (axis.norm() < 1e-3) axis = Vec3::UnitX();
      p.rotation = axis_angle(axis.normalized(), max_angle * u(rng)) * p.rotation;
      p.translation += max_shift * Vec3(u(rng), u(rng), u(rng));
    }
  }
  return out;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::vector<std::string> object_ids(const hoiopt::Scene& scene) {
  std::vector<std::string> ids;
  for (const auto& o : scene.objects) ids.push_back(o.id);
  return ids;
}

double bbox_diagonal(const std::vector<Vec3>& points) {
  Vec3 lo = points.front(), hi = lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OracleComparison compare_with_oracle(const hoiopt::Scene& scene, const std::vector<PoseTrajectory>& trajectories,
                                     const hoiopt::LossWeights& weights) {
  const auto constraints = scene.validate();
  hoiopt::LossOptions options;
  options.max_points = 0;
  const hoiopt::LossEvaluator evaluator(scene, constraints, weights, options);
  const auto params = hoiopt::TrajectoryParams::from_trajectories(object_ids(scene), trajectories);
  const auto got = evaluator.evaluate(params);
  const auto want = synth::oracle_losses(scene, params.decode(), weights);
  const std::pair<const char*, double hoiopt::LossBreakdown::*> terms[] = {
      {"fit_3d_object", &hoiopt::LossBreakdown::fit_3d_object},
      {"fit_3d_part", &hoiopt::LossBreakdown::fit_3d_part},
      {"fit_2d_object", &hoiopt::LossBreakdown::fit_2d_object},
      {"fit_2d_part", &hoiopt::LossBreakdown::fit_2d_part},
      {"contact_continuity", &hoiopt::LossBreakdown::contact_continuity},
      {"contact_dynamics", &hoiopt::LossBreakdown::contact_dynamics},
      {"penetration", &hoiopt::LossBreakdown::penetration},
      {"smooth_rotation", &hoiopt::LossBreakdown::smooth_rotation},
      {"smooth_translation", &hoiopt::LossBreakdown::smooth_translation},
      {"total", &hoiopt::LossBreakdown::total},
  };
  OracleComparison out;
  for (const auto& [name, member] : terms) {
    const double err = relative_error(got.*member, want.*member);
    if (err > out.worst || out.worst_term.empty()) {
      out.worst = err;
      out.worst_term = name;
    }
  }
  return out;
}

GradientCheck check_gradient(const hoiopt::LossEvaluator& evaluator, const hoiopt::TrajectoryParams& params,
                             double h, double floor, double exclusion) {
  std::vector<double> grad;
  std::uint64_t base = 0;
  evaluator.evaluate(params, &grad, &base);
  GradientCheck out;
  auto probe = params;
  auto crosses = [&](std::size_t i, double step) {
    std::uint64_t sp = 0, sm = 0;
    probe.values[i] = params.values[i] + step;
    evaluator.evaluate(probe, nullptr, &sp);
    probe.values[i] = params.values[i] - step;
    evaluator.evaluate(probe, nullptr, &sm);
    probe.values[i] = params.values[i];
    return sp != base || sm != base;
  };
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    if (exclusion > h && crosses(i, exclusion)) {
      ++out.skipped;
      continue;
    }
    std::uint64_t sp = 0, sm = 0;
    probe.values[i] = params.values[i] + h;
    const double fp = evaluator.evaluate(probe, nullptr, &sp).total;
    probe.values[i] = params.values[i] - h;
    const double fm = evaluator.evaluate(probe, nullptr, &sm).total;
    probe.values[i] = params.values[i];
    if (sp != base || sm != base) {
      ++out.skipped;
      continue;
    }
    ++out.checked;
    const double err = relative_error((fp - fm) / (2.0 * h), grad[i], floor);
    if (err > out.worst) {
      out.worst = err;
      out.worst_index = i;
    }
  }
  return out;
}

AlignFixture align_fixture(const hoiopt::HumanMotionSequence& motion, const CameraIntrinsics& intrinsics,
                           const std::vector<hoiopt::Similarity>& truth) {
  AlignFixture f;
  for (int t = 0; t < motion.frame_count(); ++t) {
    const auto& s = truth[t];
    PointCloud map;
    for (const Vec3& v : motion.frames[t].vertices) map.points.push_back(s.rotation.transpose() * (v - s.translation) / s.scale);
    f.point_maps.push_back(std::move(map));
    f.pixels.push_back(project_points(motion.frames[t].vertices, intrinsics));
  }
  return f;
}

hoiopt::Similarity random_similarity(std::mt19937_64& rng, double max_angle, double max_shift) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  hoiopt::Similarity s;
  s.scale = std::exp2(u(rng));
  Vec3 axis(u(rng), u(rng), u(rng));
  if (axis.norm() < 1e-3) axis = Vec3::UnitY();
  s.rotation = axis_angle(axis.normalized(), max_angle * u(rng));
  Vec3 shift(u(rng), u(rng), u(rng));
  if (shift.norm() > 1.0) shift.normalize();
  s.translation = max_shift * shift;
  return s;
}

}  // namespace affordfit::testing
