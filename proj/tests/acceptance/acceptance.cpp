// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include "affordfit/eval/metrics.hpp"
#include "affordfit/geom/distance.hpp"
#include "affordfit/geom/sdf.hpp"
#include "affordfit/hoiopt/align.hpp"
#include "affordfit/hoiopt/optimize.hpp"
#include "affordfit/partseg/partseg.hpp"
#include "affordfit/synth/oracle.hpp"
#include "affordfit/synth/synth.hpp"
#include "fixtures.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

using namespace affordfit;
using affordfit::testing::bbox_diagonal;
using affordfit::testing::object_ids;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ----------------------------------------------------------------- criterion 1

Outcome loss_oracle() {
  Stopwatch clock;
  double worst = 0.0;
  std::string worst_term;
  std::uint64_t worst_seed = 0;
  int fixtures = 0;
  std::size_t max_points = 0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const auto g = synth::generate_scene(affordfit::testing::random_scenario(seed, 10));
    for (const auto& o : g.scene.objects) max_points = std::max(max_points, o.cloud.size());
    const auto traj = affordfit::testing::perturb(g.ground_truth, 0.3, 0.05, seed);
    const auto cmp = affordfit::testing::compare_with_oracle(g.scene, traj, hoiopt::LossWeights{1.0, 1.0, 10.0, 0.1});
    ++fixtures;
    if (cmp.worst > worst) {
      worst = cmp.worst;
      worst_term = cmp.worst_term;
      worst_seed = seed;
    }
  }
  const double t = clock.seconds();
  return {worst <= 1e-6 && t < 60.0 && max_points <= 500,
          format("%d fixtures, max %zu points/object, worst relative error %.3g (%s, seed %llu), %.1f s", fixtures,
                 max_points, worst, worst_term.c_str(), static_cast<unsigned long long>(worst_seed), t)};
}

// ----------------------------------------------------------------- criterion 2

Outcome gradients() {
  Stopwatch clock;
  double worst = 0.0;
  int checked = 0, skipped = 0;
  for (std::uint64_t seed = 101; seed <= 110; ++seed) {
    const auto g = synth::generate_scene(affordfit::testing::random_scenario(seed, 3));
    const auto constraints = g.scene.validate();
    hoiopt::LossOptions options;
    options.soft_contact = true;
    options.max_points = 50;
    options.seed = seed;
    const hoiopt::LossEvaluator ev(g.scene, constraints, hoiopt::LossWeights{1.0, 1.0, 10.0, 0.1}, options);
    const auto params = hoiopt::TrajectoryParams::from_trajectories(
        object_ids(g.scene), affordfit::testing::perturb(g.ground_truth, 0.2, 0.03, seed));
    const auto c = affordfit::testing::check_gradient(ev, params);
    worst = std::max(worst, c.worst);
    checked += c.checked;
    skipped += c.skipped;
  }
  const double t = clock.seconds();
  return {worst <= 1e-3 && checked > 0 && t < 120.0,
          format("10 scenes, %d parameters checked, %d excluded near switches, worst relative error %.3g, %.1f s",
                 checked, skipped, worst, t)};
}

// --------------------------------------------------------------- criteria 3, 4

struct FamilyRun {
  std::string family;
  double sigma = 0.0;
  double seconds = 0.0;
  double rotation_deg = 0.0;  // mean over frames, worst object
  double translation_frac = 0.0;
  synth::GeneratedScene generated;
  hoiopt::OptimizeResult result;
};

FamilyRun run_family(const std::string& family, double sigma) {
  FamilyRun r;
  r.family = family;
  r.sigma = sigma;
  auto spec = synth::preset(family);
  spec.noise.sigma = sigma;
  r.generated = synth::generate_scene(spec);
  Stopwatch clock;
  hoiopt::OptimizeConfig config;
  r.result = hoiopt::optimize(r.generated.scene, config, 7);
  r.seconds = clock.seconds();
  for (std::size_t o = 0; o < r.result.trajectories.size(); ++o) {
    const auto& fit = r.result.trajectories[o];
    const auto& gt = r.generated.ground_truth[o];
    const double diam = bbox_diagonal(r.generated.scene.objects[o].cloud.points);
    double rot = 0.0, tr = 0.0;
    for (std::size_t t = 0; t < fit.size(); ++t) {
      rot += geodesic_distance(fit[t].rotation, gt[t].rotation);
      tr += (fit[t].translation - gt[t].translation).norm();
    }
    r.rotation_deg = std::max(r.rotation_deg, rot / fit.size() * kDeg);
    r.translation_frac = std::max(r.translation_frac, tr / fit.size() / diam);
  }
  return r;
}

Outcome pose_recovery(const std::vector<FamilyRun>& runs) {
  bool pass = true;
  std::ostringstream detail;
  std::map<std::string, double> per_family;
  for (const auto& r : runs) {
    const bool ok = r.rotation_deg <= 5.0 && r.translation_frac <= 0.02 && r.seconds < 300.0;
    pass = pass && ok;
    per_family[r.family] += r.seconds;
    detail << format("\n    %-13s sigma=%.3f: %.4f deg, %.4f%% diameter, %.0f s%s", r.family.c_str(), r.sigma,
                     r.rotation_deg, 100.0 * r.translation_frac, r.seconds, ok ? "" : "  <-- out of bounds");
  }
  for (const auto& [family, seconds] : per_family) detail << format("\n    %s total %.0f s", family.c_str(), seconds);
  return {pass, "600 steps, 4 restarts, T=49" + detail.str()};
}

Outcome constraint_satisfaction(const std::vector<FamilyRun>& runs) {
  bool pass = true;
  std::ostringstream detail;
  for (const auto& r : runs) {
    if (r.family == "hand_follow") {
      const auto& scene = r.generated.scene;
      const auto constraints = scene.validate();
      double worst_md = 0.0;
      for (const auto& c : constraints.contacts) {
        if (!c.continuous || c.second.entity != pag::EntityKind::human) continue;
        int oi = 0;
        while (scene.objects[oi].id != c.first.owner) ++oi;
        const auto& model = scene.objects[oi];
        const auto local = model.cloud.select(model.part_index(c.first.label));
        for (int t = 0; t < scene.frame_count(); ++t) {
          PointCloud a, b;
          a.points = apply_pose(r.result.trajectories[oi][t], local);
          b.points = scene.find_human(c.second.owner)->frames[t].parts.at(c.second.label);
          worst_md = std::max(worst_md, min_pair_distance(a, b));
        }
      }
      const auto plaus = eval::physical_plausibility(eval::make_sample(scene, r.result.trajectories));
      const bool ok = worst_md <= 0.01 && plaus.contact == 1.0;
      pass = pass && ok;
      detail << format("\n    hand_follow sigma=%.3f: worst per-frame MD %.2e m, contact %.4f, non-collision %.4f",
                       r.sigma, worst_md, plaus.contact, plaus.non_collision);
    } else if (r.family == "stationary") {
      double worst_t = 0.0, worst_r = 0.0;
      for (const auto& tr : r.result.trajectories) {
        for (const auto& p : tr) {
          worst_t = std::max(worst_t, (p.translation - tr[0].translation).norm());
          worst_r = std::max(worst_r, geodesic_distance(p.rotation, tr[0].rotation) * kDeg);
        }
      }
      const bool ok = worst_t <= 1e-3 && worst_r <= 0.5;
      pass = pass && ok;
      detail << format("\n    stationary sigma=%.3f: max variation %.2e m, %.2e deg", r.sigma, worst_t, worst_r);
    }
  }
  return {pass, detail.str()};
}

// ----------------------------------------------------------------- criterion 5

Outcome segmentation() {
  bool pass = true;
  std::ostringstream detail;
  bool first = true;
  for (const std::string name : {"two_part_box", "four_part_box"}) {
    const auto model = synth::build_object(synth::preset(name).objects.at(0));
    const auto K = partseg::framing_intrinsics(256);
    std::vector<partseg::ViewObservation> views;
    for (const auto& pose : partseg::cube_corner_views(model.cloud))
      views.push_back(partseg::render_view(model.cloud, model.parts, K, pose));
    PointCloud plain;
    plain.points = model.cloud.points;
    const auto labeled = partseg::vote_labels(plain, views, model.parts);
    std::vector<bool> seen(plain.size(), false);
    for (const auto& v : views) {
      const auto vis = partseg::visibility_mask(plain, v);
      for (std::size_t i = 0; i < vis.size(); ++i) seen[i] = seen[i] || vis[i];
    }
    int total = 0, correct = 0;
    for (std::size_t i = 0; i < plain.size(); ++i) {
      if (!seen[i]) continue;
      ++total;
      correct += labeled.labels[i] == model.cloud.labels[i];
    }
    const double acc = total ? static_cast<double>(correct) / total : 0.0;
    pass = pass && acc >= 0.95;
    if (!first) detail << ", ";
    first = false;
    detail << format("%s %.2f%% of %d visible points", name.c_str(), 100.0 * acc, total);
  }
  return {pass, "8 views: " + detail.str()};
}

// ----------------------------------------------------------------- criterion 6

hoiopt::HumanMotionSequence joint_track(const std::vector<Vec3>& positions) {
  hoiopt::HumanMotionSequence h;
  h.id = "h";
  for (const auto& p : positions) {
    hoiopt::HumanFrame f;
    f.joints = {p};
    f.vertices = {p};
    h.frames.push_back(f);
  }
  return h;
}

Outcome metrics() {
  double worst = 0.0;
  int fixtures = 0;
  std::vector<eval::InteractionSample> pool;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = synth::generate_scene(affordfit::testing::random_scenario(seed, 10));
    const auto sample = eval::make_sample(g.scene, affordfit::testing::perturb(g.ground_truth, 0.2, 0.05, seed));
    const auto s = eval::temporal_smoothness(sample), so = synth::oracle_temporal_smoothness(sample);
    const auto p = eval::physical_plausibility(sample), po = synth::oracle_physical_plausibility(sample);
    worst = std::max({worst, std::abs(s.human - so.human), std::abs(s.object - so.object),
                      std::abs(p.non_collision - po.non_collision), std::abs(p.contact - po.contact)});
    ++fixtures;
    if (seed <= 4) {
      std::vector<eval::InteractionSample> group;
      for (std::uint64_t k = 0; k < 3; ++k)
        group.push_back(eval::make_sample(g.scene, affordfit::testing::perturb(g.ground_truth, 0.3, 0.1, 50 + k)));
      const auto d = eval::motion_diversity(group), dor = synth::oracle_motion_diversity(group);
      worst = std::max({worst, std::abs(d.human - dor.human), std::abs(d.object - dor.object)});
    }
  }

  // Closed forms, compared exactly.
  std::vector<Vec3> line;
  for (int t = 0; t < 9; ++t) line.push_back(Vec3(0.125 * t, -0.25 * t, 2.0 + 0.0625 * t));
  eval::InteractionSample constant;
  constant.humans.push_back(joint_track(line));
  eval::ObjectTrack box;
  box.id = "box";
  box.corners = eval::bounding_box_corners({Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)});
  box.sdf = std::make_shared<const SdfGrid>(sample_sdf_function(
      [](const Vec3& p) { return (p.cwiseAbs() - Vec3::Constant(0.5)).maxCoeff(); }, Vec3::Constant(-0.5),
      Vec3::Constant(0.5), 16));
  for (int t = 0; t < 9; ++t) box.trajectory.push_back({Mat3::Identity(), Vec3(0.25 * t, 0.0, 3.0)});
  constant.objects.push_back(box);
  const auto smooth = eval::temporal_smoothness(constant);
  const auto div = eval::motion_diversity({constant, constant, constant});
  // The human walks 2 m in front of the box, never touching it.
  const auto plaus = eval::physical_plausibility(constant);
  const bool closed = smooth.human == 0.0 && smooth.object == 0.0 && div.human == 0.0 && div.object == 0.0 &&
                      plaus.non_collision == 1.0 && plaus.contact == 0.0;
  return {worst <= 1e-9 && closed,
          format("%d fixtures, worst |metric - oracle| %.3g; closed forms %s", fixtures, worst,
                 closed ? "exact" : "NOT exact")};
}

// ----------------------------------------------------------------- criterion 7

Outcome alignment() {
  const auto g = synth::generate_scene(synth::preset("hand_follow"));
  const auto& motion = g.scene.humans.at(0);
  const auto& K = g.scene.observations.intrinsics;
  const int T = motion.frame_count();
  std::mt19937_64 rng(2024);
  std::vector<hoiopt::Similarity> truth;
  double smin = 1e9, smax = 0.0;
  for (int t = 0; t < T; ++t) {
    truth.push_back(affordfit::testing::random_similarity(rng, 10.0 / kDeg, 0.5));
    smin = std::min(smin, truth.back().scale);
    smax = std::max(smax, truth.back().scale);
  }
  const auto fixture = affordfit::testing::align_fixture(motion, K, truth);
  Stopwatch clock;
  hoiopt::AlignOptions options;
  const auto result = hoiopt::align_point_maps(fixture.point_maps, fixture.pixels, motion, K, options);
  const double seconds = clock.seconds();
  double worst_scale = 0.0, worst_shift = 0.0;
  for (int t = 0; t < T; ++t) {
    worst_scale = std::max(worst_scale, std::abs(result.transforms[t].scale / truth[t].scale - 1.0));
    worst_shift = std::max(worst_shift, (result.transforms[t].translation - truth[t].translation).norm());
  }
  return {worst_scale <= 0.01 && worst_shift <= 0.01 && seconds < 60.0 && options.steps == 300,
          format("T=%d, scales %.2f-%.2f, 300 steps: worst scale error %.3g%%, worst translation error %.3g m, %.1f s",
                 T, smin, smax, 100.0 * worst_scale, worst_shift, seconds)};
}

// ----------------------------------------------------------------- criterion 8

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = affordfit::testing::read_file(e.path());
  return files;
}

Outcome determinism() {
  affordfit::testing::TempDir tmp("acceptance_det");
  const std::string cli = std::string("'") + AFFORDFIT_CLI + "'";
  // Both runs use the same paths so run.json and the metrics report, which record them, can match too.
  const fs::path dir = tmp / "run";
  const std::string d = "'" + dir.string() + "'";
  const std::string cmd =
      cli + " synth --preset hand_follow --frames 12 --sigma 0.005 --seed 11 --out " + d + "/scene > /dev/null && " +
      cli + " optimize --scene " + d + "/scene/scene.json --steps 60 --seed 3 --out " + d + "/fit > /dev/null && " +
      cli + " metrics --run " + d + "/fit/run.json --out " + d + "/metrics.json --csv " + d + "/metrics.csv > /dev/null";
  std::vector<std::map<std::string, std::string>> snaps;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir);
    if (shell(cmd) != 0) return {false, "pipeline invocation failed"};
    snaps.push_back(snapshot(dir));
  }
  std::size_t differing = 0;
  for (const auto& [name, bytes] : snaps[0]) {
    const auto it = snaps[1].find(name);
    differing += it == snaps[1].end() || it->second != bytes;
  }
  differing += snaps[0].size() != snaps[1].size();

  // In-process: identical optimize traces.
  const auto g = synth::generate_scene(affordfit::testing::random_scenario(5, 8));
  hoiopt::OptimizeConfig config;
  config.steps = 40;
  config.trace_every = 1;
  const auto a = hoiopt::optimize(g.scene, config, 9), b = hoiopt::optimize(g.scene, config, 9);
  bool same_trace = a.trace.size() == b.trace.size();
  for (std::size_t i = 0; same_trace && i < a.trace.size(); ++i) same_trace = a.trace[i].loss.total == b.trace[i].loss.total;
  return {differing == 0 && same_trace,
          format("synth|optimize|metrics twice: %zu artifacts, %zu differ; in-process trace %s", snaps[0].size(),
                 differing, same_trace ? "identical" : "differs")};
}

// ----------------------------------------------------------------- criterion 9

Outcome ablation() {
  const auto g = synth::generate_scene(synth::preset("hand_follow_ablation"));
  hoiopt::OptimizeConfig full;
  hoiopt::OptimizeConfig ablated;
  ablated.weights.contact = 0.0;
  Stopwatch clock;
  const auto rf = hoiopt::optimize(g.scene, full, 7);
  const auto ra = hoiopt::optimize(g.scene, ablated, 7);
  const auto pf = eval::physical_plausibility(eval::make_sample(g.scene, rf.trajectories));
  const auto pa = eval::physical_plausibility(eval::make_sample(g.scene, ra.trajectories));
  return {pa.contact < pf.contact,
          format("contact %.4f with the full loss vs %.4f without contact terms (non-collision %.4f vs %.4f), %.0f s",
                 pf.contact, pa.contact, pf.non_collision, pa.non_collision, clock.seconds())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "loss-oracle equivalence", loss_oracle);
  report(2, "gradient correctness", gradients);

  std::vector<FamilyRun> runs;
  report(3, "synthetic pose recovery", [&] {
    for (const std::string family : {"stationary", "linear", "circular_arc", "hand_follow"}) {
      for (double sigma : {0.0, 0.005}) {
        runs.push_back(run_family(family, sigma));
        const auto& r = runs.back();
        std::printf("  .. %s sigma=%.3f done in %.0f s\n", family.c_str(), sigma, r.seconds);
        std::fflush(stdout);
      }
    }
    return pose_recovery(runs);
  });
  report(4, "PAG constraint satisfaction", [&] {
    if (runs.size() != 8) return Outcome{false, "pose recovery runs unavailable"};
    return constraint_satisfaction(runs);
  });
  report(5, "voting segmentation", segmentation);
  report(6, "metrics oracles", metrics);
  report(7, "point-map alignment", alignment);
  report(8, "determinism", determinism);
  report(9, "contact ablation direction", ablation);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
