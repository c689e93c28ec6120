#include "affordfit/error.hpp"
#include "affordfit/hoiopt/align.hpp"
#include "affordfit/hoiopt/optimize.hpp"
#include "affordfit/synth/synth.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace affordfit;
using namespace affordfit::hoiopt;
using affordfit::testing::bbox_diagonal;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

synth::GeneratedScene short_preset(const std::string& name, int T, double sigma = 0.0) {
  auto spec = synth::preset(name);
  spec.frame_count = T;
  spec.pag.frame_count = T;
  spec.noise.sigma = sigma;
  return synth::generate_scene(spec);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_breakdown(const LossBreakdown& a, const LossBreakdown& b) {
  return same_bits(a.fit_3d_object, b.fit_3d_object) && same_bits(a.fit_3d_part, b.fit_3d_part) &&
         same_bits(a.fit_2d_object, b.fit_2d_object) && same_bits(a.fit_2d_part, b.fit_2d_part) &&
         same_bits(a.contact_continuity, b.contact_continuity) && same_bits(a.contact_dynamics, b.contact_dynamics) &&
         same_bits(a.penetration, b.penetration) && same_bits(a.smooth_rotation, b.smooth_rotation) &&
         same_bits(a.smooth_translation, b.smooth_translation) && same_bits(a.total, b.total);
}

}  // namespace

TEST_CASE("initial parameters") {
  const auto g = short_preset("linear", 5);
  const double yaw = 0.7;
  const auto p = initial_params(g.scene, yaw);
  const auto& model = g.scene.objects[0];
  const Vec3 c = centroid(model.cloud.points);
  for (int t = 0; t < 5; ++t) {
    const RigidPose pose = p.pose(0, t);
    CHECK((pose.rotation - axis_angle(kUpAxis, yaw)).norm() < 1e-12);
    const Vec3 observed = centroid(g.scene.observations.objects.at(model.id)[t].cloud);
    CHECK((pose * c - observed).norm() < 1e-9);
  }
}

TEST_CASE("initial translation carries over unobserved frames") {
  auto g = short_preset("linear", 5);
  auto& frames = g.scene.observations.objects.begin()->second;
  frames[0] = FrameObservation{};
  frames[3] = FrameObservation{};
  const auto p = initial_params(g.scene, 0.0);
  CHECK(p.pose(0, 0).translation == p.pose(0, 1).translation);
  CHECK(p.pose(0, 3).translation == p.pose(0, 2).translation);
}

TEST_CASE("config validation") {
  OptimizeConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto mutate : std::vector<void (*)(OptimizeConfig&)>{
           [](OptimizeConfig& x) { x.steps = 0; }, [](OptimizeConfig& x) { x.restarts = 0; },
           [](OptimizeConfig& x) { x.learning_rate = 0; }, [](OptimizeConfig& x) { x.max_points = -1; },
           [](OptimizeConfig& x) { x.softmin_temperature = 0; },
           [](OptimizeConfig& x) { x.weights = {0, 0, 0, 0}; }}) {
    OptimizeConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("same seed gives a bit-identical trace") {
  const auto g = synth::generate_scene(affordfit::testing::random_scenario(4, 5));
  OptimizeConfig c;
  c.steps = 30;
  c.restarts = 2;
  c.trace_every = 1;
  c.max_points = 64;
  const auto a = optimize(g.scene, c, 99);
  const auto b = optimize(g.scene, c, 99);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(same_breakdown(a.trace[i].loss, b.trace[i].loss));
  CHECK(a.best_restart == b.best_restart);
  for (std::size_t o = 0; o < a.trajectories.size(); ++o)
    for (std::size_t t = 0; t < a.trajectories[o].size(); ++t) {
      CHECK(a.trajectories[o][t].rotation == b.trajectories[o][t].rotation);
      CHECK(a.trajectories[o][t].translation == b.trajectories[o][t].translation);
    }

  c.exec = kernels::Exec::serial;
  const auto s = optimize(g.scene, c, 99);
  CHECK(same_breakdown(s.final_loss, a.final_loss));
}

TEST_CASE("best restart has the lowest final loss") {
  const auto g = short_preset("circular_arc", 6, 0.003);
  OptimizeConfig c;
  c.steps = 40;
  c.random_yaw = true;
  const auto r = optimize(g.scene, c, 5);
  REQUIRE(r.restarts.size() == 4);
  REQUIRE(r.best_restart >= 0);
  for (const auto& rr : r.restarts) {
    CHECK(rr.completed);
    CHECK(r.final_loss.total <= rr.final_loss.total);
  }
  CHECK(same_breakdown(r.final_loss, r.restarts[r.best_restart].final_loss));
  // Random yaws depend on the seed.
  const auto other = optimize(g.scene, c, 6);
  CHECK(other.restarts[1].yaw != r.restarts[1].yaw);
}

TEST_CASE("recovers a short noiseless trajectory") {
  const auto g = short_preset("linear", 8);
  OptimizeConfig c;
  c.steps = 250;
  const auto r = optimize(g.scene, c, 1);
  const double diam = bbox_diagonal(g.scene.objects[0].cloud.points);
  for (std::size_t t = 0; t < g.ground_truth[0].size(); ++t) {
    CHECK(geodesic_distance(r.trajectories[0][t].rotation, g.ground_truth[0][t].rotation) * kDeg <= 5.0);
    CHECK((r.trajectories[0][t].translation - g.ground_truth[0][t].translation).norm() <= 0.02 * diam);
  }
}

TEST_CASE("stationary object stays put under strong smoothing") {
  const auto g = short_preset("stationary", 8, 0.005);
  OptimizeConfig c;
  c.steps = 250;
  c.weights.smooth = 10.0;
  const auto r = optimize(g.scene, c, 2);
  const auto& tr = r.trajectories[0];
  for (std::size_t t = 1; t < tr.size(); ++t) {
    CHECK((tr[t].translation - tr[0].translation).norm() <= 1e-3);
    CHECK(geodesic_distance(tr[t].rotation, tr[0].rotation) * kDeg <= 0.5);
  }
}

TEST_CASE("point map alignment") {
  const auto g = short_preset("hand_follow", 6);
  const auto& motion = g.scene.humans.at(0);
  const auto& K = g.scene.observations.intrinsics;
  const int T = motion.frame_count();

  SUBCASE("already aligned") {
    const auto f = affordfit::testing::align_fixture(motion, K, std::vector<Similarity>(T));
    const auto r = align_point_maps(f.point_maps, f.pixels, motion, K);
    for (const auto& s : r.transforms) {
      CHECK(std::abs(s.scale - 1.0) <= 1e-3);
      CHECK((s.rotation - Mat3::Identity()).norm() <= 1e-3);
      CHECK(s.translation.norm() <= 1e-3);
    }
  }
  SUBCASE("scaled and shifted") {
    // Point maps at twice the true size and shifted.
    Similarity truth;
    truth.scale = 0.5;
    truth.translation = Vec3(0.1, -0.05, 1.2);
    const auto f = affordfit::testing::align_fixture(motion, K, std::vector<Similarity>(T, truth));
    const auto r = align_point_maps(f.point_maps, f.pixels, motion, K);
    for (const auto& s : r.transforms) {
      CHECK(s.scale == doctest::Approx(0.5).epsilon(0.01));
      CHECK((s.translation - truth.translation).norm() <= 0.01 * truth.translation.norm());
    }
  }
  SUBCASE("empty frame is interpolated") {
    std::vector<Similarity> truth(T);
    for (int t = 0; t < T; ++t) truth[t].translation = Vec3(0.02 * t, 0, 0.1 * t);
    auto f = affordfit::testing::align_fixture(motion, K, truth);
    f.point_maps[2].points.clear();
    f.pixels[2].clear();
    const auto r = align_point_maps(f.point_maps, f.pixels, motion, K);
    CHECK(r.interpolated[2]);
    CHECK_FALSE(r.interpolated[1]);
    const Similarity mid = interpolate(r.transforms[1], r.transforms[3], 0.5);
    CHECK(r.transforms[2].scale == mid.scale);
    CHECK((r.transforms[2].translation - mid.translation).norm() < 1e-12);
    CHECK((r.transforms[2].rotation - mid.rotation).norm() < 1e-12);

    for (auto& m : f.point_maps) m.points.clear();
    CHECK_THROWS_AS(align_point_maps(f.point_maps, f.pixels, motion, K), Error);
  }
}
