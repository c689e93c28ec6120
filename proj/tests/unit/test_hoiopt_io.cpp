#include "affordfit/error.hpp"
#include "affordfit/geom/mesh.hpp"
#include "affordfit/hoiopt/io.hpp"
#include "affordfit/io/ply.hpp"
#include "affordfit/io/png.hpp"
#include "affordfit/synth/synth.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace affordfit;
using namespace affordfit::hoiopt;
using affordfit::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("point cloud PLY round trip, ASCII and binary") {
  TempDir dir("ply");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  PointCloud c;
  for (int i = 0; i < 50; ++i) {
    c.points.push_back(Vec3(n(rng), n(rng), n(rng)));
    c.labels.push_back(i % 3);
  }
  for (bool binary : {true, false}) {
    write_ply_cloud(dir / "c.ply", c, binary);
    const auto back = read_ply_cloud(dir / "c.ply");
    CHECK(back.labels == c.labels);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK((back.points[i] - c.points[i]).norm() < 1e-12);
  }
  write_text(dir / "bad.ply", "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nend_header\n1\n");
  CHECK_THROWS_AS(read_ply_cloud(dir / "bad.ply"), Error);
  CHECK(code_of([&] { read_ply_cloud(dir / "missing.ply"); }) == ErrorCode::IoError);
}

TEST_CASE("mesh formats") {
  TempDir dir("mesh");
  const auto box = make_box_mesh(Vec3(1, 2, 3));
  write_ply_mesh(dir / "box.ply", box);
  const auto back = read_mesh(dir / "box.ply");
  CHECK(back.faces == box.faces);
  CHECK(is_watertight(back));
  write_text(dir / "quad.obj", "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  const auto quad = read_mesh(dir / "quad.obj");
  CHECK(quad.vertices.size() == 4);
  CHECK(quad.faces.size() == 2);
  write_text(dir / "broken.obj", "v 0 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(read_mesh(dir / "broken.obj"), Error);
}

TEST_CASE("PNG masks and pixel lists") {
  TempDir dir("png");
  Bitmap m(13, 7);
  m.set(0, 0);
  m.set(12, 6);
  m.set(5, 3);
  write_png_mask(dir / "m.png", m);
  CHECK(read_png_mask(dir / "m.png") == m);
  const auto pixels = read_mask_pixels(dir / "m.png");
  CHECK(pixels.size() == 3);
  CHECK(std::find(pixels.begin(), pixels.end(), Vec2(5.5, 3.5)) != pixels.end());
  const std::vector<Vec2> cont = {Vec2(0.25, 1.0 / 3.0), Vec2(100.125, 7)};
  write_mask_pixels(dir / "p.json", cont);
  CHECK(read_mask_pixels(dir / "p.json") == cont);
}

TEST_CASE("scene round trip preserves every loss term") {
  TempDir dir("scene");
  const auto g = synth::generate_scene(affordfit::testing::random_scenario(8));
  write_scene(dir / "scene.json", g.scene);
  const Scene back = read_scene(dir / "scene.json");
  CHECK(back.pag == g.scene.pag);
  REQUIRE(back.objects.size() == g.scene.objects.size());
  for (std::size_t o = 0; o < back.objects.size(); ++o) {
    CHECK(back.objects[o].parts == g.scene.objects[o].parts);
    CHECK(back.objects[o].cloud.points == g.scene.objects[o].cloud.points);
    CHECK(back.objects[o].cloud.labels == g.scene.objects[o].cloud.labels);
    CHECK(back.objects[o].sdf->values == g.scene.objects[o].sdf->values);
  }
  REQUIRE(back.humans.size() == g.scene.humans.size());
  for (std::size_t h = 0; h < back.humans.size(); ++h) {
    for (int t = 0; t < back.humans[h].frame_count(); ++t) {
      CHECK(back.humans[h].frames[t].joints == g.scene.humans[h].frames[t].joints);
      CHECK(back.humans[h].frames[t].parts == g.scene.humans[h].frames[t].parts);
      CHECK(back.humans[h].frames[t].vertices == g.scene.humans[h].frames[t].vertices);
    }
  }
  const auto params =
      TrajectoryParams::from_trajectories(affordfit::testing::object_ids(g.scene), g.ground_truth);
  LossOptions options;
  options.max_points = 0;
  const LossWeights w{1, 1, 1, 1};
  CHECK(total_loss(params, back, w, options).total == total_loss(params, g.scene, w, options).total);
}

TEST_CASE("observations with PNG masks") {
  TempDir dir("obs");
  write_text(dir / "obs.json", R"({"version":1,"frame_count":2,
    "intrinsics":{"fx":100,"fy":100,"cx":8,"cy":8,"width":16,"height":16},
    "objects":{"cup":[{"frame":1,"mask":"m.png"}]}})");
  Bitmap m(16, 16);
  m.set(3, 4);
  write_png_mask(dir / "m.png", m);
  const auto obs = read_observations(dir / "obs.json");
  REQUIRE(obs.objects.at("cup").size() == 2);
  CHECK(obs.objects.at("cup")[0].empty());
  CHECK(obs.objects.at("cup")[1].mask == std::vector<Vec2>{Vec2(3.5, 4.5)});

  write_text(dir / "late.json", R"({"version":1,"frame_count":2,
    "intrinsics":{"fx":100,"fy":100,"cx":8,"cy":8,"width":16,"height":16},
    "objects":{"cup":[{"frame":2,"mask":"m.png"}]}})");
  CHECK_THROWS_AS(read_observations(dir / "late.json"), Error);
  write_text(dir / "noversion.json", R"({"frame_count":2,"objects":{}})");
  CHECK(code_of([&] { read_observations(dir / "noversion.json"); }) == ErrorCode::SchemaError);
  write_text(dir / "broken.json", "{");
  CHECK(code_of([&] { read_observations(dir / "broken.json"); }) == ErrorCode::SyntaxError);
}

TEST_CASE("human motion validation") {
  TempDir dir("human");
  HumanMotionSequence h;
  h.id = "h0";
  for (int t = 0; t < 3; ++t) {
    HumanFrame f;
    f.joints = {Vec3(t, 0, 0), Vec3(0, t, 0)};
    f.parts["left_hand"] = {Vec3(0.1 * t, 0, 1)};
    f.vertices = {Vec3(0, 0, 1)};
    h.frames.push_back(f);
  }
  write_human_motion(dir / "h.json", h);
  const auto back = read_human_motion(dir / "h.json");
  CHECK(back.id == "h0");
  CHECK(back.frames[2].joints == h.frames[2].joints);
  CHECK(back.part_labels() == std::vector<std::string>{"left_hand"});
  h.frames[1].parts["left_hand"].push_back(Vec3::Zero());
  CHECK_THROWS_AS(h.validate(), Error);
}

TEST_CASE("trajectory, similarity and trace files") {
  TempDir dir("traj");
  PoseTrajectory tr(4);
  for (int t = 0; t < 4; ++t) tr[t] = {axis_angle(Vec3(0, 1, 0), 0.1 * t), Vec3(t, 2, 3)};
  write_trajectory(dir / "t.json", "my obj", tr);
  std::string id;
  const auto back = read_trajectory(dir / "t.json", &id);
  CHECK(id == "my obj");
  for (int t = 0; t < 4; ++t) {
    CHECK(back[t].rotation == tr[t].rotation);
    CHECK(back[t].translation == tr[t].translation);
  }
  CHECK(trajectory_filename("my obj/1") == "trajectory_my_obj_1.json");

  write_text(dir / "skew.json", R"({"version":1,"object":"o","frames":[{"rotation":[1,0,0,0,2,0,0,0,1],"translation":[0,0,0]}]})");
  CHECK_THROWS_AS(read_trajectory(dir / "skew.json"), Error);

  AlignResult a;
  a.transforms.resize(2);
  a.transforms[1].scale = 0.75;
  a.transforms[1].translation = Vec3(1, 2, 3);
  a.interpolated = {false, true};
  a.final_loss = {0.5, 0.0};
  write_similarities(dir / "s.json", a);
  const auto sb = read_similarities(dir / "s.json");
  CHECK(sb.transforms[1].scale == 0.75);
  CHECK(sb.interpolated == a.interpolated);

  TraceRow row;
  row.loss.total = 1.5;
  write_loss_trace(dir / "trace.csv", {row, row});
  const auto csv = affordfit::testing::read_file(dir / "trace.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("restart,step,", 0) == 0);
}
