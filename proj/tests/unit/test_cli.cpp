#include "affordfit/hoiopt/io.hpp"
#include "affordfit/io/json_util.hpp"
#include "affordfit/io/ply.hpp"
#include "affordfit/partseg/partseg.hpp"
#include "affordfit/synth/synth.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using namespace affordfit;
using affordfit::testing::read_file;
using affordfit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const std::string kCli = AFFORDFIT_CLI;
const std::string kData = AFFORDFIT_TEST_DATA;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs `args` through the shell with the CLI binary substituted for "@".
Run run(const std::string& args, const TempDir& dir) {
  std::string cmd;
  for (char c : args) {
    if (c == '@') cmd += "'" + kCli + "'";
    else cmd += c;
  }
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string full = "( " + cmd + " ) > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(full.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

}  // namespace

TEST_CASE("validate-pag") {
  TempDir dir("cli_validate");
  auto r = run("@ validate-pag " + kData + "/iron_board_pag.json", dir);
  CHECK(r.code == 0);
  const auto report = io::json::parse(r.out);
  CHECK(report["valid"] == true);
  CHECK(report["violations"].empty());

  r = run("@ validate-pag " + kData + "/bad_vocabulary_pag.json", dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.out)["violations"].size() == 1);
  CHECK(io::json::parse(r.err)["error"] == "ValidationError");

  r = run("@ validate-pag " + kData + "/malformed_pag.json", dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.err)["error"] == "SyntaxError");

  r = run("@ validate-pag " + q(dir / "missing.json"), dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.err)["error"] == "IoError");
}

TEST_CASE("usage errors exit 2") {
  TempDir dir("cli_usage");
  CHECK(run("@ frobnicate", dir).code == 2);
  CHECK(run("@ optimize --steps 0", dir).code == 2);
  CHECK(run("@ validate-pag", dir).code == 2);
  CHECK(run("@ synth --preset stationary --spec x.json", dir).code == 2);
  CHECK(run("@ --help", dir).code == 0);
}

TEST_CASE("malformed scene files fail cleanly") {
  TempDir dir("cli_bad");
  {
    std::ofstream(dir / "scene.json") << "{\"version\": 1, \"frame_count\": 3, \"pag\": \"nowhere.json\", \"objects\": []}";
  }
  auto r = run("@ optimize --scene " + q(dir / "scene.json") + " --steps 2", dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.err).contains("error"));
  {
    std::ofstream(dir / "garbage.json") << "not json";
  }
  r = run("@ optimize --scene " + q(dir / "garbage.json"), dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.err)["error"] == "SyntaxError");
}

TEST_CASE("synth and optimize are byte-identical across repeated runs") {
  TempDir dir("cli_repeat");
  const std::string synth = "@ synth --preset linear --frames 5 --sigma 0.003 --seed 3 --out ";
  REQUIRE(run(synth + q(dir / "a"), dir).code == 0);
  REQUIRE(run(synth + q(dir / "b"), dir).code == 0);
  CHECK(snapshot(dir / "a") == snapshot(dir / "b"));

  const std::string opt = "@ --threads 2 optimize --scene " + q(dir / "a" / "scene.json") + " --steps 20 --restarts 2 --seed 7 --out ";
  auto r1 = run(opt + q(dir / "fit1"), dir);
  REQUIRE(r1.code == 0);
  REQUIRE(run(opt + q(dir / "fit2"), dir).code == 0);
  const auto f1 = snapshot(dir / "fit1");
  CHECK(f1 == snapshot(dir / "fit2"));
  CHECK(f1.count("trajectory_toolbox.json") == 1);
  CHECK(f1.count("report.json") == 1);
  CHECK(f1.count("loss_trace.csv") == 1);
  CHECK(fs::path(r1.out.substr(0, r1.out.find('\n'))) == dir / "fit1" / "run.json");

  const std::string metrics = "@ metrics --run " + q(dir / "fit1" / "run.json");
  const auto m1 = run(metrics, dir);
  REQUIRE(m1.code == 0);
  CHECK(run(metrics, dir).out == m1.out);
}

TEST_CASE("config file precedence") {
  TempDir dir("cli_config");
  REQUIRE(run("@ synth --preset stationary --frames 4 --out " + q(dir / "s"), dir).code == 0);
  {
    std::ofstream(dir / "cfg.json") << R"({"steps": 3, "restarts": 1, "seed": 5, "weights": {"smooth": 2.0}})";
  }
  const std::string scene = " --scene " + q(dir / "s" / "scene.json");
  REQUIRE(run("@ optimize" + scene + " --config " + q(dir / "cfg.json") + " --out " + q(dir / "c"), dir).code == 0);
  REQUIRE(run("@ optimize" + scene + " --steps 3 --restarts 1 --seed 5 --w-smooth 2 --out " + q(dir / "f"), dir).code == 0);
  REQUIRE(run("@ optimize" + scene + " --config " + q(dir / "cfg.json") + " --steps 6 --out " + q(dir / "cf"), dir).code == 0);
  REQUIRE(run("@ optimize" + scene + " --steps 6 --restarts 1 --seed 5 --w-smooth 2 --out " + q(dir / "ff"), dir).code == 0);
  CHECK(snapshot(dir / "c") == snapshot(dir / "f"));
  CHECK(snapshot(dir / "cf") == snapshot(dir / "ff"));
  CHECK(snapshot(dir / "c") != snapshot(dir / "cf"));
  {
    std::ofstream(dir / "bad.json") << R"({"steps": "many"})";
  }
  const auto r = run("@ optimize" + scene + " --config " + q(dir / "bad.json"), dir);
  CHECK(r.code == 1);
  CHECK(io::json::parse(r.err)["error"] == "SchemaError");
}

TEST_CASE("synth | optimize | metrics on noiseless hand-follow reports full contact") {
  TempDir dir("cli_pipe");
  const auto r = run("@ synth --preset hand_follow --frames 6 --sigma 0 --out " + q(dir / "hf") +
                         " | @ optimize --steps 300 --seed 7 | @ metrics",
                     dir);
  REQUIRE(r.code == 0);
  const auto report = io::json::parse(r.out);
  REQUIRE(report["samples"].size() == 1);
  CHECK(report["samples"][0]["contact"].get<double>() == 1.0);
  CHECK(report["diversity"].is_null());

  // Ground truth and fit scored together also yield a diversity entry.
  const auto both = run("@ metrics --scene " + q(dir / "hf" / "scene.json") + " --trajectory-dir " +
                            q(dir / "hf" / "ground_truth") + " --trajectory-dir " + q(dir / "hf" / "fit") +
                            " --csv " + q(dir / "m.csv"),
                        dir);
  REQUIRE(both.code == 0);
  const auto j = io::json::parse(both.out);
  CHECK(j["samples"][0]["contact"].get<double>() == 1.0);
  CHECK(j["diversity"]["object"].get<double>() >= 0.0);
  const auto csv = read_file(dir / "m.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("segment") {
  TempDir dir("cli_segment");
  const auto model = synth::build_object(synth::preset("two_part_box").objects[0]);
  const auto K = partseg::framing_intrinsics(192);
  partseg::ViewSet set{model.parts, {}};
  for (const auto& pose : partseg::cube_corner_views(model.cloud)) set.views.push_back(partseg::render_view(model.cloud, model.parts, K, pose));
  partseg::write_views(dir / "views" / "views.json", set);
  PointCloud plain;
  plain.points = model.cloud.points;
  write_ply_cloud(dir / "cloud.ply", plain);
  const auto r = run("@ segment --cloud " + q(dir / "cloud.ply") + " --views " + q(dir / "views" / "views.json") +
                         " --out " + q(dir / "labeled.ply"),
                     dir);
  REQUIRE(r.code == 0);
  const auto labeled = read_ply_cloud(dir / "labeled.ply");
  int correct = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) correct += labeled.labels[i] == model.cloud.labels[i];
  CHECK(correct >= 0.95 * labeled.size());
}

TEST_CASE("align") {
  TempDir dir("cli_align");
  auto spec = synth::preset("hand_follow");
  spec.frame_count = spec.pag.frame_count = 4;
  const auto g = synth::generate_scene(spec);
  const auto& motion = g.scene.humans[0];
  const auto& K = g.scene.observations.intrinsics;
  hoiopt::Similarity truth;
  truth.scale = 1.5;
  truth.translation = Vec3(0.05, 0.02, -0.3);
  const auto f = affordfit::testing::align_fixture(motion, K, std::vector<hoiopt::Similarity>(4, truth));
  hoiopt::write_human_motion(dir / "human.json", motion);
  io::json doc = {{"version", 1}, {"intrinsics", io::from_intrinsics(K)}, {"motion", "human.json"}, {"frames", io::json::array()}};
  for (int t = 0; t < 4; ++t) {
    const std::string pts = "p" + std::to_string(t) + ".ply", mask = "m" + std::to_string(t) + ".json";
    write_ply_cloud(dir / pts, f.point_maps[t]);
    hoiopt::write_mask_pixels(dir / mask, f.pixels[t]);
    doc["frames"].push_back({{"points", pts}, {"mask", mask}});
  }
  io::save_json(dir / "align.json", doc);
  const auto r = run("@ align --input " + q(dir / "align.json") + " --out " + q(dir / "sim.json"), dir);
  REQUIRE(r.code == 0);
  const auto result = hoiopt::read_similarities(dir / "sim.json");
  for (const auto& s : result.transforms) {
    CHECK(s.scale == doctest::Approx(1.5).epsilon(0.01));
    CHECK((s.translation - truth.translation).norm() <= 0.01);
  }
}
