// affordfit: command-line front end over the pipeline stages.
//
// Exit status: 0 success, 1 failure (error JSON on stderr), 2 usage error.

#include "affordfit/error.hpp"
#include "affordfit/eval/metrics.hpp"
#include "affordfit/hoiopt/align.hpp"
#include "affordfit/hoiopt/io.hpp"
#include "affordfit/hoiopt/optimize.hpp"
#include "affordfit/io/json_util.hpp"
#include "affordfit/io/ply.hpp"
#include "affordfit/pag/pag.hpp"
#include "affordfit/partseg/partseg.hpp"
#include "affordfit/synth/synth.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace affordfit;
using io::json;

namespace {

struct ValidationFailed {
  std::string message;
};

void fail_json(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

// Reads a path from standard input when the argument is "-" or absent.
fs::path path_or_stdin(const std::string& arg, const char* what) {
  if (!arg.empty() && arg != "-") return arg;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    return line.substr(b, e - b + 1);
  }
  throw Error(ErrorCode::IoError, std::string("no ") + what + " path given on the command line or standard input");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

// ---------------------------------------------------------------- validate-pag

struct ValidateArgs {
  std::string file;
};

int run_validate(const ValidateArgs& a) {
  const auto graph = pag::read_pag(a.file);
  const auto report = pag::validate_pag(graph);
  json out = {{"valid", report.empty()}, {"violations", json::array()}};
  for (const auto& v : report)
    out["violations"].push_back({{"code", v.code}, {"subject", v.subject}, {"message", v.message}});
  std::cout << out.dump(2) << '\n';
  if (!report.empty()) {
    throw ValidationFailed{std::to_string(report.size()) + " violation(s); first: " + report.front().message};
  }
  return 0;
}

// -------------------------------------------------------------------- segment

struct SegmentArgs {
  std::string cloud, views, out;
  int splat = 0;
  double tolerance = 0.0;
};

int run_segment(const SegmentArgs& a) {
  const PointCloud cloud = read_ply_cloud(a.cloud);
  const auto set = partseg::read_views(a.views);
  partseg::SegmentOptions opt;
  opt.splat_radius = a.splat;
  opt.visibility_tolerance = a.tolerance;
  const PointCloud labeled = partseg::vote_labels(cloud, set.views, set.parts, opt);
  write_ply_cloud(a.out, labeled);
  std::vector<int> counts(set.parts.size(), 0);
  for (int l : labeled.labels) ++counts[l];
  json summary = {{"cloud", a.out}, {"parts", set.parts}, {"counts", counts}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------- align

struct AlignArgs {
  std::string input, out, apply, apply_out;
  int steps = 300;
  double lr = 1e-2;
  int max_points = 4096;
  std::uint64_t seed = 0;
};

// {"version":1,"intrinsics":{...},"motion":"human.json",
//  "frames":[{"points":"f0.ply","mask":"f0.png"|"f0.json"}]}
int run_align(const AlignArgs& a) {
  const fs::path input = a.input;
  const json doc = io::load_json(input);
  io::require_version(doc, "align input");
  const CameraIntrinsics k = io::to_intrinsics(io::require(doc, "intrinsics", "align input"), "align input.intrinsics");
  const auto motion = hoiopt::read_human_motion(io::resolve_path(input, io::require_string(doc, "motion", "align input")));
  const json& frames = io::require(doc, "frames", "align input");
  if (!frames.is_array()) throw Error(ErrorCode::SchemaError, "align input: 'frames' must be an array");
  std::vector<PointCloud> points;
  std::vector<std::vector<Vec2>> pixels;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string where = "align input.frames[" + std::to_string(t) + "]";
    const json& f = frames[t];
    if (!f.is_object()) throw Error(ErrorCode::SchemaError, where + " must be an object");
    points.push_back(f.contains("points") ? read_ply_cloud(io::resolve_path(input, io::require_string(f, "points", where)))
                                          : PointCloud{});
    pixels.push_back(f.contains("mask") ? hoiopt::read_mask_pixels(io::resolve_path(input, io::require_string(f, "mask", where)))
                                        : std::vector<Vec2>{});
  }
  hoiopt::AlignOptions opt;
  opt.steps = a.steps;
  opt.learning_rate = a.lr;
  opt.max_points = a.max_points;
  opt.seed = a.seed;
  const auto result = hoiopt::align_point_maps(points, pixels, motion, k, opt);
  hoiopt::write_similarities(a.out, result);

  if (!a.apply.empty()) {
    auto bundle = hoiopt::read_observations(a.apply);
    if (bundle.frame_count != static_cast<int>(result.transforms.size())) {
      throw Error(ErrorCode::FrameCountMismatch, "observations and similarities cover different frame counts");
    }
    for (auto& [id, obs] : bundle.objects) {
      for (std::size_t t = 0; t < obs.size(); ++t) {
        const auto& s = result.transforms[t];
        for (auto& p : obs[t].cloud) p = s * p;
        for (auto& [label, pts] : obs[t].part_clouds)
          for (auto& p : pts) p = s * p;
      }
    }
    hoiopt::write_observations(a.apply_out.empty() ? fs::path(a.apply).replace_extension(".aligned.json") : fs::path(a.apply_out),
                               bundle);
  }
  std::cout << a.out << '\n';
  return 0;
}

// ------------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string scene, config, out;
  std::optional<int> steps, restarts, max_points, trace_every, sdf_resolution;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, w_fit, w_contact, w_pen, w_smooth, temperature, pixel_scale;
  bool random_yaw = false;
};

template <typename T>
void take(std::optional<T>& slot, const json& cfg, const char* key) {
  if (slot || !cfg.contains(key)) return;
  const json& v = cfg.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw Error(ErrorCode::SchemaError, std::string("config: '") + key + "' must be a number");
  } else {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw Error(ErrorCode::SchemaError, std::string("config: '") + key + "' must be a non-negative integer");
  }
  slot = v.get<T>();
}

// Flags win over the config file, which wins over built-in defaults.
OptimizeArgs merge_config(OptimizeArgs a) {
  if (a.config.empty()) return a;
  const json cfg = io::load_json(a.config);
  if (!cfg.is_object()) throw Error(ErrorCode::SchemaError, "config: top level must be an object");
  if (a.scene.empty() && cfg.contains("scene"))
    a.scene = io::resolve_path(a.config, io::require_string(cfg, "scene", "config")).string();
  if (a.out.empty() && cfg.contains("output"))
    a.out = io::resolve_path(a.config, io::require_string(cfg, "output", "config")).string();
  take(a.steps, cfg, "steps");
  take(a.restarts, cfg, "restarts");
  take(a.seed, cfg, "seed");
  take(a.lr, cfg, "learning_rate");
  take(a.max_points, cfg, "max_points");
  take(a.trace_every, cfg, "trace_every");
  take(a.sdf_resolution, cfg, "sdf_resolution");
  take(a.temperature, cfg, "softmin_temperature");
  take(a.pixel_scale, cfg, "pixel_scale");
  if (cfg.contains("weights")) {
    const json& w = cfg.at("weights");
    if (!w.is_object()) throw Error(ErrorCode::SchemaError, "config: 'weights' must be an object");
    take(a.w_fit, w, "fit");
    take(a.w_contact, w, "contact");
    take(a.w_pen, w, "penetration");
    take(a.w_smooth, w, "smooth");
  }
  if (!a.random_yaw && cfg.contains("random_yaw")) {
    if (!cfg.at("random_yaw").is_boolean()) throw Error(ErrorCode::SchemaError, "config: 'random_yaw' must be a boolean");
    a.random_yaw = cfg.at("random_yaw").get<bool>();
  }
  return a;
}

int run_optimize(OptimizeArgs a) {
  a = merge_config(std::move(a));
  const fs::path manifest = path_or_stdin(a.scene, "scene manifest");
  if (!fs::exists(manifest)) throw Error(ErrorCode::IoError, "scene manifest not found: " + manifest.string());
  hoiopt::SceneLoadOptions load;
  if (a.sdf_resolution) load.sdf_resolution = *a.sdf_resolution;
  const hoiopt::Scene scene = hoiopt::read_scene(manifest, load);

  hoiopt::OptimizeConfig cfg;
  cfg.steps = a.steps.value_or(cfg.steps);
  cfg.restarts = a.restarts.value_or(cfg.restarts);
  cfg.learning_rate = a.lr.value_or(cfg.learning_rate);
  cfg.max_points = a.max_points.value_or(cfg.max_points);
  cfg.trace_every = a.trace_every.value_or(cfg.trace_every);
  cfg.softmin_temperature = a.temperature.value_or(cfg.softmin_temperature);
  cfg.pixel_scale = a.pixel_scale.value_or(cfg.pixel_scale);
  cfg.weights.fit = a.w_fit.value_or(cfg.weights.fit);
  cfg.weights.contact = a.w_contact.value_or(cfg.weights.contact);
  cfg.weights.penetration = a.w_pen.value_or(cfg.weights.penetration);
  cfg.weights.smooth = a.w_smooth.value_or(cfg.weights.smooth);
  cfg.random_yaw = a.random_yaw;
  cfg.validate();

  const auto result = hoiopt::optimize(scene, cfg, a.seed.value_or(0));
  const fs::path out = a.out.empty() ? manifest.parent_path() / "fit" : fs::path(a.out);
  fs::create_directories(out);
  hoiopt::write_optimize_outputs(out, result);
  hoiopt::write_loss_trace(out / "loss_trace.csv", result.trace);
  json run = {{"version", 1}, {"scene", fs::absolute(manifest).lexically_normal().string()}, {"trajectories", "."}};
  io::save_json(out / "run.json", run);
  std::cout << (out / "run.json").string() << '\n';
  return 0;
}

// -------------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string scene, run, out, csv;
  std::vector<std::string> dirs;
  double tolerance = eval::kDefaultCollisionTolerance;
};

int run_metrics(MetricsArgs a) {
  if (a.scene.empty() && a.dirs.empty()) {
    // Pipeline form: a run.json written by `optimize`.
    const fs::path run = path_or_stdin(a.run, "run");
    const json doc = io::load_json(run);
    io::require_version(doc, "run");
    a.scene = io::require_string(doc, "scene", "run");
    fs::path dir = io::resolve_path(run, io::require_string(doc, "trajectories", "run")).lexically_normal();
    if (!dir.has_filename()) dir = dir.parent_path();
    a.dirs.push_back(dir.string());
  }
  if (a.scene.empty() || a.dirs.empty()) {
    throw CLI::ValidationError("metrics needs --scene with at least one --trajectory-dir, or --run");
  }
  const hoiopt::Scene scene = hoiopt::read_scene(a.scene);
  std::vector<std::string> ids;
  for (const auto& o : scene.objects) ids.push_back(o.id);

  std::vector<eval::InteractionSample> samples;
  json report = {{"version", 1}, {"tolerance", a.tolerance}, {"samples", json::array()}};
  std::string csv = "sample,trajectory_dir,smoothness_human,smoothness_object,non_collision,contact\n";
  for (std::size_t i = 0; i < a.dirs.size(); ++i) {
    samples.push_back(eval::make_sample(scene, hoiopt::read_trajectories(a.dirs[i], ids)));
    const auto smooth = eval::temporal_smoothness(samples.back());
    const auto plaus = eval::physical_plausibility(samples.back(), a.tolerance);
    report["samples"].push_back({{"trajectory_dir", a.dirs[i]},
                                 {"smoothness", {{"human", smooth.human}, {"object", smooth.object}}},
                                 {"non_collision", plaus.non_collision},
                                 {"contact", plaus.contact}});
    char row[256];
    std::snprintf(row, sizeof row, ",%.17g,%.17g,%.17g,%.17g\n", smooth.human, smooth.object, plaus.non_collision,
                  plaus.contact);
    csv += std::to_string(i) + "," + a.dirs[i] + row;
  }
  if (samples.size() >= 2) {
    const auto div = eval::motion_diversity(samples);
    report["diversity"] = {{"human", div.human}, {"object", div.object}};
  } else {
    report["diversity"] = nullptr;
  }
  if (!a.csv.empty()) write_text(a.csv, csv);
  if (!a.out.empty()) io::save_json(a.out, report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec, preset, out = "synth";
  std::optional<std::uint64_t> seed;
  std::optional<int> frames;
  std::optional<double> sigma;
  bool write_spec = false;
};

int run_synth(const SynthArgs& a) {
  if (a.spec.empty() == a.preset.empty()) throw CLI::ValidationError("synth needs exactly one of --spec or --preset");
  synth::ScenarioSpec spec = a.spec.empty() ? synth::preset(a.preset) : synth::read_scenario(a.spec);
  if (a.seed) spec.seed = *a.seed;
  if (a.sigma) spec.noise.sigma = *a.sigma;
  if (a.frames) spec.frame_count = spec.pag.frame_count = *a.frames;
  const auto generated = synth::generate_scene(spec);
  const fs::path manifest = fs::path(a.out) / "scene.json";
  synth::write_generated(manifest, generated);
  if (a.write_spec) write_text(fs::path(a.out) / "scenario.json", synth::serialize_scenario(spec));
  std::cout << manifest.string() << '\n';
  return 0;
}

int default_threads() {
  if (const char* env = std::getenv("AFFORDFIT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Part-affordance-guided 4D human-object interaction fitting"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "Cap on worker threads (default: $AFFORDFIT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate-pag", "Check a Part Affordance Graph and print every violation");
  validate->add_option("file", va.file, "PAG JSON file")->required();

  SegmentArgs sa;
  auto* segment = app.add_subcommand("segment", "Lift multi-view 2D part masks to per-point labels");
  segment->add_option("--cloud", sa.cloud, "Object point cloud (PLY)")->required();
  segment->add_option("--views", sa.views, "View manifest JSON")->required();
  segment->add_option("--out", sa.out, "Labeled output cloud (PLY)")->required();
  segment->add_option("--splat", sa.splat, "Z-buffer splat half-width in pixels, 0 adapts to point spacing")->check(CLI::NonNegativeNumber);
  segment->add_option("--visibility-tolerance", sa.tolerance, "Depth slack; <= 0 picks 1% of the bbox diagonal");

  AlignArgs aa;
  auto* align = app.add_subcommand("align", "Fit per-frame similarities from depth point maps to the body");
  align->add_option("--input", aa.input, "Alignment input JSON")->required();
  align->add_option("--out", aa.out, "Similarities JSON")->required();
  align->add_option("--steps", aa.steps)->check(CLI::PositiveNumber);
  align->add_option("--lr", aa.lr)->check(CLI::PositiveNumber);
  align->add_option("--max-points", aa.max_points)->check(CLI::NonNegativeNumber);
  align->add_option("--seed", aa.seed);
  align->add_option("--apply", aa.apply, "Observation bundle to transform with the fitted similarities");
  align->add_option("--apply-out", aa.apply_out, "Where to write the transformed bundle");

  OptimizeArgs oa;
  auto* optimize = app.add_subcommand("optimize", "Fit object pose trajectories to a scene");
  optimize->add_option("--scene", oa.scene, "Scene manifest (default: read the path from stdin)");
  optimize->add_option("--config", oa.config, "Run configuration JSON");
  optimize->add_option("--out", oa.out, "Output directory (default: <scene dir>/fit)");
  optimize->add_option("--steps", oa.steps)->check(CLI::PositiveNumber);
  optimize->add_option("--restarts", oa.restarts)->check(CLI::PositiveNumber);
  optimize->add_option("--seed", oa.seed);
  optimize->add_option("--lr", oa.lr)->check(CLI::PositiveNumber);
  optimize->add_option("--max-points", oa.max_points, "Per-frame observation cap, 0 disables")
      ->check(CLI::NonNegativeNumber);
  optimize->add_option("--trace-every", oa.trace_every)->check(CLI::PositiveNumber);
  optimize->add_option("--sdf-resolution", oa.sdf_resolution, "Grid cells for objects given as meshes")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--w-fit", oa.w_fit)->check(CLI::NonNegativeNumber);
  optimize->add_option("--w-contact", oa.w_contact)->check(CLI::NonNegativeNumber);
  optimize->add_option("--w-penetration", oa.w_pen)->check(CLI::NonNegativeNumber);
  optimize->add_option("--w-smooth", oa.w_smooth)->check(CLI::NonNegativeNumber);
  optimize->add_option("--temperature", oa.temperature, "Softmin temperature (m)")->check(CLI::PositiveNumber);
  optimize->add_option("--pixel-scale", oa.pixel_scale, "2D Chamfer multiplier; <= 0 means 1/fx");
  optimize->add_flag("--random-yaw", oa.random_yaw, "Seeded random restart yaws");

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Score fitted trajectories");
  metrics->add_option("--scene", ma.scene, "Scene manifest");
  metrics->add_option("--trajectory-dir", ma.dirs, "Directory of trajectory_<id>.json (repeat per sample)");
  metrics->add_option("--run", ma.run, "run.json written by optimize (default: read the path from stdin)");
  metrics->add_option("--tolerance", ma.tolerance, "Collision tolerance (m)");
  metrics->add_option("--out", ma.out, "Also write the metrics JSON here");
  metrics->add_option("--csv", ma.csv, "Write one CSV row per sample");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and its ground truth");
  auto* spec_opt = synth->add_option("--spec", ya.spec, "Scenario JSON");
  synth->add_option("--preset", ya.preset, "Built-in scenario")->excludes(spec_opt);
  synth->add_option("--out", ya.out, "Output directory");
  synth->add_option("--seed", ya.seed);
  synth->add_option("--frames", ya.frames, "Override the frame count")->check(CLI::PositiveNumber);
  synth->add_option("--sigma", ya.sigma, "Override the point noise (m)")->check(CLI::NonNegativeNumber);
  synth->add_flag("--write-spec", ya.write_spec, "Also write the resolved scenario JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : 2;
  }

  if (threads > 0) omp_set_num_threads(threads);
  try {
    if (*validate) return run_validate(va);
    if (*segment) return run_segment(sa);
    if (*align) return run_align(aa);
    if (*optimize) return run_optimize(oa);
    if (*metrics) return run_metrics(ma);
    if (*synth) return run_synth(ya);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const ValidationFailed& e) {
    fail_json("ValidationError", e.message);
    return 1;
  } catch (const Error& e) {
    fail_json(to_string(e.code()), e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    fail_json("IoError", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail_json("InternalError", e.what());
    return 1;
  }
  return 2;
}
