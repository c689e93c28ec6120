#pragma once

#include "affordfit/geom/camera.hpp"
#include "affordfit/geom/rotation.hpp"
#include "affordfit/hoiopt/scene.hpp"
#include "affordfit/pag/pag.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affordfit::synth {

enum class Shape { box, cylinder, sphere };

/// Axis-aligned primitive in the object's canonical frame. Cylinders run along y.
struct Primitive {
  std::string part;
  Shape shape = Shape::box;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // box extents
  double radius = 0.5;       // cylinder, sphere
  double height = 1.0;       // cylinder
  double spacing = 0.0;      // surface sample spacing, 0 = object default
};

enum class Family { stationary, linear, circular_arc, hand_follow, attached };

/// Angles in degrees; yaw turns about the up axis (-y).
struct TrajectorySpec {
  Family family = Family::stationary;
  Vec3 start = Vec3(0.0, 0.0, 2.5);  // stationary position / linear start
  Vec3 end = Vec3(0.0, 0.0, 2.5);
  double yaw = 0.0;      // start yaw; offset for circular_arc, hand_follow and attached
  double yaw_end = 0.0;  // linear
  Vec3 center = Vec3(0.0, 0.0, 2.5);  // circular_arc
  double radius = 0.3;
  double angle_start = 0.0;
  double angle_end = 60.0;
  /// hand_follow: human part node to hang below; attached: part node of the
  /// parent object this object touches.
  std::string follow;
};

struct ObjectSpec {
  std::string id;
  std::vector<Primitive> primitives;
  double spacing = 0.04;
  TrajectorySpec trajectory;
};

/// Procedural stick-figure human walking on a straight line.
struct HumanSpec {
  std::string id;
  Vec3 start = Vec3(0.0, 0.0, 3.0);  // hips centre
  Vec3 end = Vec3(0.0, 0.0, 3.0);
  double yaw = 0.0;
  double yaw_end = 0.0;
  int points_per_part = 32;
};

struct NoiseSpec {
  double sigma = 0.0;      // per-axis Gaussian noise on observed points (m)
  int mask_dilation = 0;   // 0 keeps continuous projected coordinates
  double dropout = 0.0;    // probability of dropping an object's frame
  /// Per-axis Gaussian shift of an object's observed 3D points, drawn once per
  /// frame (m); masks stay where the object really is.
  double offset = 0.0;
};

struct ScenarioSpec {
  int frame_count = 49;
  std::uint64_t seed = 0;
  CameraIntrinsics intrinsics{800.0, 800.0, 320.0, 240.0, 640, 480};
  std::vector<ObjectSpec> objects;
  std::vector<HumanSpec> humans;
  pag::PartAffordanceGraph pag;
  NoiseSpec noise;
  int sdf_resolution = 64;
};

struct GeneratedScene {
  hoiopt::Scene scene;  // noisy observations
  std::vector<PoseTrajectory> ground_truth;  // scene object order
  hoiopt::ObservationBundle clean_observations;
};

/// Builds geometry, ground-truth trajectories that satisfy the graph exactly,
/// procedural humans, observations and SDFs. Deterministic in spec.seed.
/// Throws InfeasibleSpec when the families cannot honour the graph.
GeneratedScene generate_scene(const ScenarioSpec& spec);

/// Canonical labeled cloud for one object (parts in first-appearance order).
hoiopt::ObjectModel build_object(const ObjectSpec& spec);
/// Exact signed distance to the union of an object's primitives.
double primitive_sdf(const ObjectSpec& spec, const Vec3& p);

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec read_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioSpec& spec);

/// Named fixtures: "stationary", "linear", "circular_arc", "hand_follow",
/// "hand_follow_ablation", "two_part_box", "four_part_box".
ScenarioSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// Writes the scene manifest and files, plus ground_truth/trajectory_<id>.json.
void write_generated(const std::filesystem::path& manifest, const GeneratedScene& generated);

}  // namespace affordfit::synth
