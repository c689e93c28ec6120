#pragma once
// File formats consumed and produced by the optimisation stage. Every reader
// raises SyntaxError / SchemaError / ReferenceError / IoError rather than
// crashing on malformed input; relative paths resolve against the file that
// names them.

#include "affordfit/hoiopt/align.hpp"
#include "affordfit/hoiopt/optimize.hpp"
#include "affordfit/hoiopt/scene.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace affordfit::hoiopt {

/// {"version":1,"id":"h0","frame_count":T,"frames":[{"joints":[[x,y,z],...],
///  "parts":{"left_hand":[[x,y,z],...],...},"vertices":[[x,y,z],...]}]}
HumanMotionSequence read_human_motion(const std::filesystem::path& path);
void write_human_motion(const std::filesystem::path& path, const HumanMotionSequence& motion);

/// {"version":1,"frame_count":T,"intrinsics":{...},"objects":{"id":[{"frame":t,
///  "cloud":"a.ply","parts":{"label":"b.ply"},"mask":"c.png","part_masks":{"label":"d.png"}}]}}
/// Frames absent from an object's list are treated as unobserved. Masks are
/// PNG (pixel centres of nonzero pixels) or JSON {"pixels":[[u,v],...]}.
ObservationBundle read_observations(const std::filesystem::path& path);
/// Writes per-frame files next to `path`. Masks are written as JSON pixel
/// lists so continuous coordinates survive the round trip.
void write_observations(const std::filesystem::path& path, const ObservationBundle& bundle);

std::vector<Vec2> read_mask_pixels(const std::filesystem::path& path);
void write_mask_pixels(const std::filesystem::path& path, const std::vector<Vec2>& pixels);

struct SceneLoadOptions {
  int sdf_resolution = kDefaultSdfResolution;  // used for objects given as meshes
};

/// {"version":1,"frame_count":T,"pag":"pag.json","observations":"obs.json",
///  "objects":[{"id":"o","parts":["a","b"],"cloud":"o.ply","sdf":"o.sdf"|"mesh":"o.obj"}],
///  "humans":[{"id":"h0","motion":"h0.json"}]}
Scene read_scene(const std::filesystem::path& manifest, const SceneLoadOptions& options = {});
/// Writes the manifest and every referenced file into the manifest's directory.
void write_scene(const std::filesystem::path& manifest, const Scene& scene);

/// {"version":1,"object":"id","frames":[{"rotation":[9 row-major],"translation":[3]}]}
void write_trajectory(const std::filesystem::path& path, const std::string& object, const PoseTrajectory& trajectory);
PoseTrajectory read_trajectory(const std::filesystem::path& path, std::string* object = nullptr);
/// "trajectory_<id>.json", with characters outside [A-Za-z0-9_-] replaced by '_'.
std::string trajectory_filename(const std::string& object);

/// trajectory_<id>.json per object plus report.json with the loss breakdown
/// of every restart.
void write_optimize_outputs(const std::filesystem::path& directory, const OptimizeResult& result);
std::vector<PoseTrajectory> read_trajectories(const std::filesystem::path& directory,
                                              const std::vector<std::string>& objects);

void write_loss_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

/// {"version":1,"frames":[{"scale":s,"rotation":[9],"translation":[3],"interpolated":b}]}
void write_similarities(const std::filesystem::path& path, const AlignResult& result);
AlignResult read_similarities(const std::filesystem::path& path);

}  // namespace affordfit::hoiopt
