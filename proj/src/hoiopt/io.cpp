#include "affordfit/hoiopt/io.hpp"

#include "affordfit/error.hpp"
#include "affordfit/io/json_util.hpp"
#include "affordfit/io/ply.hpp"
#include "affordfit/io/png.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace affordfit::hoiopt {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string safe_name(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

std::string frame_tag(int t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "f%04d", t);
  return buf;
}

std::vector<Vec3> read_points(const fs::path& path) { return read_ply_cloud(path).points; }

void write_points(const fs::path& path, const std::vector<Vec3>& points) {
  PointCloud c;
  c.points = points;
  write_ply_cloud(path, c);
}

json breakdown_json(const LossBreakdown& b) {
  return {{"total", b.total},
          {"fit_3d_object", b.fit_3d_object},
          {"fit_3d_part", b.fit_3d_part},
          {"fit_2d_object", b.fit_2d_object},
          {"fit_2d_part", b.fit_2d_part},
          {"contact_continuity", b.contact_continuity},
          {"contact_dynamics", b.contact_dynamics},
          {"penetration", b.penetration},
          {"smooth_rotation", b.smooth_rotation},
          {"smooth_translation", b.smooth_translation}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json pose_json(const RigidPose& p) {
  return {{"rotation", io::from_mat3(p.rotation)}, {"translation", io::from_vec3(p.translation)}};
}

RigidPose pose_from_json(const json& j, const std::string& where) {
  RigidPose p;
  p.rotation = io::to_mat3(io::require(j, "rotation", where), where + ".rotation");
  p.translation = io::to_vec3(io::require(j, "translation", where), where + ".translation");
  if (!is_rotation(p.rotation, 1e-6)) throw Error(ErrorCode::SchemaError, where + ": rotation is not orthonormal");
  return p;
}

}  // namespace

HumanMotionSequence read_human_motion(const fs::path& path) {
  const json doc = io::load_json(path);
  const std::string where = path.string();
  io::require_version(doc, where);
  HumanMotionSequence m;
  m.id = io::require_string(doc, "id", where);
  const int frame_count = io::require_int(doc, "frame_count", where);
  const json& frames = io::require(doc, "frames", where);
  if (!frames.is_array() || static_cast<int>(frames.size()) != frame_count) {
    throw Error(ErrorCode::SchemaError, where + ": 'frames' must be an array of frame_count entries");
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string fw = where + ": frames[" + std::to_string(t) + "]";
    const json& f = frames[t];
    HumanFrame frame;
    frame.joints = io::to_points(io::require(f, "joints", fw), fw + ".joints");
    const json& parts = io::require(f, "parts", fw);
    if (!parts.is_object()) throw Error(ErrorCode::SchemaError, fw + ": 'parts' must be an object");
    for (const auto& [label, pts] : parts.items()) frame.parts[label] = io::to_points(pts, fw + ".parts." + label);
    if (f.contains("vertices")) frame.vertices = io::to_points(f["vertices"], fw + ".vertices");
    m.frames.push_back(std::move(frame));
  }
  m.validate();
  return m;
}

void write_human_motion(const fs::path& path, const HumanMotionSequence& motion) {
  json doc;
  doc["version"] = 1;
  doc["id"] = motion.id;
  doc["frame_count"] = motion.frame_count();
  doc["frames"] = json::array();
  for (const auto& f : motion.frames) {
    json jf;
    jf["joints"] = io::from_points(f.joints);
    jf["parts"] = json::object();
    for (const auto& [label, pts] : f.parts) jf["parts"][label] = io::from_points(pts);
    jf["vertices"] = io::from_points(f.vertices);
    doc["frames"].push_back(jf);
  }
  io::save_json(path, doc);
}

std::vector<Vec2> read_mask_pixels(const fs::path& path) {
  std::vector<Vec2> pixels;
  if (path.extension() == ".png") {
    const Bitmap mask = read_png_mask(path);
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x)
        if (mask.at(x, y)) pixels.emplace_back(x + 0.5, y + 0.5);
    return pixels;
  }
  const json doc = io::load_json(path);
  const json& list = io::require(doc, "pixels", path.string());
  if (!list.is_array()) throw Error(ErrorCode::SchemaError, path.string() + ": 'pixels' must be an array");
  for (const auto& p : list) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::SchemaError, path.string() + ": pixels must be [u, v] pairs");
    }
    pixels.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pixels;
}

void write_mask_pixels(const fs::path& path, const std::vector<Vec2>& pixels) {
  json list = json::array();
  for (const auto& p : pixels) list.push_back({p.x(), p.y()});
  io::save_json(path, {{"pixels", list}});
}

ObservationBundle read_observations(const fs::path& path) {
  const json doc = io::load_json(path);
  const std::string where = path.string();
  io::require_version(doc, where);
  ObservationBundle b;
  b.frame_count = io::require_int(doc, "frame_count", where);
  if (b.frame_count < 1) throw Error(ErrorCode::SchemaError, where + ": frame_count must be positive");
  b.intrinsics = io::to_intrinsics(io::require(doc, "intrinsics", where), where + ".intrinsics");
  const json& objects = io::require(doc, "objects", where);
  if (!objects.is_object()) throw Error(ErrorCode::SchemaError, where + ": 'objects' must be an object");
  for (const auto& [id, entries] : objects.items()) {
    if (!entries.is_array()) throw Error(ErrorCode::SchemaError, where + ": objects." + id + " must be an array");
    auto& frames = b.objects[id];
    frames.resize(b.frame_count);
    std::set<int> seen;
    for (const auto& e : entries) {
      const std::string ew = where + ": objects." + id;
      const int t = io::require_int(e, "frame", ew);
      if (t < 0 || t >= b.frame_count) throw Error(ErrorCode::SchemaError, ew + ": frame index out of range");
      if (!seen.insert(t).second) throw Error(ErrorCode::SchemaError, ew + ": frame listed twice");
      FrameObservation& f = frames[t];
      auto file = [&](const json& v) {
        if (!v.is_string()) throw Error(ErrorCode::SchemaError, ew + ": file references must be strings");
        return io::resolve_path(path, v.get<std::string>());
      };
      if (e.contains("cloud")) f.cloud = read_points(file(e["cloud"]));
      if (e.contains("mask")) f.mask = read_mask_pixels(file(e["mask"]));
      if (e.contains("parts")) {
        if (!e["parts"].is_object()) throw Error(ErrorCode::SchemaError, ew + ": 'parts' must be an object");
        for (const auto& [label, ref] : e["parts"].items()) f.part_clouds[label] = read_points(file(ref));
      }
      if (e.contains("part_masks")) {
        if (!e["part_masks"].is_object()) throw Error(ErrorCode::SchemaError, ew + ": 'part_masks' must be an object");
        for (const auto& [label, ref] : e["part_masks"].items()) f.part_masks[label] = read_mask_pixels(file(ref));
      }
    }
  }
  b.validate();
  return b;
}

void write_observations(const fs::path& path, const ObservationBundle& bundle) {
  const fs::path dir = path.parent_path();
  const std::string stem = path.stem().string();
  json doc;
  doc["version"] = 1;
  doc["frame_count"] = bundle.frame_count;
  doc["intrinsics"] = io::from_intrinsics(bundle.intrinsics);
  doc["objects"] = json::object();
  for (const auto& [id, frames] : bundle.objects) {
    json list = json::array();
    for (int t = 0; t < static_cast<int>(frames.size()); ++t) {
      const FrameObservation& f = frames[t];
      if (f.empty()) continue;
      const std::string base = stem + "_" + safe_name(id) + "_" + frame_tag(t);
      json e;
      e["frame"] = t;
      if (!f.cloud.empty()) {
        write_points(dir / (base + "_cloud.ply"), f.cloud);
        e["cloud"] = base + "_cloud.ply";
      }
      if (!f.mask.empty()) {
        write_mask_pixels(dir / (base + "_mask.json"), f.mask);
        e["mask"] = base + "_mask.json";
      }
      for (const auto& [label, pts] : f.part_clouds) {
        if (pts.empty()) continue;
        const std::string name = base + "_part_" + safe_name(label) + ".ply";
        write_points(dir / name, pts);
        e["parts"][label] = name;
      }
      for (const auto& [label, px] : f.part_masks) {
        if (px.empty()) continue;
        const std::string name = base + "_partmask_" + safe_name(label) + ".json";
        write_mask_pixels(dir / name, px);
        e["part_masks"][label] = name;
      }
      list.push_back(e);
    }
    doc["objects"][id] = list;
  }
  io::save_json(path, doc);
}

Scene read_scene(const fs::path& manifest, const SceneLoadOptions& options) {
  const json doc = io::load_json(manifest);
  const std::string where = manifest.string();
  io::require_version(doc, where);
  Scene scene;
  scene.pag = pag::read_pag(io::resolve_path(manifest, io::require_string(doc, "pag", where)).string());
  const int frames = io::require_int(doc, "frame_count", where);
  if (frames != scene.pag.frame_count) {
    throw Error(ErrorCode::FrameCountMismatch, where + ": frame_count differs from the graph's");
  }
  const json& objects = io::require(doc, "objects", where);
  if (!objects.is_array()) throw Error(ErrorCode::SchemaError, where + ": 'objects' must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string ow = where + ": objects[" + std::to_string(i) + "]";
    const json& o = objects[i];
    ObjectModel m;
    m.id = io::require_string(o, "id", ow);
    const json& parts = io::require(o, "parts", ow);
    if (!parts.is_array()) throw Error(ErrorCode::SchemaError, ow + ": 'parts' must be an array");
    for (const auto& p : parts) {
      if (!p.is_string()) throw Error(ErrorCode::SchemaError, ow + ": part names must be strings");
      m.parts.push_back(p.get<std::string>());
    }
    m.cloud = read_ply_cloud(io::resolve_path(manifest, io::require_string(o, "cloud", ow)));
    if (o.contains("sdf")) {
      m.sdf = read_sdf(io::resolve_path(manifest, io::require_string(o, "sdf", ow)));
    } else if (o.contains("mesh")) {
      m.sdf = build_sdf(read_mesh(io::resolve_path(manifest, io::require_string(o, "mesh", ow))),
                        options.sdf_resolution);
    }
    scene.objects.push_back(std::move(m));
  }
  if (doc.contains("observations")) {
    scene.observations = read_observations(io::resolve_path(manifest, io::require_string(doc, "observations", where)));
  }
  if (doc.contains("humans")) {
    const json& humans = doc["humans"];
    if (!humans.is_array()) throw Error(ErrorCode::SchemaError, where + ": 'humans' must be an array");
    for (std::size_t i = 0; i < humans.size(); ++i) {
      const std::string hw = where + ": humans[" + std::to_string(i) + "]";
      const std::string id = io::require_string(humans[i], "id", hw);
      HumanMotionSequence h = read_human_motion(io::resolve_path(manifest, io::require_string(humans[i], "motion", hw)));
      if (h.id != id) throw Error(ErrorCode::ReferenceError, hw + ": motion file is for human '" + h.id + "'");
      scene.humans.push_back(std::move(h));
    }
  }
  return scene;
}

void write_scene(const fs::path& manifest, const Scene& scene) {
  const fs::path dir = manifest.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  json doc;
  doc["version"] = 1;
  doc["frame_count"] = scene.frame_count();
  {
    std::ofstream out(dir / "pag.json");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "pag.json").string());
    out << pag::serialize_pag(scene.pag) << '\n';
  }
  doc["pag"] = "pag.json";
  doc["objects"] = json::array();
  for (const auto& o : scene.objects) {
    const std::string name = safe_name(o.id);
    json jo;
    jo["id"] = o.id;
    jo["parts"] = o.parts;
    write_ply_cloud(dir / (name + ".ply"), o.cloud);
    jo["cloud"] = name + ".ply";
    if (o.sdf) {
      write_sdf(dir / (name + ".sdf"), *o.sdf);
      jo["sdf"] = name + ".sdf";
    }
    doc["objects"].push_back(jo);
  }
  if (!scene.observations.objects.empty()) {
    write_observations(dir / "observations.json", scene.observations);
    doc["observations"] = "observations.json";
  }
  doc["humans"] = json::array();
  for (const auto& h : scene.humans) {
    const std::string name = "human_" + safe_name(h.id) + ".json";
    write_human_motion(dir / name, h);
    doc["humans"].push_back({{"id", h.id}, {"motion", name}});
  }
  io::save_json(manifest, doc);
}

void write_trajectory(const fs::path& path, const std::string& object, const PoseTrajectory& trajectory) {
  json doc;
  doc["version"] = 1;
  doc["object"] = object;
  doc["frames"] = json::array();
  for (const auto& p : trajectory) doc["frames"].push_back(pose_json(p));
  io::save_json(path, doc);
}

PoseTrajectory read_trajectory(const fs::path& path, std::string* object) {
  const json doc = io::load_json(path);
  const std::string where = path.string();
  io::require_version(doc, where);
  const std::string id = io::require_string(doc, "object", where);
  if (object) *object = id;
  const json& frames = io::require(doc, "frames", where);
  if (!frames.is_array()) throw Error(ErrorCode::SchemaError, where + ": 'frames' must be an array");
  PoseTrajectory traj;
  for (std::size_t t = 0; t < frames.size(); ++t)
    traj.push_back(pose_from_json(frames[t], where + ": frames[" + std::to_string(t) + "]"));
  return traj;
}

std::string trajectory_filename(const std::string& object) { return "trajectory_" + safe_name(object) + ".json"; }

void write_optimize_outputs(const fs::path& directory, const OptimizeResult& result) {
  fs::create_directories(directory);
  for (std::size_t o = 0; o < result.objects.size(); ++o) {
    write_trajectory(directory / trajectory_filename(result.objects[o]), result.objects[o],
                     result.trajectories[o]);
  }
  json report;
  report["version"] = 1;
  report["objects"] = result.objects;
  report["best_restart"] = result.best_restart;
  report["final_loss"] = breakdown_json(result.final_loss);
  report["restarts"] = json::array();
  for (const auto& r : result.restarts) {
    json jr = {{"index", r.index}, {"yaw", r.yaw}, {"completed", r.completed}};
    if (r.completed) jr["final_loss"] = breakdown_json(r.final_loss);
    else jr["error"] = r.error;
    report["restarts"].push_back(jr);
  }
  io::save_json(directory / "report.json", report);
}

std::vector<PoseTrajectory> read_trajectories(const fs::path& directory, const std::vector<std::string>& objects) {
  std::vector<PoseTrajectory> out;
  for (const auto& id : objects) {
    std::string stored;
    out.push_back(read_trajectory(directory / trajectory_filename(id), &stored));
    if (stored != id) {
      throw Error(ErrorCode::ReferenceError, "trajectory file for '" + id + "' names object '" + stored + "'");
    }
  }
  return out;
}

void write_loss_trace(const fs::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "restart,step,learning_rate,exact,total,fit_3d_object,fit_3d_part,fit_2d_object,fit_2d_part,"
         "contact_continuity,contact_dynamics,penetration,smooth_rotation,smooth_translation\n";
  for (const auto& r : trace) {
    const LossBreakdown& b = r.loss;
    out << r.restart << ',' << r.step << ',' << fmt(r.learning_rate) << ',' << (r.exact ? 1 : 0);
    for (double v : {b.total, b.fit_3d_object, b.fit_3d_part, b.fit_2d_object, b.fit_2d_part, b.contact_continuity,
                     b.contact_dynamics, b.penetration, b.smooth_rotation, b.smooth_translation}) {
      out << ',' << fmt(v);
    }
    out << '\n';
  }
}

void write_similarities(const fs::path& path, const AlignResult& result) {
  json doc;
  doc["version"] = 1;
  doc["frames"] = json::array();
  for (std::size_t t = 0; t < result.transforms.size(); ++t) {
    const Similarity& s = result.transforms[t];
    doc["frames"].push_back({{"scale", s.scale},
                             {"rotation", io::from_mat3(s.rotation)},
                             {"translation", io::from_vec3(s.translation)},
                             {"interpolated", static_cast<bool>(result.interpolated[t])},
                             {"loss", result.final_loss[t]}});
  }
  io::save_json(path, doc);
}

AlignResult read_similarities(const fs::path& path) {
  const json doc = io::load_json(path);
  const std::string where = path.string();
  io::require_version(doc, where);
  const json& frames = io::require(doc, "frames", where);
  if (!frames.is_array()) throw Error(ErrorCode::SchemaError, where + ": 'frames' must be an array");
  AlignResult r;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string fw = where + ": frames[" + std::to_string(t) + "]";
    Similarity s;
    s.scale = io::require_number(frames[t], "scale", fw);
    if (!(s.scale > 0.0)) throw Error(ErrorCode::SchemaError, fw + ": scale must be positive");
    s.rotation = io::to_mat3(io::require(frames[t], "rotation", fw), fw);
    s.translation = io::to_vec3(io::require(frames[t], "translation", fw), fw);
    const json& interp = io::require(frames[t], "interpolated", fw);
    if (!interp.is_boolean()) throw Error(ErrorCode::SchemaError, fw + ": 'interpolated' must be a boolean");
    r.transforms.push_back(s);
    r.interpolated.push_back(interp.get<bool>());
    r.final_loss.push_back(frames[t].contains("loss") ? io::require_number(frames[t], "loss", fw) : 0.0);
  }
  return r;
}

}  // namespace affordfit::hoiopt
