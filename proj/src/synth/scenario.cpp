#include "affordfit/error.hpp"
#include "affordfit/hoiopt/io.hpp"
#include "affordfit/io/json_util.hpp"
#include "affordfit/synth/synth.hpp"

#include <fstream>
#include <sstream>

namespace affordfit::synth {
namespace {

using io::json;
namespace fs = std::filesystem;

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? io::require_number(obj, key, where) : fallback;
}

Vec3 vec3_or(const json& obj, const char* key, const Vec3& fallback, const std::string& where) {
  return obj.contains(key) ? io::to_vec3(obj.at(key), where + "." + key) : fallback;
}

Shape parse_shape(const std::string& s, const std::string& where) {
  if (s == "box") return Shape::box;
  if (s == "cylinder") return Shape::cylinder;
  if (s == "sphere") return Shape::sphere;
  throw Error(ErrorCode::SchemaError, where + ": unknown shape '" + s + "'");
}

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::box: return "box";
    case Shape::cylinder: return "cylinder";
    case Shape::sphere: return "sphere";
  }
  return "";
}

constexpr std::pair<Family, const char*> kFamilies[] = {{Family::stationary, "stationary"},
                                                       {Family::linear, "linear"},
                                                       {Family::circular_arc, "circular_arc"},
                                                       {Family::hand_follow, "hand_follow"},
                                                       {Family::attached, "attached"}};

Family parse_family(const std::string& s, const std::string& where) {
  for (const auto& [f, name] : kFamilies)
    if (s == name) return f;
  throw Error(ErrorCode::SchemaError, where + ": unknown trajectory family '" + s + "'");
}

const char* family_name(Family f) {
  for (const auto& [g, name] : kFamilies)
    if (f == g) return name;
  return "";
}

TrajectorySpec parse_trajectory(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, where + " must be an object");
  TrajectorySpec s;
  s.family = parse_family(io::require_string(j, "family", where), where);
  s.start = vec3_or(j, j.contains("position") ? "position" : "start", s.start, where);
  s.end = vec3_or(j, "end", s.family == Family::linear ? s.end : s.start, where);
  s.yaw = number_or(j, "yaw", 0.0, where);
  s.yaw_end = number_or(j, "yaw_end", s.yaw, where);
  s.center = vec3_or(j, "center", s.center, where);
  s.radius = number_or(j, "radius", s.radius, where);
  s.angle_start = number_or(j, "angle_start", s.angle_start, where);
  s.angle_end = number_or(j, "angle_end", s.angle_end, where);
  if (j.contains("follow")) s.follow = io::require_string(j, "follow", where);
  return s;
}

json trajectory_json(const TrajectorySpec& s) {
  json j;
  j["family"] = family_name(s.family);
  switch (s.family) {
    case Family::stationary:
      j["position"] = io::from_vec3(s.start);
      j["yaw"] = s.yaw;
      break;
    case Family::linear:
      j["start"] = io::from_vec3(s.start);
      j["end"] = io::from_vec3(s.end);
      j["yaw"] = s.yaw;
      j["yaw_end"] = s.yaw_end;
      break;
    case Family::circular_arc:
      j["center"] = io::from_vec3(s.center);
      j["radius"] = s.radius;
      j["angle_start"] = s.angle_start;
      j["angle_end"] = s.angle_end;
      j["yaw"] = s.yaw;
      break;
    case Family::hand_follow:
    case Family::attached:
      j["follow"] = s.follow;
      j["yaw"] = s.yaw;
      break;
  }
  return j;
}

ScenarioSpec parse_document(const json& root, const fs::path* anchor) {
  if (!root.is_object()) throw Error(ErrorCode::SchemaError, "scenario: top level must be an object");
  io::require_version(root, "scenario");
  ScenarioSpec s;
  s.frame_count = io::require_int(root, "frame_count", "scenario");
  if (root.contains("seed")) {
    const json& seed = root.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
      throw Error(ErrorCode::SchemaError, "scenario: 'seed' must be a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  if (root.contains("intrinsics")) s.intrinsics = io::to_intrinsics(root.at("intrinsics"), "scenario.intrinsics");
  if (root.contains("sdf_resolution")) s.sdf_resolution = io::require_int(root, "sdf_resolution", "scenario");
  if (root.contains("noise")) {
    const json& n = root.at("noise");
    if (!n.is_object()) throw Error(ErrorCode::SchemaError, "scenario.noise must be an object");
    s.noise.sigma = number_or(n, "sigma", 0.0, "scenario.noise");
    s.noise.mask_dilation = n.contains("mask_dilation") ? io::require_int(n, "mask_dilation", "scenario.noise") : 0;
    s.noise.dropout = number_or(n, "dropout", 0.0, "scenario.noise");
    s.noise.offset = number_or(n, "offset", 0.0, "scenario.noise");
    if (!(s.noise.sigma >= 0.0)) throw Error(ErrorCode::SchemaError, "scenario.noise: sigma must be >= 0");
  }

  const json& objects = io::require(root, "objects", "scenario");
  if (!objects.is_array()) throw Error(ErrorCode::SchemaError, "scenario.objects must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "scenario.objects[" + std::to_string(i) + "]";
    const json& jo = objects[i];
    if (!jo.is_object()) throw Error(ErrorCode::SchemaError, where + " must be an object");
    ObjectSpec o;
    o.id = io::require_string(jo, "id", where);
    o.spacing = number_or(jo, "spacing", o.spacing, where);
    const json& prims = io::require(jo, "primitives", where);
    if (!prims.is_array()) throw Error(ErrorCode::SchemaError, where + ".primitives must be an array");
    for (std::size_t k = 0; k < prims.size(); ++k) {
      const std::string pw = where + ".primitives[" + std::to_string(k) + "]";
      const json& jp = prims[k];
      if (!jp.is_object()) throw Error(ErrorCode::SchemaError, pw + " must be an object");
      Primitive p;
      p.part = io::require_string(jp, "part", pw);
      p.shape = parse_shape(io::require_string(jp, "shape", pw), pw);
      p.center = vec3_or(jp, "center", p.center, pw);
      if (p.shape == Shape::box) p.size = io::to_vec3(io::require(jp, "size", pw), pw + ".size");
      if (p.shape != Shape::box) p.radius = io::require_number(jp, "radius", pw);
      if (p.shape == Shape::cylinder) p.height = io::require_number(jp, "height", pw);
      p.spacing = number_or(jp, "spacing", 0.0, pw);
      o.primitives.push_back(p);
    }
    o.trajectory = jo.contains("trajectory") ? parse_trajectory(jo.at("trajectory"), where + ".trajectory")
                                             : TrajectorySpec{};
    s.objects.push_back(std::move(o));
  }

  if (root.contains("humans")) {
    const json& humans = root.at("humans");
    if (!humans.is_array()) throw Error(ErrorCode::SchemaError, "scenario.humans must be an array");
    for (std::size_t i = 0; i < humans.size(); ++i) {
      const std::string where = "scenario.humans[" + std::to_string(i) + "]";
      const json& jh = humans[i];
      if (!jh.is_object()) throw Error(ErrorCode::SchemaError, where + " must be an object");
      HumanSpec h;
      h.id = io::require_string(jh, "id", where);
      h.start = vec3_or(jh, "start", h.start, where);
      h.end = vec3_or(jh, "end", h.start, where);
      h.yaw = number_or(jh, "yaw", 0.0, where);
      h.yaw_end = number_or(jh, "yaw_end", h.yaw, where);
      if (jh.contains("points_per_part")) h.points_per_part = io::require_int(jh, "points_per_part", where);
      s.humans.push_back(std::move(h));
    }
  }

  const json& pag = io::require(root, "pag", "scenario");
  if (pag.is_string()) {
    if (!anchor) throw Error(ErrorCode::SchemaError, "scenario.pag: file references need a scenario path");
    s.pag = pag::read_pag(io::resolve_path(*anchor, pag.get<std::string>()).string());
  } else {
    s.pag = pag::parse_pag(pag.dump());
  }
  return s;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& json_text) {
  return parse_document(io::parse_json(json_text, "scenario"), nullptr);
}

ScenarioSpec read_scenario(const fs::path& path) { return parse_document(io::load_json(path), &path); }

std::string serialize_scenario(const ScenarioSpec& s) {
  json root;
  root["version"] = 1;
  root["frame_count"] = s.frame_count;
  root["seed"] = s.seed;
  root["intrinsics"] = io::from_intrinsics(s.intrinsics);
  root["sdf_resolution"] = s.sdf_resolution;
  root["noise"] = {{"sigma", s.noise.sigma}, {"mask_dilation", s.noise.mask_dilation}, {"dropout", s.noise.dropout},
                   {"offset", s.noise.offset}};
  root["objects"] = json::array();
  for (const auto& o : s.objects) {
    json jo;
    jo["id"] = o.id;
    jo["spacing"] = o.spacing;
    jo["primitives"] = json::array();
    for (const auto& p : o.primitives) {
      json jp;
      jp["part"] = p.part;
      jp["shape"] = shape_name(p.shape);
      jp["center"] = io::from_vec3(p.center);
      if (p.shape == Shape::box) jp["size"] = io::from_vec3(p.size);
      if (p.shape != Shape::box) jp["radius"] = p.radius;
      if (p.shape == Shape::cylinder) jp["height"] = p.height;
      if (p.spacing > 0.0) jp["spacing"] = p.spacing;
      jo["primitives"].push_back(jp);
    }
    jo["trajectory"] = trajectory_json(o.trajectory);
    root["objects"].push_back(jo);
  }
  root["humans"] = json::array();
  for (const auto& h : s.humans) {
    root["humans"].push_back({{"id", h.id},
                              {"start", io::from_vec3(h.start)},
                              {"end", io::from_vec3(h.end)},
                              {"yaw", h.yaw},
                              {"yaw_end", h.yaw_end},
                              {"points_per_part", h.points_per_part}});
  }
  root["pag"] = json::parse(pag::serialize_pag(s.pag));
  return root.dump(2) + "\n";
}

void write_generated(const fs::path& manifest, const GeneratedScene& generated) {
  hoiopt::write_scene(manifest, generated.scene);
  const fs::path dir = manifest.parent_path() / "ground_truth";
  fs::create_directories(dir);
  for (std::size_t i = 0; i < generated.scene.objects.size(); ++i) {
    const auto& id = generated.scene.objects[i].id;
    hoiopt::write_trajectory(dir / hoiopt::trajectory_filename(id), id, generated.ground_truth[i]);
  }
}

}  // namespace affordfit::synth
