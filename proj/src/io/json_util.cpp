#include "affordfit/io/json_util.hpp"

#include "affordfit/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace affordfit::io {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, what + " is not valid JSON: " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::SchemaError, where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::SchemaError, where + ": missing field '" + key + "'");
  return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be finite");
  return x;
}

int require_int(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

void require_version(const json& doc, const std::string& where) {
  const int version = require_int(doc, "version", where);
  if (version != 1) throw Error(ErrorCode::SchemaError, where + ": unsupported version " + std::to_string(version));
}

namespace {

double number_at(const json& v, std::size_t i, const std::string& where) {
  if (!v[i].is_number()) throw Error(ErrorCode::SchemaError, where + ": expected numbers");
  const double x = v[i].get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::SchemaError, where + ": non-finite value");
  return x;
}

}  // namespace

Vec3 to_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw Error(ErrorCode::SchemaError, where + ": expected [x, y, z]");
  return {number_at(v, 0, where), number_at(v, 1, where), number_at(v, 2, where)};
}

json from_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::vector<Vec3> to_points(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, where + ": expected an array of points");
  std::vector<Vec3> points;
  points.reserve(v.size());
  for (const auto& p : v) points.push_back(to_vec3(p, where));
  return points;
}

json from_points(const std::vector<Vec3>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(from_vec3(p));
  return out;
}

Mat3 to_mat3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 9) throw Error(ErrorCode::SchemaError, where + ": expected 9 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = number_at(v, static_cast<std::size_t>(3 * r + c), where);
  return m;
}

json from_mat3(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

CameraIntrinsics to_intrinsics(const json& v, const std::string& where) {
  CameraIntrinsics k;
  k.fx = require_number(v, "fx", where);
  k.fy = require_number(v, "fy", where);
  k.cx = require_number(v, "cx", where);
  k.cy = require_number(v, "cy", where);
  k.width = require_int(v, "width", where);
  k.height = require_int(v, "height", where);
  k.validate();
  return k;
}

json from_intrinsics(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

std::filesystem::path resolve_path(const std::filesystem::path& anchor, const std::string& relative) {
  const std::filesystem::path p(relative);
  if (p.is_absolute()) return p;
  return anchor.parent_path() / p;
}

}  // namespace affordfit::io
