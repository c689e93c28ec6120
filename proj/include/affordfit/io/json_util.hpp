#pragma once
// nlohmann::json helpers shared by the file-format readers. Every accessor
// raises SchemaError with the offending key instead of a json exception.

#include "affordfit/geom/camera.hpp"
#include "affordfit/geom/rotation.hpp"
#include "affordfit/types.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace affordfit::io {

using nlohmann::json;

json load_json(const std::filesystem::path& path);
json parse_json(const std::string& text, const std::string& what);
/// Writes `doc.dump(2)` plus a trailing newline.
void save_json(const std::filesystem::path& path, const json& doc);

const json& require(const json& obj, const std::string& key, const std::string& where);
double require_number(const json& obj, const std::string& key, const std::string& where);
int require_int(const json& obj, const std::string& key, const std::string& where);
std::string require_string(const json& obj, const std::string& key, const std::string& where);
void require_version(const json& doc, const std::string& where);

Vec3 to_vec3(const json& v, const std::string& where);
json from_vec3(const Vec3& v);
std::vector<Vec3> to_points(const json& v, const std::string& where);
json from_points(const std::vector<Vec3>& points);
/// Row-major 9-element array.
Mat3 to_mat3(const json& v, const std::string& where);
json from_mat3(const Mat3& m);

CameraIntrinsics to_intrinsics(const json& v, const std::string& where);
json from_intrinsics(const CameraIntrinsics& k);

/// Resolves `relative` against the directory holding `anchor`.
std::filesystem::path resolve_path(const std::filesystem::path& anchor, const std::string& relative);

}  // namespace affordfit::io
