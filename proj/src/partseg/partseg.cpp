#include "affordfit/partseg/partseg.hpp"

#include "affordfit/error.hpp"
#include "affordfit/geom/kdtree.hpp"
#include "affordfit/io/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace affordfit::partseg {

namespace {

struct Splat {
  bool valid = false;
  int x = 0;
  int y = 0;
  double u = 0.0;  // continuous image coordinates
  double v = 0.0;
  double depth = 0.0;
};

Splat project(const Vec3& world, const ViewObservation& view) {
  const Vec3 cam = view.camera_pose * world;
  Splat s;
  if (!(cam.z() > kMinDepth)) return s;
  const CameraIntrinsics& k = view.intrinsics;
  const double u = k.fx * cam.x() / cam.z() + k.cx;
  const double v = k.fy * cam.y() / cam.z() + k.cy;
  if (!(u >= 0.0 && v >= 0.0 && u < k.width && v < k.height)) return s;
  s.valid = true;
  s.x = static_cast<int>(std::floor(u));
  s.y = static_cast<int>(std::floor(v));
  s.u = u;
  s.v = v;
  s.depth = cam.z();
  return s;
}

double bbox_diagonal(const PointCloud& cloud) {
  Vec3 lo = cloud.points.front();
  Vec3 hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

// z-buffer plus the index of the point that owns each pixel (-1 if none).
struct DepthBuffer {
  int width = 0;
  std::vector<double> depth;
  std::vector<int> owner;
};

// Median distance from a strided sample of points to their nearest other point.
double typical_spacing(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) return 0.0;
  const std::size_t stride = std::max<std::size_t>(1, n / 256);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < n; i += stride) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (cloud.points[i] - cloud.points[j]).squaredNorm();
      if (d > 0.0) best = std::min(best, d);
    }
    if (std::isfinite(best)) gaps.push_back(std::sqrt(best));
  }
  if (gaps.empty()) return 0.0;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

// Fixed half-width when radius > 0, otherwise wide enough that neighbouring
// points' footprints touch at each point's depth.
std::vector<int> footprints(const std::vector<Splat>& splats, const PointCloud& cloud, const CameraIntrinsics& k,
                            int radius) {
  std::vector<int> r(splats.size(), std::max(radius, 0));
  if (radius > 0) return r;
  const double spacing = typical_spacing(cloud);
  const double f = std::max(k.fx, k.fy);
  for (std::size_t i = 0; i < splats.size(); ++i) {
    if (!splats[i].valid) continue;
    r[i] = std::clamp(static_cast<int>(std::ceil(0.75 * spacing * f / splats[i].depth)), 1, 64);
  }
  return r;
}

DepthBuffer rasterize(const std::vector<Splat>& splats, const std::vector<int>& radius, const CameraIntrinsics& k) {
  DepthBuffer buf;
  buf.width = k.width;
  const std::size_t n = static_cast<std::size_t>(k.width) * k.height;
  buf.depth.assign(n, std::numeric_limits<double>::infinity());
  buf.owner.assign(n, -1);
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat& s = splats[i];
    if (!s.valid) continue;
    const int r = radius[i];
    for (int y = std::max(0, s.y - r); y <= std::min(k.height - 1, s.y + r); ++y) {
      for (int x = std::max(0, s.x - r); x <= std::min(k.width - 1, s.x + r); ++x) {
        const std::size_t pix = static_cast<std::size_t>(y) * k.width + x;
        if (s.depth < buf.depth[pix]) {
          buf.depth[pix] = s.depth;
          buf.owner[pix] = static_cast<int>(i);
        }
      }
    }
  }
  return buf;
}

std::vector<Splat> project_all(const PointCloud& cloud, const ViewObservation& view) {
  std::vector<Splat> splats(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) splats[i] = project(cloud.points[i], view);
  return splats;
}

double depth_slack(const Splat& s, int radius, double tolerance, double f) {
  // A flat footprint on a tilted surface sits in front of its neighbours by up
  // to about its own width.
  return tolerance + (2 * radius + 1) * s.depth / f;
}

std::vector<bool> visible_from(const std::vector<Splat>& splats, const std::vector<int>& radius,
                               const DepthBuffer& buf, const CameraIntrinsics& k, double tolerance) {
  const double f = std::max(k.fx, k.fy);
  std::vector<bool> visible(splats.size(), false);
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat& s = splats[i];
    if (!s.valid) continue;
    visible[i] = s.depth <= buf.depth[static_cast<std::size_t>(s.y) * buf.width + s.x] +
                                depth_slack(s, radius[i], tolerance, f);
  }
  return visible;
}

// Each covered pixel goes to the front-surface point whose projection is
// closest to the pixel centre, so part boundaries do not bleed by a footprint.
std::vector<int> nearest_front_owner(const std::vector<Splat>& splats, const std::vector<int>& radius,
                                     const DepthBuffer& buf, const CameraIntrinsics& k, double tolerance) {
  const double f = std::max(k.fx, k.fy);
  std::vector<int> owner(buf.owner.size(), -1);
  std::vector<double> best(buf.owner.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat& s = splats[i];
    if (!s.valid) continue;
    const int r = radius[i];
    const double slack = depth_slack(s, r, tolerance, f);
    for (int y = std::max(0, s.y - r); y <= std::min(k.height - 1, s.y + r); ++y) {
      for (int x = std::max(0, s.x - r); x <= std::min(k.width - 1, s.x + r); ++x) {
        const std::size_t pix = static_cast<std::size_t>(y) * k.width + x;
        if (s.depth > buf.depth[pix] + slack) continue;
        const double du = x + 0.5 - s.u, dv = y + 0.5 - s.v;
        const double d2 = du * du + dv * dv;
        if (d2 < best[pix]) {
          best[pix] = d2;
          owner[pix] = static_cast<int>(i);
        }
      }
    }
  }
  return owner;
}

double resolve_tolerance(const PointCloud& cloud, const SegmentOptions& options) {
  return options.visibility_tolerance > 0.0 ? options.visibility_tolerance : 0.01 * bbox_diagonal(cloud);
}

}  // namespace

std::vector<bool> visibility_mask(const PointCloud& cloud, const ViewObservation& view,
                                  const SegmentOptions& options) {
  if (cloud.empty()) return {};
  view.intrinsics.validate();
  const auto splats = project_all(cloud, view);
  const auto radius = footprints(splats, cloud, view.intrinsics, options.splat_radius);
  const auto buf = rasterize(splats, radius, view.intrinsics);
  return visible_from(splats, radius, buf, view.intrinsics, resolve_tolerance(cloud, options));
}

VoteTally tally_votes(const PointCloud& cloud, const std::vector<ViewObservation>& views,
                      const std::vector<std::string>& parts, const SegmentOptions& options) {
  if (views.empty()) throw Error(ErrorCode::NoViews, "voting needs at least one view");
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot segment an empty cloud");
  const double tolerance = resolve_tolerance(cloud, options);
  const int n = static_cast<int>(cloud.size());
  const int np = static_cast<int>(parts.size());

  VoteTally tally;
  tally.votes.assign(cloud.size(), std::vector<int>(parts.size(), 0));
  for (const auto& view : views) {
    view.intrinsics.validate();
    std::vector<const Bitmap*> masks(parts.size(), nullptr);
    for (int p = 0; p < np; ++p) {
      const auto it = view.masks.find(parts[p]);
      if (it == view.masks.end()) continue;
      if (it->second.width != view.intrinsics.width || it->second.height != view.intrinsics.height) {
        throw Error(ErrorCode::SchemaError, "mask for part '" + parts[p] + "' does not match the image size");
      }
      masks[p] = &it->second;
    }
    const auto splats = project_all(cloud, view);
    const auto radius = footprints(splats, cloud, view.intrinsics, options.splat_radius);
    const auto buf = rasterize(splats, radius, view.intrinsics);
    const auto visible = visible_from(splats, radius, buf, view.intrinsics, tolerance);
    const bool parallel = options.exec == kernels::Exec::parallel;
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n; ++i) {
      if (!visible[i]) continue;
      for (int p = 0; p < np; ++p) {
        if (masks[p] && masks[p]->at(splats[i].x, splats[i].y)) ++tally.votes[i][p];
      }
    }
  }
  return tally;
}

PointCloud vote_labels(const PointCloud& cloud, const std::vector<ViewObservation>& views,
                       const std::vector<std::string>& parts, const SegmentOptions& options) {
  const VoteTally tally = tally_votes(cloud, views, parts, options);
  PointCloud out;
  out.points = cloud.points;
  out.labels.assign(cloud.size(), -1);

  std::vector<Vec3> voted_points;
  std::vector<int> voted_labels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& v = tally.votes[i];
    int best = -1;
    for (std::size_t p = 0; p < v.size(); ++p) {
      if (v[p] > 0 && (best < 0 || v[p] > v[best])) best = static_cast<int>(p);
    }
    out.labels[i] = best;
    if (best >= 0) {
      voted_points.push_back(cloud.points[i]);
      voted_labels.push_back(best);
    }
  }
  if (voted_points.empty()) throw Error(ErrorCode::NoVotes, "no point received a vote from any view");

  const KdTree3 tree(voted_points);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (out.labels[i] < 0) out.labels[i] = voted_labels[tree.nearest(cloud.points[i]).index];
  }
  return out;
}

std::vector<RigidPose> cube_corner_views(const PointCloud& cloud, double distance_factor) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot place views around an empty cloud");
  Vec3 lo = cloud.points.front();
  Vec3 hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double distance = distance_factor * std::max((hi - lo).norm(), 1e-6);
  std::vector<RigidPose> poses;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 dir = Vec3(corner & 1 ? 1 : -1, corner & 2 ? 1 : -1, corner & 4 ? 1 : -1).normalized();
    const Vec3 eye = center + distance * dir;
    const Vec3 z = (center - eye).normalized();
    // Image y points along world +y (the up axis is -y).
    const Vec3 x = Vec3::UnitY().cross(z).normalized();
    const Vec3 y = z.cross(x);
    RigidPose pose;
    pose.rotation.row(0) = x.transpose();
    pose.rotation.row(1) = y.transpose();
    pose.rotation.row(2) = z.transpose();
    pose.translation = -pose.rotation * eye;
    poses.push_back(pose);
  }
  return poses;
}

CameraIntrinsics framing_intrinsics(int size, double distance_factor) {
  // The bounding sphere has radius diag/2 at distance distance_factor * diag.
  const double half_angle = std::atan(0.5 / distance_factor);
  const double f = 0.45 * size / std::tan(half_angle);
  return {f, f, 0.5 * size, 0.5 * size, size, size};
}

ViewObservation render_view(const PointCloud& labeled, const std::vector<std::string>& parts,
                            const CameraIntrinsics& intrinsics, const RigidPose& camera_pose, int splat_radius) {
  if (!labeled.labeled()) throw Error(ErrorCode::SchemaError, "rendering part masks needs a labeled cloud");
  ViewObservation view{intrinsics, camera_pose, {}};
  const auto splats = project_all(labeled, view);
  const auto radius = footprints(splats, labeled, intrinsics, splat_radius);
  const auto buf = rasterize(splats, radius, intrinsics);
  const auto owners = nearest_front_owner(splats, radius, buf, intrinsics, 0.01 * bbox_diagonal(labeled));
  for (const auto& part : parts) view.masks.emplace(part, Bitmap(intrinsics.width, intrinsics.height));
  for (int y = 0; y < intrinsics.height; ++y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      const int owner = owners[static_cast<std::size_t>(y) * intrinsics.width + x];
      if (owner < 0) continue;
      const int label = labeled.labels[owner];
      if (label >= 0 && label < static_cast<int>(parts.size())) view.masks[parts[label]].set(x, y);
    }
  }
  return view;
}

ViewSet read_views(const std::filesystem::path& manifest) {
  const io::json doc = io::load_json(manifest);
  io::require_version(doc, manifest.string());
  ViewSet set;
  const io::json& parts = io::require(doc, "parts", "views manifest");
  if (!parts.is_array()) throw Error(ErrorCode::SchemaError, "views manifest: 'parts' must be an array");
  for (const auto& p : parts) {
    if (!p.is_string()) throw Error(ErrorCode::SchemaError, "views manifest: part names must be strings");
    set.parts.push_back(p.get<std::string>());
  }
  const io::json& views = io::require(doc, "views", "views manifest");
  if (!views.is_array()) throw Error(ErrorCode::SchemaError, "views manifest: 'views' must be an array");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string where = "views[" + std::to_string(i) + "]";
    const io::json& v = views[i];
    ViewObservation view;
    view.intrinsics = io::to_intrinsics(io::require(v, "intrinsics", where), where + ".intrinsics");
    view.camera_pose.rotation = io::to_mat3(io::require(v, "rotation", where), where + ".rotation");
    if (!is_rotation(view.camera_pose.rotation, 1e-5)) {
      throw Error(ErrorCode::SchemaError, where + ": rotation is not orthonormal");
    }
    view.camera_pose.translation = io::to_vec3(io::require(v, "translation", where), where + ".translation");
    const io::json& masks = io::require(v, "masks", where);
    if (!masks.is_object()) throw Error(ErrorCode::SchemaError, where + ": 'masks' must be an object");
    for (const auto& [label, file] : masks.items()) {
      if (std::find(set.parts.begin(), set.parts.end(), label) == set.parts.end()) {
        throw Error(ErrorCode::ReferenceError, where + ": mask for undeclared part '" + label + "'");
      }
      if (!file.is_string()) throw Error(ErrorCode::SchemaError, where + ": mask paths must be strings");
      view.masks.emplace(label, read_png_mask(io::resolve_path(manifest, file.get<std::string>())));
    }
    set.views.push_back(std::move(view));
  }
  return set;
}

void write_views(const std::filesystem::path& manifest, const ViewSet& set) {
  if (manifest.has_parent_path()) std::filesystem::create_directories(manifest.parent_path());
  io::json doc;
  doc["version"] = 1;
  doc["parts"] = set.parts;
  doc["views"] = io::json::array();
  const std::string stem = manifest.stem().string();
  for (std::size_t i = 0; i < set.views.size(); ++i) {
    const auto& view = set.views[i];
    io::json v;
    v["intrinsics"] = io::from_intrinsics(view.intrinsics);
    v["rotation"] = io::from_mat3(view.camera_pose.rotation);
    v["translation"] = io::from_vec3(view.camera_pose.translation);
    v["masks"] = io::json::object();
    for (const auto& [label, mask] : view.masks) {
      const std::string file = stem + "_view" + std::to_string(i) + "_" + label + ".png";
      write_png_mask(manifest.parent_path() / file, mask);
      v["masks"][label] = file;
    }
    doc["views"].push_back(v);
  }
  io::save_json(manifest, doc);
}

}  // namespace affordfit::partseg
