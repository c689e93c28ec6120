#pragma once

#include "affordfit/geom/camera.hpp"
#include "affordfit/geom/rotation.hpp"
#include "affordfit/io/png.hpp"
#include "affordfit/kernels/nearest.hpp"
#include "affordfit/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace affordfit::partseg {

struct ViewObservation {
  CameraIntrinsics intrinsics;
  RigidPose camera_pose;  // world-to-camera
  std::map<std::string, Bitmap> masks;
};

/// votes[point][part] counts, parts in caller order.
struct VoteTally {
  std::vector<std::vector<int>> votes;
};

struct SegmentOptions {
  /// Half-width in pixels of the square footprint each point writes into the
  /// z-buffer; <= 0 sizes it per point from the cloud's spacing and the depth.
  int splat_radius = 0;
  /// Depth slack for the visibility test; <= 0 means 1% of the cloud's bounding-box diagonal.
  double visibility_tolerance = 0.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

/// A point is visible when it projects inside the image in front of the camera
/// and its depth is within tolerance of the z-buffer at its pixel.
std::vector<bool> visibility_mask(const PointCloud& cloud, const ViewObservation& view,
                                  const SegmentOptions& options = {});

VoteTally tally_votes(const PointCloud& cloud, const std::vector<ViewObservation>& views,
                      const std::vector<std::string>& parts, const SegmentOptions& options = {});

/// Argmax of the tally with ties going to the earlier part; points without
/// votes take the label of their nearest voted neighbour. Labels index `parts`.
/// Throws NoViews, EmptyCloud, or NoVotes when no point received a vote.
PointCloud vote_labels(const PointCloud& cloud, const std::vector<ViewObservation>& views,
                       const std::vector<std::string>& parts, const SegmentOptions& options = {});

/// World-to-camera poses looking at the cloud centre from the 8 cube-corner
/// directions, at `distance_factor` bounding-box diagonals from the centre.
std::vector<RigidPose> cube_corner_views(const PointCloud& cloud, double distance_factor = 2.0);

/// Square intrinsics framing the cloud from `distance_factor` diagonals away.
CameraIntrinsics framing_intrinsics(int size, double distance_factor = 2.0);

/// Splats a labeled cloud (footprints as in SegmentOptions::splat_radius) and
/// emits one mask per part from the front-most point at each pixel.
ViewObservation render_view(const PointCloud& labeled, const std::vector<std::string>& parts,
                            const CameraIntrinsics& intrinsics, const RigidPose& camera_pose,
                            int splat_radius = 0);

/// {"version":1,"parts":[...],"views":[{"intrinsics":{...},"rotation":[9],
/// "translation":[3],"masks":{"part":"file.png"}}]}; mask paths are relative
/// to the manifest.
struct ViewSet {
  std::vector<std::string> parts;
  std::vector<ViewObservation> views;
};
ViewSet read_views(const std::filesystem::path& manifest);
void write_views(const std::filesystem::path& manifest, const ViewSet& set);

}  // namespace affordfit::partseg
