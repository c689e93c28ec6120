#pragma once

#include "affordfit/geom/camera.hpp"
#include "affordfit/geom/sdf.hpp"
#include "affordfit/pag/pag.hpp"
#include "affordfit/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affordfit::hoiopt {

/// Canonical-frame object geometry. cloud.labels index `parts`.
struct ObjectModel {
  std::string id;
  std::vector<std::string> parts;
  PointCloud cloud;
  std::optional<SdfGrid> sdf;

  int part_index(const std::string& label) const;
};

/// Evidence for one object at one frame. Mask pixels are continuous image
/// coordinates (pixel centres for rasterized masks). Any member may be empty.
struct FrameObservation {
  std::vector<Vec3> cloud;
  std::map<std::string, std::vector<Vec3>> part_clouds;
  std::vector<Vec2> mask;
  std::map<std::string, std::vector<Vec2>> part_masks;

  bool empty() const;
};

struct ObservationBundle {
  CameraIntrinsics intrinsics;
  int frame_count = 0;
  /// object id -> one entry per frame.
  std::map<std::string, std::vector<FrameObservation>> objects;

  void validate() const;
};

struct HumanFrame {
  std::vector<Vec3> joints;
  std::map<std::string, std::vector<Vec3>> parts;
  std::vector<Vec3> vertices;
};

struct HumanMotionSequence {
  std::string id;
  std::vector<HumanFrame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  std::vector<std::string> part_labels() const;
  /// Joint count, part set and per-part point counts must agree across frames.
  void validate() const;
};

struct LossWeights {
  double fit = 1.0;
  double contact = 1.0;
  double penetration = 10.0;
  double smooth = 0.1;

  void validate() const;
};

struct Scene {
  pag::PartAffordanceGraph pag;
  std::vector<ObjectModel> objects;
  ObservationBundle observations;
  std::vector<HumanMotionSequence> humans;

  int frame_count() const { return pag.frame_count; }
  const ObjectModel* find_object(const std::string& id) const;
  const HumanMotionSequence* find_human(const std::string& id) const;
  pag::SceneBinding binding() const;
  /// Graph validity, frame counts, bindings and observation keys. Returns the
  /// resolved constraints.
  pag::ConstraintSet validate() const;
};

}  // namespace affordfit::hoiopt
