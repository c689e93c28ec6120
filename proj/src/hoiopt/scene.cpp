#include "affordfit/hoiopt/scene.hpp"

#include "affordfit/error.hpp"

#include <algorithm>
#include <cmath>

namespace affordfit::hoiopt {

namespace {

bool finite(const Vec3& p) { return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z()); }

void check_points(const std::vector<Vec3>& points, const std::string& where) {
  for (const auto& p : points) {
    if (!finite(p)) throw Error(ErrorCode::SchemaError, where + ": non-finite coordinate");
  }
}

}  // namespace

int ObjectModel::part_index(const std::string& label) const {
  const auto it = std::find(parts.begin(), parts.end(), label);
  return it == parts.end() ? -1 : static_cast<int>(it - parts.begin());
}

bool FrameObservation::empty() const {
  auto all_empty = [](const auto& m) {
    return std::all_of(m.begin(), m.end(), [](const auto& kv) { return kv.second.empty(); });
  };
  return cloud.empty() && mask.empty() && all_empty(part_clouds) && all_empty(part_masks);
}

void ObservationBundle::validate() const {
  if (objects.empty()) return;
  intrinsics.validate();
  for (const auto& [id, frames] : objects) {
    if (static_cast<int>(frames.size()) != frame_count) {
      throw Error(ErrorCode::FrameCountMismatch, "observations for '" + id + "' have " +
                                                     std::to_string(frames.size()) + " frames, expected " +
                                                     std::to_string(frame_count));
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const std::string where = "observations['" + id + "'][" + std::to_string(t) + "]";
      const auto& f = frames[t];
      check_points(f.cloud, where);
      for (const auto& [label, pts] : f.part_clouds) check_points(pts, where + "." + label);
      auto check_pixels = [&](const std::vector<Vec2>& pixels, const std::string& what) {
        for (const auto& px : pixels) {
          if (!intrinsics.contains(px)) throw Error(ErrorCode::SchemaError, what + ": mask pixel outside the image");
        }
      };
      check_pixels(f.mask, where);
      for (const auto& [label, px] : f.part_masks) check_pixels(px, where + "." + label);
    }
  }
}

std::vector<std::string> HumanMotionSequence::part_labels() const {
  std::vector<std::string> labels;
  if (frames.empty()) return labels;
  for (const auto& [label, pts] : frames.front().parts) labels.push_back(label);
  return labels;
}

void HumanMotionSequence::validate() const {
  if (frames.empty()) throw Error(ErrorCode::TooFewFrames, "human '" + id + "' has no frames");
  const HumanFrame& ref = frames.front();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const HumanFrame& f = frames[t];
    const std::string where = "human '" + id + "' frame " + std::to_string(t);
    if (f.joints.size() != ref.joints.size()) throw Error(ErrorCode::SchemaError, where + ": joint count changes");
    if (f.parts.size() != ref.parts.size()) throw Error(ErrorCode::SchemaError, where + ": part set changes");
    for (const auto& [label, pts] : ref.parts) {
      const auto it = f.parts.find(label);
      if (it == f.parts.end()) throw Error(ErrorCode::SchemaError, where + ": missing part '" + label + "'");
      if (it->second.size() != pts.size())
        throw Error(ErrorCode::SchemaError, where + ": point count of '" + label + "' changes");
      check_points(it->second, where);
    }
    check_points(f.joints, where);
    check_points(f.vertices, where);
  }
}

void LossWeights::validate() const {
  for (double w : {fit, contact, penetration, smooth}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::SchemaError, "loss weights must be finite and >= 0");
  }
  if (fit + contact + penetration + smooth <= 0.0) {
    throw Error(ErrorCode::SchemaError, "at least one loss weight must be positive");
  }
}

const ObjectModel* Scene::find_object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const HumanMotionSequence* Scene::find_human(const std::string& id) const {
  for (const auto& h : humans)
    if (h.id == id) return &h;
  return nullptr;
}

pag::SceneBinding Scene::binding() const {
  pag::SceneBinding b;
  for (const auto& o : objects) {
    std::vector<bool> present(o.parts.size(), false);
    for (int label : o.cloud.labels)
      if (label >= 0 && label < static_cast<int>(present.size())) present[label] = true;
    auto& labels = b.object_parts[o.id];
    for (std::size_t i = 0; i < o.parts.size(); ++i)
      if (present[i]) labels.push_back(o.parts[i]);
  }
  for (const auto& h : humans) {
    auto& labels = b.human_parts[h.id];
    if (h.frames.empty()) continue;
    for (const auto& [label, pts] : h.frames.front().parts)
      if (!pts.empty()) labels.push_back(label);
  }
  return b;
}

pag::ConstraintSet Scene::validate() const {
  const auto report = pag::validate_pag(pag);
  if (!report.empty()) {
    throw Error(ErrorCode::ValidationError, "graph is invalid: " + report.front().code + " (" +
                                                report.front().subject + ")");
  }
  const int frames = pag.frame_count;
  for (const auto& v : pag.virtual_nodes) {
    if (v.kind == pag::EntityKind::object && !find_object(v.id)) {
      throw Error(ErrorCode::BindingError, v.id);
    }
    if (v.kind == pag::EntityKind::human && !find_human(v.id)) {
      throw Error(ErrorCode::BindingError, v.id);
    }
  }
  for (const auto& o : objects) {
    const pag::VirtualNode* node = pag.find_virtual(o.id);
    if (!node || node->kind != pag::EntityKind::object) {
      throw Error(ErrorCode::ReferenceError, "object '" + o.id + "' is not an object node of the graph");
    }
    check_cloud(o.cloud);
    if (!o.cloud.labeled()) throw Error(ErrorCode::SchemaError, "object '" + o.id + "' cloud has no part labels");
    for (int label : o.cloud.labels) {
      if (label < 0 || label >= static_cast<int>(o.parts.size())) {
        throw Error(ErrorCode::SchemaError, "object '" + o.id + "' has a point label outside its part list");
      }
    }
    if (o.sdf) o.sdf->validate();
  }
  for (const auto& h : humans) {
    h.validate();
    if (h.frame_count() != frames) {
      throw Error(ErrorCode::FrameCountMismatch, "human '" + h.id + "' has " + std::to_string(h.frame_count()) +
                                                     " frames, graph expects " + std::to_string(frames));
    }
  }
  if (!observations.objects.empty() && observations.frame_count != frames) {
    throw Error(ErrorCode::FrameCountMismatch, "observations have " + std::to_string(observations.frame_count) +
                                                   " frames, graph expects " + std::to_string(frames));
  }
  observations.validate();
  for (const auto& [id, per_frame] : observations.objects) {
    const ObjectModel* o = find_object(id);
    if (!o) throw Error(ErrorCode::ReferenceError, "observations name unknown object '" + id + "'");
    for (const auto& f : per_frame) {
      for (const auto& [label, pts] : f.part_clouds)
        if (o->part_index(label) < 0)
          throw Error(ErrorCode::ReferenceError, "observation part '" + label + "' is not a part of '" + id + "'");
      for (const auto& [label, px] : f.part_masks)
        if (o->part_index(label) < 0)
          throw Error(ErrorCode::ReferenceError, "observation part '" + label + "' is not a part of '" + id + "'");
    }
  }
  return pag::resolve_constraints(pag, binding());
}

}  // namespace affordfit::hoiopt
