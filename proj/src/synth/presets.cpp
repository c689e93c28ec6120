#include "affordfit/error.hpp"
#include "affordfit/synth/synth.hpp"

#include <algorithm>

namespace affordfit::synth {
namespace {

Primitive box(const std::string& part, const Vec3& center, const Vec3& size, double spacing = 0.0) {
  Primitive p;
  p.part = part;
  p.shape = Shape::box;
  p.center = center;
  p.size = size;
  p.spacing = spacing;
  return p;
}

// Carry box with an off-centre handle and a side latch: no rotational symmetry.
ObjectSpec toolbox() {
  ObjectSpec o;
  o.id = "toolbox";
  o.spacing = 0.05;
  o.primitives = {box("body", {0.0, 0.0, 0.0}, {0.36, 0.20, 0.22}),
                  box("handle", {0.0, -0.13, 0.04}, {0.16, 0.03, 0.03}, 0.015),
                  box("latch", {0.19, -0.04, 0.0}, {0.02, 0.06, 0.08}, 0.015)};
  return o;
}

ObjectSpec briefcase() {
  ObjectSpec o;
  o.id = "briefcase";
  o.spacing = 0.05;
  o.primitives = {box("body", {0.0, 0.0, 0.0}, {0.45, 0.32, 0.12}),
                  box("handle", {0.0, -0.2, 0.03}, {0.14, 0.025, 0.025}, 0.015)};
  return o;
}

void add_object(pag::PartAffordanceGraph& g, const ObjectSpec& o, bool rotates, bool translates) {
  g.virtual_nodes.push_back({o.id, pag::EntityKind::object, rotates, translates});
  std::vector<std::string> seen;
  for (const auto& p : o.primitives) {
    if (std::find(seen.begin(), seen.end(), p.part) != seen.end()) continue;
    seen.push_back(p.part);
    g.part_nodes.push_back({o.id + "_" + p.part, pag::PartKind::object_part, o.id, p.part});
  }
}

ScenarioSpec single_object(ObjectSpec o, bool rotates, bool translates) {
  ScenarioSpec s;
  s.seed = 7;
  s.pag.frame_count = s.frame_count;
  add_object(s.pag, o, rotates, translates);
  s.objects.push_back(std::move(o));
  return s;
}

ScenarioSpec hand_follow_scene() {
  ScenarioSpec s;
  s.seed = 7;
  ObjectSpec o = briefcase();
  o.trajectory.family = Family::hand_follow;
  o.trajectory.follow = "h0_right_hand";
  o.trajectory.yaw = 90.0;
  HumanSpec h;
  h.id = "h0";
  h.start = Vec3(0.45, -0.1, 3.0);
  h.end = Vec3(-0.45, -0.1, 3.0);
  h.yaw = h.yaw_end = 90.0;
  s.pag.frame_count = s.frame_count;
  add_object(s.pag, o, false, true);
  s.pag.virtual_nodes.push_back({"h0", pag::EntityKind::human, false, false});
  s.pag.part_nodes.push_back({"h0_right_hand", pag::PartKind::human_part, "h0", "right_hand"});
  s.pag.edges.push_back({"briefcase_handle", "h0_right_hand", true, true});
  s.objects.push_back(std::move(o));
  s.humans.push_back(std::move(h));
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"stationary", "linear", "circular_arc", "hand_follow", "hand_follow_ablation", "two_part_box",
          "four_part_box"};
}

ScenarioSpec preset(const std::string& name) {
  if (name == "stationary") {
    ObjectSpec o = toolbox();
    o.trajectory.family = Family::stationary;
    o.trajectory.start = Vec3(0.1, 0.1, 2.5);
    o.trajectory.yaw = 30.0;
    return single_object(std::move(o), false, false);
  }
  if (name == "linear") {
    ObjectSpec o = toolbox();
    o.trajectory.family = Family::linear;
    o.trajectory.start = Vec3(-0.4, 0.1, 2.4);
    o.trajectory.end = Vec3(0.4, 0.0, 2.8);
    o.trajectory.yaw = 10.0;
    o.trajectory.yaw_end = 70.0;
    return single_object(std::move(o), true, true);
  }
  if (name == "circular_arc") {
    ObjectSpec o = toolbox();
    o.trajectory.family = Family::circular_arc;
    o.trajectory.center = Vec3(0.0, 0.1, 2.6);
    o.trajectory.radius = 0.4;
    o.trajectory.angle_start = 0.0;
    o.trajectory.angle_end = 120.0;
    o.trajectory.yaw = 90.0;
    return single_object(std::move(o), true, true);
  }
  if (name == "hand_follow") return hand_follow_scene();
  if (name == "hand_follow_ablation") {
    ScenarioSpec s = hand_follow_scene();
    s.noise.sigma = 0.01;
    s.noise.mask_dilation = 1;
    s.noise.dropout = 0.3;
    s.noise.offset = 0.01;
    return s;
  }
  if (name == "two_part_box" || name == "four_part_box") {
    ObjectSpec o;
    o.id = name == "two_part_box" ? "box2" : "box4";
    o.spacing = 0.02;
    if (name == "two_part_box") {
      o.primitives = {box("left", {-0.1, 0.0, 0.0}, {0.2, 0.3, 0.3}), box("right", {0.1, 0.0, 0.0}, {0.2, 0.3, 0.3})};
    } else {
      const char* labels[] = {"a", "b", "c", "d"};
      for (int k = 0; k < 4; ++k) {
        const Vec3 c((k & 1) ? 0.1 : -0.1, 0.0, (k & 2) ? 0.1 : -0.1);
        o.primitives.push_back(box(labels[k], c, {0.2, 0.3, 0.2}));
      }
    }
    o.trajectory.start = Vec3(0.0, 0.0, 2.5);
    return single_object(std::move(o), false, false);
  }
  throw Error(ErrorCode::SchemaError, "unknown scenario preset '" + name + "'");
}

}  // namespace affordfit::synth
