#include "affordfit/pag/pag.hpp"

#include "affordfit/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace affordfit::pag {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 12> kVocabulary = {
    "head",     "torso",     "back",      "hips",     "left_upper_arm", "right_upper_arm",
    "left_hand", "right_hand", "left_leg", "right_leg", "left_foot",      "right_foot"};

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

const json& field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) schema(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

bool bool_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_boolean()) schema(where + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

bool optional_bool(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) schema(where + ": field '" + key + "' must be a boolean");
  return it->get<bool>();
}

const json& array_field(const json& obj, const char* key) {
  const json& v = field(obj, key, "graph");
  if (!v.is_array()) schema(std::string("graph: field '") + key + "' must be an array");
  return v;
}

}  // namespace

const VirtualNode* PartAffordanceGraph::find_virtual(std::string_view id) const {
  for (const auto& v : virtual_nodes)
    if (v.id == id) return &v;
  return nullptr;
}

const PartNode* PartAffordanceGraph::find_part(std::string_view id) const {
  for (const auto& p : part_nodes)
    if (p.id == id) return &p;
  return nullptr;
}

const MotionState* ConstraintSet::motion_of(std::string_view object) const {
  for (const auto& m : motion)
    if (m.object == object) return &m;
  return nullptr;
}

const std::array<std::string_view, 12>& human_part_vocabulary() { return kVocabulary; }

bool is_human_part_label(std::string_view label) {
  return std::find(kVocabulary.begin(), kVocabulary.end(), label) != kVocabulary.end();
}

std::string_view to_string(EntityKind kind) { return kind == EntityKind::object ? "object" : "human"; }
std::string_view to_string(PartKind kind) { return kind == PartKind::object_part ? "object_part" : "human_part"; }

PartAffordanceGraph parse_pag(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, std::string("PAG is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("graph: top level must be an object");

  PartAffordanceGraph g;
  const json& version = field(root, "version", "graph");
  if (!version.is_number_integer()) schema("graph: 'version' must be an integer");
  g.version = version.get<int>();
  if (g.version != 1) schema("graph: unsupported version " + std::to_string(g.version));
  const json& frames = field(root, "frame_count", "graph");
  if (!frames.is_number_integer()) schema("graph: 'frame_count' must be an integer");
  g.frame_count = frames.get<int>();

  const json& vnodes = array_field(root, "virtual_nodes");
  for (std::size_t i = 0; i < vnodes.size(); ++i) {
    const std::string where = "virtual_nodes[" + std::to_string(i) + "]";
    const json& n = vnodes[i];
    if (!n.is_object()) schema(where + ": must be an object");
    VirtualNode v;
    v.id = string_field(n, "id", where);
    const std::string kind = string_field(n, "kind", where);
    if (kind == "object") v.kind = EntityKind::object;
    else if (kind == "human") v.kind = EntityKind::human;
    else schema(where + ": unknown kind '" + kind + "'");
    v.rotates = optional_bool(n, "rotates", where);
    v.translates = optional_bool(n, "translates", where);
    g.virtual_nodes.push_back(v);
  }

  const json& pnodes = array_field(root, "part_nodes");
  for (std::size_t i = 0; i < pnodes.size(); ++i) {
    const std::string where = "part_nodes[" + std::to_string(i) + "]";
    const json& n = pnodes[i];
    if (!n.is_object()) schema(where + ": must be an object");
    PartNode p;
    p.id = string_field(n, "id", where);
    const std::string kind = string_field(n, "kind", where);
    if (kind == "object_part") p.kind = PartKind::object_part;
    else if (kind == "human_part") p.kind = PartKind::human_part;
    else schema(where + ": unknown kind '" + kind + "'");
    p.owner = string_field(n, "owner", where);
    p.label = string_field(n, "label", where);
    if (!g.find_virtual(p.owner)) {
      throw Error(ErrorCode::ReferenceError, where + ": owner '" + p.owner + "' is not a virtual node");
    }
    g.part_nodes.push_back(p);
  }

  const json& edges = array_field(root, "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const json& n = edges[i];
    if (!n.is_object()) schema(where + ": must be an object");
    ContactEdge e;
    e.first = string_field(n, "first", where);
    e.second = string_field(n, "second", where);
    e.continuous = bool_field(n, "continuous", where);
    e.static_contact = bool_field(n, "static", where);
    const PartNode* a = g.find_part(e.first);
    const PartNode* b = g.find_part(e.second);
    if (!a) throw Error(ErrorCode::ReferenceError, where + ": unknown part '" + e.first + "'");
    if (!b) throw Error(ErrorCode::ReferenceError, where + ": unknown part '" + e.second + "'");
    if (a->kind == PartKind::human_part) {
      if (b->kind == PartKind::human_part) {
        schema(where + ": contact edges need an object part; '" + e.first + "' and '" + e.second +
               "' are both human parts");
      }
      std::swap(e.first, e.second);
    }
    g.edges.push_back(e);
  }
  return g;
}

PartAffordanceGraph read_pag(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pag(ss.str());
}

std::string serialize_pag(const PartAffordanceGraph& g) {
  json root;
  root["version"] = g.version;
  root["frame_count"] = g.frame_count;
  root["virtual_nodes"] = json::array();
  for (const auto& v : g.virtual_nodes) {
    json n = {{"id", v.id}, {"kind", std::string(to_string(v.kind))}};
    if (v.kind == EntityKind::object || v.rotates || v.translates) {
      n["rotates"] = v.rotates;
      n["translates"] = v.translates;
    }
    root["virtual_nodes"].push_back(n);
  }
  root["part_nodes"] = json::array();
  for (const auto& p : g.part_nodes) {
    root["part_nodes"].push_back(
        {{"id", p.id}, {"kind", std::string(to_string(p.kind))}, {"owner", p.owner}, {"label", p.label}});
  }
  root["edges"] = json::array();
  for (const auto& e : g.edges) {
    root["edges"].push_back(
        {{"first", e.first}, {"second", e.second}, {"continuous", e.continuous}, {"static", e.static_contact}});
  }
  return root.dump(2);
}

ValidationReport validate_pag(const PartAffordanceGraph& g) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string message) {
    report.push_back({std::move(code), std::move(subject), std::move(message)});
  };

  if (g.version != 1) add("version", "graph", "unsupported version " + std::to_string(g.version));
  if (g.frame_count < 1) add("frame_count", "graph", "frame_count must be positive");
  const bool has_object = std::any_of(g.virtual_nodes.begin(), g.virtual_nodes.end(),
                                      [](const VirtualNode& v) { return v.kind == EntityKind::object; });
  if (!has_object) add("no_object", "graph", "graph has no object virtual node");

  std::set<std::string> seen;
  for (const auto& v : g.virtual_nodes) {
    if (v.id.empty()) add("empty_id", "virtual_node", "virtual node has an empty id");
    else if (!seen.insert(v.id).second) add("duplicate_id", v.id, "id '" + v.id + "' is declared more than once");
    if (v.kind == EntityKind::human && (v.rotates || v.translates))
      add("motion_flags_on_human", v.id, "motion flags are only defined for objects");
  }
  for (const auto& p : g.part_nodes) {
    if (p.id.empty()) add("empty_id", "part_node", "part node has an empty id");
    else if (!seen.insert(p.id).second) add("duplicate_id", p.id, "id '" + p.id + "' is declared more than once");
    const VirtualNode* owner = g.find_virtual(p.owner);
    if (!owner) {
      add("unknown_owner", p.id, "owner '" + p.owner + "' is not a virtual node");
    } else {
      const bool matches = (owner->kind == EntityKind::object) == (p.kind == PartKind::object_part);
      if (!matches) add("owner_kind_mismatch", p.id, "part kind does not match owner '" + p.owner + "'");
    }
    if (p.label.empty()) add("empty_label", p.id, "part has an empty label");
    else if (p.kind == PartKind::human_part && !is_human_part_label(p.label))
      add("vocabulary", p.id, "'" + p.label + "' is not in the human body-part vocabulary");
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    const std::string subject = "edge[" + std::to_string(i) + "]";
    const PartNode* a = g.find_part(e.first);
    const PartNode* b = g.find_part(e.second);
    if (!a || !b) {
      add("dangling_endpoint", subject, "edge endpoint '" + (!a ? e.first : e.second) + "' does not exist");
      continue;
    }
    if (e.first == e.second) {
      add("self_edge", subject, "edge connects '" + e.first + "' to itself");
      continue;
    }
    if (a->kind != PartKind::object_part) add("edge_orientation", subject, "first endpoint must be an object part");
    if (!pairs.insert(std::minmax(e.first, e.second)).second)
      add("duplicate_edge", subject, "edge between '" + e.first + "' and '" + e.second + "' is repeated");
  }
  return report;
}

ConstraintSet resolve_constraints(const PartAffordanceGraph& g, const SceneBinding& scene) {
  const ValidationReport report = validate_pag(g);
  if (!report.empty()) {
    throw Error(ErrorCode::ValidationError,
                "graph is invalid: " + report.front().code + " (" + report.front().subject + ")");
  }

  auto has_label = [](const std::map<std::string, std::vector<std::string>>& m, const std::string& owner,
                      const std::string& label) {
    const auto it = m.find(owner);
    return it != m.end() && std::find(it->second.begin(), it->second.end(), label) != it->second.end();
  };
  for (const auto& p : g.part_nodes) {
    const bool bound = p.kind == PartKind::object_part ? has_label(scene.object_parts, p.owner, p.label)
                                                       : has_label(scene.human_parts, p.owner, p.label);
    if (!bound) {
      throw Error(ErrorCode::BindingError, p.label);
    }
  }

  auto ref = [&](const std::string& node_id) {
    const PartNode* p = g.find_part(node_id);
    return PartRef{p->kind == PartKind::object_part ? EntityKind::object : EntityKind::human, p->owner, p->label,
                   p->id};
  };

  ConstraintSet set;
  for (const auto& e : g.edges) {
    set.contacts.push_back({ref(e.first), ref(e.second), e.continuous, e.static_contact});
  }
  for (const auto& v : g.virtual_nodes) {
    if (v.kind == EntityKind::object) set.motion.push_back({v.id, v.rotates, v.translates});
  }
  return set;
}

}  // namespace affordfit::pag
