#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace affordfit::pag {

enum class EntityKind { object, human };
enum class PartKind { object_part, human_part };

/// Parent node standing for a whole object or human. Motion flags are only
/// meaningful for objects; both false means the object never moves.
struct VirtualNode {
  std::string id;
  EntityKind kind = EntityKind::object;
  bool rotates = false;
  bool translates = false;

  bool operator==(const VirtualNode&) const = default;
};

struct PartNode {
  std::string id;
  PartKind kind = PartKind::object_part;
  std::string owner;  // id of the parent VirtualNode
  std::string label;  // segmentation label or body-part name

  bool operator==(const PartNode&) const = default;
};

/// Required contact between two parts. `first` is always an object part.
struct ContactEdge {
  std::string first;
  std::string second;
  bool continuous = false;      // contact holds on every frame
  bool static_contact = false;  // contacting parts do not slide relative to each other

  bool operator==(const ContactEdge&) const = default;
};

struct PartAffordanceGraph {
  int version = 1;
  int frame_count = 0;
  std::vector<VirtualNode> virtual_nodes;
  std::vector<PartNode> part_nodes;
  std::vector<ContactEdge> edges;

  const VirtualNode* find_virtual(std::string_view id) const;
  const PartNode* find_part(std::string_view id) const;
  bool operator==(const PartAffordanceGraph&) const = default;
};

/// The fixed body-part vocabulary human part labels must come from.
const std::array<std::string_view, 12>& human_part_vocabulary();
bool is_human_part_label(std::string_view label);

/// Parses the versioned JSON form. Edges listed human-part-first are reoriented
/// so the object part comes first. Throws SyntaxError, SchemaError (missing
/// field, unknown enum, object-less human/human edge) or ReferenceError
/// (dangling id).
PartAffordanceGraph parse_pag(std::string_view text);
PartAffordanceGraph read_pag(const std::string& path);
std::string serialize_pag(const PartAffordanceGraph& graph);

struct Violation {
  std::string code;     // e.g. "duplicate_id", "vocabulary"
  std::string subject;  // offending node or edge id
  std::string message;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Every invariant violation, in a fixed order: graph-level checks, then
/// virtual nodes, part nodes and edges in declaration order.
ValidationReport validate_pag(const PartAffordanceGraph& graph);

/// Geometry available for binding: object id -> segmented part labels, and
/// human id -> body-part labels present in its motion sequence.
struct SceneBinding {
  std::map<std::string, std::vector<std::string>> object_parts;
  std::map<std::string, std::vector<std::string>> human_parts;
};

struct PartRef {
  EntityKind entity = EntityKind::object;
  std::string owner;  // object or human id
  std::string label;
  std::string node;   // part node id
};

struct ContactConstraint {
  PartRef first;   // always an object part
  PartRef second;  // object or human part
  bool continuous = false;
  bool static_contact = false;
};

struct MotionState {
  std::string object;
  bool rotates = false;
  bool translates = false;
};

struct ConstraintSet {
  std::vector<ContactConstraint> contacts;
  std::vector<MotionState> motion;  // one per object virtual node

  const MotionState* motion_of(std::string_view object) const;
};

/// Throws ValidationError for an invalid graph and BindingError naming the
/// first part whose geometry is missing from `scene`.
ConstraintSet resolve_constraints(const PartAffordanceGraph& graph, const SceneBinding& scene);

std::string_view to_string(EntityKind kind);
std::string_view to_string(PartKind kind);

}  // namespace affordfit::pag
