#include "affordfit/error.hpp"
#include "affordfit/pag/pag.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <functional>
#include <set>

using namespace affordfit;
using namespace affordfit::pag;

namespace {

const std::string kData = AFFORDFIT_TEST_DATA;

PartAffordanceGraph iron_board() { return read_pag(kData + "/iron_board_pag.json"); }

ErrorCode parse_error(const std::string& text) {
  try {
    parse_pag(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected parse failure");
  return ErrorCode::IoError;
}

PartAffordanceGraph two_person() {
  PartAffordanceGraph g;
  g.frame_count = 5;
  g.virtual_nodes = {{"sofa", EntityKind::object, false, false},
                     {"alice", EntityKind::human},
                     {"bob", EntityKind::human}};
  g.part_nodes = {{"seat", PartKind::object_part, "sofa", "seat"},
                  {"arm", PartKind::object_part, "sofa", "armrest"},
                  {"alice_hips", PartKind::human_part, "alice", "hips"},
                  {"bob_hips", PartKind::human_part, "bob", "hips"},
                  {"bob_hand", PartKind::human_part, "bob", "left_hand"}};
  g.edges = {{"seat", "alice_hips", true, true}, {"seat", "bob_hips", true, true}, {"arm", "bob_hand", false, false}};
  return g;
}

}  // namespace

TEST_CASE("minimal graph") {
  const auto g = parse_pag(R"({"version":1,"frame_count":3,
    "virtual_nodes":[{"id":"o","kind":"object","rotates":false,"translates":true}],
    "part_nodes":[{"id":"o_body","kind":"object_part","owner":"o","label":"body"}],
    "edges":[]})");
  CHECK(g.virtual_nodes.size() == 1);
  CHECK(g.edges.empty());
  CHECK(g.virtual_nodes[0].translates);
  CHECK_FALSE(g.virtual_nodes[0].rotates);
  CHECK(validate_pag(g).empty());
}

TEST_CASE("iron and board graph edge attributes") {
  const auto g = iron_board();
  REQUIRE(g.edges.size() == 2);
  // Listed hand-first; stored object-part-first.
  CHECK(g.edges[0].first == "iron_grip");
  CHECK(g.edges[0].second == "person_right_hand");
  CHECK(g.edges[0].continuous);
  CHECK(g.edges[0].static_contact);
  CHECK(g.edges[1].first == "board_panel");
  CHECK(g.edges[1].second == "iron_soleplate");
  CHECK(g.edges[1].continuous);
  CHECK_FALSE(g.edges[1].static_contact);
  CHECK(validate_pag(g).empty());
}

TEST_CASE("parse errors") {
  CHECK(parse_error("{\"version\": 1,") == ErrorCode::SyntaxError);
  CHECK(parse_error(R"({"version":1,"virtual_nodes":[],"part_nodes":[],"edges":[]})") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"version":1,"frame_count":2,"virtual_nodes":[{"id":"o","kind":"robot"}],
    "part_nodes":[],"edges":[]})") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"version":1,"frame_count":2,"virtual_nodes":[{"id":"o","kind":"object"}],
    "part_nodes":[{"id":"p","kind":"object_part","owner":"ghost","label":"x"}],"edges":[]})") ==
        ErrorCode::ReferenceError);
  CHECK(parse_error(R"({"version":1,"frame_count":2,"virtual_nodes":[{"id":"o","kind":"object"}],
    "part_nodes":[{"id":"p","kind":"object_part","owner":"o","label":"x"}],
    "edges":[{"first":"p","second":"q","continuous":true,"static":true}]})") == ErrorCode::ReferenceError);
  // Human part first with no object part in the edge.
  CHECK(parse_error(R"({"version":1,"frame_count":2,
    "virtual_nodes":[{"id":"o","kind":"object"},{"id":"h","kind":"human"}],
    "part_nodes":[{"id":"p","kind":"object_part","owner":"o","label":"x"},
                  {"id":"l","kind":"human_part","owner":"h","label":"left_hand"},
                  {"id":"r","kind":"human_part","owner":"h","label":"right_hand"}],
    "edges":[{"first":"l","second":"r","continuous":true,"static":true}]})") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"version":1,"frame_count":2,"virtual_nodes":[{"id":"o","kind":"object"}],
    "part_nodes":[{"id":"p","kind":"object_part","owner":"o","label":"x"},
                  {"id":"q","kind":"object_part","owner":"o","label":"y"}],
    "edges":[{"first":"p","second":"q","continuous":"yes","static":true}]})") == ErrorCode::SchemaError);
}

TEST_CASE("serialize round trip") {
  for (const auto& g : {iron_board(), two_person()}) {
    const auto back = parse_pag(serialize_pag(g));
    CHECK(back == g);
  }
}

TEST_CASE("vocabulary") {
  const auto& vocab = human_part_vocabulary();
  std::set<std::string_view> unique(vocab.begin(), vocab.end());
  CHECK(unique.size() == 12);
  for (auto label : {"head", "torso", "back", "hips", "left_upper_arm", "right_upper_arm", "left_hand", "right_hand",
                     "left_leg", "right_leg", "left_foot", "right_foot"}) {
    CHECK(is_human_part_label(label));
  }
  CHECK_FALSE(is_human_part_label("index_finger"));
  const auto g = read_pag(kData + "/bad_vocabulary_pag.json");
  const auto report = validate_pag(g);
  REQUIRE(report.size() == 1);
  CHECK(report[0].code == "vocabulary");
  CHECK(report[0].subject == "person_finger");
}

TEST_CASE("each invariant is triggered by a single mutation") {
  struct Mutation {
    std::string name;
    std::function<void(PartAffordanceGraph&)> apply;
    std::string code;
    std::string subject;
  };
  const std::vector<Mutation> mutations = {
      {"frame count", [](auto& g) { g.frame_count = 0; }, "frame_count", "graph"},
      {"version", [](auto& g) { g.version = 2; }, "version", "graph"},
      {"duplicate part", [](auto& g) { g.part_nodes[3].id = "iron_grip"; }, "duplicate_id", "iron_grip"},
      {"duplicate virtual", [](auto& g) { g.virtual_nodes.push_back(g.virtual_nodes[0]); }, "duplicate_id", "iron"},
      {"flags on human", [](auto& g) { g.virtual_nodes[2].rotates = true; }, "motion_flags_on_human", "person"},
      {"owner kind", [](auto& g) { g.part_nodes[4].owner = "board"; }, "owner_kind_mismatch", "person_right_hand"},
      {"empty label", [](auto& g) { g.part_nodes[3].label = ""; }, "empty_label", "board_legs"},
      {"vocabulary", [](auto& g) { g.part_nodes[4].label = "thumb"; }, "vocabulary", "person_right_hand"},
      {"orientation", [](auto& g) { std::swap(g.edges[0].first, g.edges[0].second); }, "edge_orientation", ""},
      {"self edge", [](auto& g) { g.edges[1].second = "board_panel"; }, "self_edge", ""},
      {"duplicate edge", [](auto& g) { g.edges.push_back({"iron_soleplate", "board_panel", false, false}); },
       "duplicate_edge", ""},
      {"dangling", [](auto& g) { g.edges[1].second = "iron_cord"; }, "dangling_endpoint", ""},
  };
  for (const auto& m : mutations) {
    CAPTURE(m.name);
    auto g = iron_board();
    m.apply(g);
    const auto report = validate_pag(g);
    REQUIRE(report.size() == 1);
    CHECK(report[0].code == m.code);
    if (!m.subject.empty()) CHECK(report[0].subject == m.subject);
    CHECK(validate_pag(g) == report);
  }
  auto g = iron_board();
  g.virtual_nodes.erase(g.virtual_nodes.begin(), g.virtual_nodes.begin() + 2);
  g.part_nodes.erase(g.part_nodes.begin(), g.part_nodes.begin() + 4);
  g.edges.clear();
  const auto report = validate_pag(g);
  REQUIRE(report.size() == 1);
  CHECK(report[0].code == "no_object");
}

TEST_CASE("resolve constraints") {
  const auto g = iron_board();
  SceneBinding bind;
  bind.object_parts["iron"] = {"hand grip", "soleplate"};
  bind.object_parts["board"] = {"top flat panel", "legs"};
  bind.human_parts["person"] = {"right_hand", "left_hand"};
  const auto set = resolve_constraints(g, bind);
  CHECK(set.contacts.size() == 2);
  CHECK(set.motion.size() == 2);
  REQUIRE(set.motion_of("iron"));
  CHECK(set.motion_of("iron")->rotates);
  CHECK_FALSE(set.motion_of("board")->translates);
  for (const auto& c : set.contacts) CHECK(c.first.entity == EntityKind::object);
  CHECK(set.contacts[0].second.entity == EntityKind::human);
  CHECK(set.contacts[0].second.owner == "person");

  bind.object_parts["iron"] = {"hand grip"};
  try {
    resolve_constraints(g, bind);
    FAIL("expected BindingError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BindingError);
    CHECK(std::string(e.what()).find("soleplate") != std::string::npos);
  }

  auto bad = g;
  bad.frame_count = 0;
  CHECK_THROWS_AS(resolve_constraints(bad, bind), Error);
}

TEST_CASE("multi-person routing") {
  const auto g = two_person();
  REQUIRE(validate_pag(g).empty());
  SceneBinding bind;
  bind.object_parts["sofa"] = {"seat", "armrest"};
  bind.human_parts["alice"] = {"hips"};
  bind.human_parts["bob"] = {"hips", "left_hand"};
  const auto set = resolve_constraints(g, bind);
  REQUIRE(set.contacts.size() == g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const PartNode* node = g.find_part(g.edges[i].second);
    CHECK(set.contacts[i].second.owner == node->owner);
    CHECK(set.contacts[i].second.label == node->label);
    CHECK(set.contacts[i].second.node == node->id);
    CHECK(set.contacts[i].first.owner == "sofa");
  }
  bind.human_parts.erase("alice");
  CHECK_THROWS_AS(resolve_constraints(g, bind), Error);
}
