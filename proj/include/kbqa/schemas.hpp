#pragma once
// The eight predefined query-graph shapes, their instantiation against linked
// topic entities, and verbalization of (possibly partial) query paths into the
// sentence forms scored against the question.
//
//   S1  e1 -r-> x                      one entity, one hop
//   S2  e1 -r-> t -r-> x               one entity, two-hop chain
//   S3  e1 -r-> x -r-> v               answer mid-chain, value constraint at the tail
//   S4  e1 -r-> x <-r- e2              two entities joined at the answer
//   S5  e1 -r-> t -r-> x <-r- e2       two-hop plus one-hop, joined at the answer
//   S6  e1 -r-> t <-r- e2, t -r-> x    joined at an intermediate, one hop to the answer
//   S7  e1,e2,e3 one hop each          three entities joined at the answer
//   S8  e1 -r1-> x -r2-> e2            answer between the entities (fixed directions)
//
// Hop directions are discovered during search except for S8, whose shape is
// the directed pattern itself. Arrows above are schematic.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbqa/classifier.hpp"
#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"

#include <json.hpp>

namespace kbqa {

enum class JoinKind : std::uint8_t { AtAnswer, ViaIntermediate };

struct Hop {
  std::string relation;
  Direction direction = Direction::Forward;
  // Present only on schema-designated constraint slots (the S3 tail); holds
  // the concrete node the path is constrained to.
  std::optional<Node> bound;

  bool operator==(const Hop&) const = default;
};

struct Branch {
  std::string root;  // topic entity label
  std::vector<Hop> hops;

  bool operator==(const Branch&) const = default;
};

struct QueryPath {
  std::string schema_id;
  std::vector<Branch> branches;
  JoinKind join = JoinKind::AtAnswer;
  // ViaIntermediate only: the hop from the join variable to the answer.
  std::optional<Hop> answer_hop;

  bool operator==(const QueryPath&) const = default;
};

struct HopSlot {
  std::optional<Direction> fixed_direction;  // set only where the shape is directed
  bool bound_terminal = false;               // set on constraint slots

  bool operator==(const HopSlot&) const = default;
};

struct Schema {
  std::string id;
  std::vector<std::vector<HopSlot>> branch_slots;  // per branch, per hop
  JoinKind join = JoinKind::AtAnswer;
  std::optional<HopSlot> answer_slot;  // ViaIntermediate only
  // Template over {e1..e3}, {rBH} (branch B hop H), {ra} (answer hop),
  // {v} (constraint value).
  std::string verbal_template;

  std::size_t entity_slots() const { return branch_slots.size(); }
  std::size_t max_branch_hops() const;
  // Total chain length from a root to the answer (used for hop indexing).
  int total_hops() const;
};

const std::vector<Schema>& builtin_schemas();
const Schema* schema_by_id(std::string_view id);

struct SchemaAssignment {
  const Schema* schema = nullptr;
  std::vector<std::string> roots;  // one entity label per branch slot
};

// Instantiations for a question class over ranked candidate entities:
// one-entity questions use S1-S3 with each single candidate; multi-entity
// questions use S4, S5, S6, S8 with every ordered pair and S7 with every
// 3-combination. `enabled` restricts the schema set (empty = all).
std::vector<SchemaAssignment> schemas_for(QuestionClass cls,
                                          std::span<const std::string> candidates,
                                          std::span<const std::string> enabled = {});

// Fills the schema template with entity mentions (shortest lexicon mention of
// the entity, falling back to its label) and relation labels. Placeholders
// not yet determined by a partial path are dropped and whitespace collapsed.
std::string verbalize(const QueryPath& path, const MentionLexicon& lex);
std::string verbalize_with_template(const QueryPath& path, std::string_view tmpl,
                                    const MentionLexicon& lex);

// Canonical total order / identity for paths. Fields are TAB-joined, which no
// label can contain.
std::string path_key(const QueryPath& path);

nlohmann::json path_to_json(const QueryPath& path);
QueryPath path_from_json(const nlohmann::json& j);

}  // namespace kbqa
