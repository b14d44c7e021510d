#pragma once
// In-memory triple store. Mutable only while loading; afterwards immutable and
// safe for any number of concurrent readers. Labels are interned to compact
// ids and all search runs on ids; the adjacency lists are pre-sorted by
// (predicate label, neighbor label) so every traversal is deterministic.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kbqa {

enum class NodeKind : std::uint8_t { Entity, Literal };
enum class Direction : std::uint8_t { Forward, Backward };

inline Direction opposite(Direction d) {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

struct Node {
  NodeKind kind = NodeKind::Entity;
  std::string label;

  bool operator==(const Node&) const = default;
  auto operator<=>(const Node&) const = default;
};

// KB file syntax: literals are wrapped in ASCII double quotes.
std::string node_to_string(const Node& n);
Node node_from_string(std::string_view s);

using NodeId = std::uint32_t;
using PredId = std::uint32_t;
using TripleId = std::uint32_t;
inline constexpr std::uint32_t kNoId = 0xFFFFFFFFu;

struct Triple {
  std::string subject;    // always an entity
  std::string predicate;
  Node object;

  bool operator==(const Triple&) const = default;
};

// One adjacency entry. `triple` identifies the underlying fact so traversals
// can refuse to re-walk the edge they just arrived by.
struct Edge {
  PredId predicate;
  NodeId neighbor;
  TripleId triple;
};

class KnowledgeBase {
 public:
  // File format: one `subject<TAB>predicate<TAB>object` per line, UTF-8.
  // Objects wrapped in double quotes are literals. Lines starting with `#`
  // and blank lines are skipped. A line with any other field count is
  // rejected with its line number (TAB cannot be escaped inside fields).
  static KnowledgeBase load_file(const std::string& path);
  static KnowledgeBase load_stream(std::istream& in, const std::string& name);

  std::size_t triple_count() const { return triples_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  // All (predicate, neighbor) pairs reachable from `entity` in the given
  // direction, sorted by predicate label then neighbor label. Unknown
  // entities yield an empty list.
  std::vector<std::pair<std::string, Node>> neighbors(std::string_view entity,
                                                      Direction dir) const;

  // Distinct relation paths of length 1..max_hops starting at `entity`, both
  // directions at every step, never immediately re-traversing the edge just
  // used in the opposite direction. A path is its sequence of
  // (predicate, direction, node) steps.
  std::uint64_t relation_path_count(std::string_view entity, int max_hops) const;
  std::uint64_t two_hop_path_count(std::string_view entity) const {
    return relation_path_count(entity, 2);
  }

  // Mean relation_path_count over `entities`; hops must be 1..3 and the list
  // non-empty. Unknown entities count 0.
  double avg_relation_count(std::span<const std::string> entities, int hops) const;

  // --- id-level surface used by search ---
  std::optional<NodeId> find_entity(std::string_view label) const;
  std::optional<NodeId> find_node(const Node& n) const;
  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::string& predicate_label(PredId id) const { return predicates_[id]; }
  std::span<const Edge> edges(NodeId n, Direction dir) const {
    const auto& adj = dir == Direction::Forward ? out_ : in_;
    return adj[n];
  }

  // Canonically sorted (subject, predicate, object) triples.
  std::vector<Triple> triples() const;
  // Entity labels sorted ascending (every entity that occurs in any triple).
  std::vector<std::string> entity_labels() const;

  bool operator==(const KnowledgeBase& other) const;

 private:
  struct TripleIds {
    NodeId subject;
    PredId predicate;
    NodeId object;
    auto operator<=>(const TripleIds&) const = default;
  };

  NodeId intern_node(NodeKind kind, std::string_view label);
  PredId intern_predicate(std::string_view label);
  void finalize();

  std::vector<Node> nodes_;
  std::vector<std::string> predicates_;
  std::vector<TripleIds> triples_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<Edge>> in_;
  // Lookup only, never iterated.
  std::unordered_map<std::string, NodeId> entity_ids_;
  std::unordered_map<std::string, NodeId> literal_ids_;
  std::unordered_map<std::string, PredId> predicate_ids_;
};

}  // namespace kbqa
