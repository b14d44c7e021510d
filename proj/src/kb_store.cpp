#include "kbqa/kb_store.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace kbqa {

std::string node_to_string(const Node& n) {
  if (n.kind == NodeKind::Literal) return "\"" + n.label + "\"";
  return n.label;
}

Node node_from_string(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return Node{NodeKind::Literal, std::string(s.substr(1, s.size() - 2))};
  return Node{NodeKind::Entity, std::string(s)};
}

NodeId KnowledgeBase::intern_node(NodeKind kind, std::string_view label) {
  auto& table = kind == NodeKind::Entity ? entity_ids_ : literal_ids_;
  auto it = table.find(std::string(label));
  if (it != table.end()) return it->second;
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{kind, std::string(label)});
  table.emplace(std::string(label), id);
  return id;
}

PredId KnowledgeBase::intern_predicate(std::string_view label) {
  auto it = predicate_ids_.find(std::string(label));
  if (it != predicate_ids_.end()) return it->second;
  PredId id = static_cast<PredId>(predicates_.size());
  predicates_.push_back(std::string(label));
  predicate_ids_.emplace(std::string(label), id);
  return id;
}

KnowledgeBase KnowledgeBase::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open KB file");
  return load_stream(in, path);
}

KnowledgeBase KnowledgeBase::load_stream(std::istream& in, const std::string& name) {
  KnowledgeBase kb;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.find('\t', t2 + 1) != std::string::npos) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": malformed triple line (expected 3 TAB-separated fields)");
    }

    std::string_view subject(line.data(), t1);
    std::string_view predicate(line.data() + t1 + 1, t2 - t1 - 1);
    std::string_view object(line.data() + t2 + 1, line.size() - t2 - 1);
    if (subject.empty() || predicate.empty() || object.empty())
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty field");

    Node obj = node_from_string(object);
    NodeId s = kb.intern_node(NodeKind::Entity, subject);
    PredId p = kb.intern_predicate(predicate);
    NodeId o = kb.intern_node(obj.kind, obj.label);
    kb.triples_.push_back(TripleIds{s, p, o});
  }
  kb.finalize();
  return kb;
}

void KnowledgeBase::finalize() {
  // Canonical order by labels, independent of input line order, then set
  // semantics via unique.
  auto label_less = [this](const TripleIds& a, const TripleIds& b) {
    const auto& sa = nodes_[a.subject].label;
    const auto& sb = nodes_[b.subject].label;
    if (sa != sb) return sa < sb;
    const auto& pa = predicates_[a.predicate];
    const auto& pb = predicates_[b.predicate];
    if (pa != pb) return pa < pb;
    const Node& oa = nodes_[a.object];
    const Node& ob = nodes_[b.object];
    if (oa.label != ob.label) return oa.label < ob.label;
    return oa.kind < ob.kind;
  };
  std::sort(triples_.begin(), triples_.end(), label_less);
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (TripleId t = 0; t < triples_.size(); ++t) {
    const TripleIds& tr = triples_[t];
    out_[tr.subject].push_back(Edge{tr.predicate, tr.object, t});
    in_[tr.object].push_back(Edge{tr.predicate, tr.subject, t});
  }
  auto edge_less = [this](const Edge& a, const Edge& b) {
    const auto& pa = predicates_[a.predicate];
    const auto& pb = predicates_[b.predicate];
    if (pa != pb) return pa < pb;
    const Node& na = nodes_[a.neighbor];
    const Node& nb = nodes_[b.neighbor];
    if (na.label != nb.label) return na.label < nb.label;
    if (na.kind != nb.kind) return na.kind < nb.kind;
    return a.triple < b.triple;
  };
  for (auto& v : out_) std::sort(v.begin(), v.end(), edge_less);
  for (auto& v : in_) std::sort(v.begin(), v.end(), edge_less);
}

std::optional<NodeId> KnowledgeBase::find_entity(std::string_view label) const {
  auto it = entity_ids_.find(std::string(label));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> KnowledgeBase::find_node(const Node& n) const {
  const auto& table = n.kind == NodeKind::Entity ? entity_ids_ : literal_ids_;
  auto it = table.find(n.label);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, Node>> KnowledgeBase::neighbors(std::string_view entity,
                                                                   Direction dir) const {
  std::vector<std::pair<std::string, Node>> out;
  auto id = find_entity(entity);
  if (!id) return out;
  for (const Edge& e : edges(*id, dir))
    out.emplace_back(predicates_[e.predicate], nodes_[e.neighbor]);
  return out;
}

std::uint64_t KnowledgeBase::relation_path_count(std::string_view entity, int max_hops) const {
  auto id = find_entity(entity);
  if (!id) return 0;

  std::uint64_t count = 0;
  // Iterative DFS over (node, incoming edge, depth); every step taken is one
  // more distinct path because steps from a fixed node are in bijection with
  // (direction, triple) pairs.
  struct Frame {
    NodeId node;
    TripleId in_triple;
    Direction in_dir;
    int depth;
  };
  std::vector<Frame> stack;
  stack.push_back(Frame{*id, kNoId, Direction::Forward, 0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.depth == max_hops) continue;
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
      for (const Edge& e : edges(f.node, dir)) {
        if (f.in_triple != kNoId && e.triple == f.in_triple && dir == opposite(f.in_dir))
          continue;  // immediate back-edge
        ++count;
        stack.push_back(Frame{e.neighbor, e.triple, dir, f.depth + 1});
      }
    }
  }
  return count;
}

double KnowledgeBase::avg_relation_count(std::span<const std::string> entities, int hops) const {
  if (hops < 1 || hops > 3) throw std::invalid_argument("avg_relation_count: hops must be 1..3");
  if (entities.empty()) throw std::invalid_argument("avg_relation_count: empty entity list");
  long double sum = 0;
  for (const auto& e : entities) sum += relation_path_count(e, hops);
  return static_cast<double>(sum / static_cast<long double>(entities.size()));
}

std::vector<Triple> KnowledgeBase::triples() const {
  std::vector<Triple> out;
  out.reserve(triples_.size());
  for (const TripleIds& t : triples_)
    out.push_back(Triple{nodes_[t.subject].label, predicates_[t.predicate], nodes_[t.object]});
  return out;
}

std::vector<std::string> KnowledgeBase::entity_labels() const {
  std::vector<std::string> out;
  for (const Node& n : nodes_)
    if (n.kind == NodeKind::Entity) out.push_back(n.label);
  std::sort(out.begin(), out.end());
  return out;
}

bool KnowledgeBase::operator==(const KnowledgeBase& other) const {
  return triples() == other.triples();
}

}  // namespace kbqa
