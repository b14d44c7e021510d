#include "kbqa/schemas.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace kbqa {

std::size_t Schema::max_branch_hops() const {
  std::size_t m = 0;
  for (const auto& b : branch_slots) m = std::max(m, b.size());
  return m;
}

int Schema::total_hops() const {
  return static_cast<int>(max_branch_hops()) + (answer_slot ? 1 : 0);
}

const std::vector<Schema>& builtin_schemas() {
  static const std::vector<Schema> schemas = [] {
    std::vector<Schema> v;
    HopSlot open{};
    HopSlot bound{std::nullopt, true};

    v.push_back(Schema{"S1", {{open}}, JoinKind::AtAnswer, std::nullopt,
                       "{r11} {e1}"});
    v.push_back(Schema{"S2", {{open, open}}, JoinKind::AtAnswer, std::nullopt,
                       "{r12} {r11} {e1}"});
    v.push_back(Schema{"S3", {{open, bound}}, JoinKind::AtAnswer, std::nullopt,
                       "{r11} {e1} {r12} {v}"});
    v.push_back(Schema{"S4", {{open}, {open}}, JoinKind::AtAnswer, std::nullopt,
                       "{r11} {e1} {r21} {e2}"});
    v.push_back(Schema{"S5", {{open, open}, {open}}, JoinKind::AtAnswer, std::nullopt,
                       "{r12} {r11} {e1} {r21} {e2}"});
    v.push_back(Schema{"S6", {{open}, {open}}, JoinKind::ViaIntermediate, open,
                       "{ra} {r11} {e1} {r21} {e2}"});
    v.push_back(Schema{"S7", {{open}, {open}, {open}}, JoinKind::AtAnswer, std::nullopt,
                       "{r11} {e1} {r21} {e2} {r31} {e3}"});
    Schema s8{"S8",
              {{HopSlot{Direction::Forward, false}}, {HopSlot{Direction::Backward, false}}},
              JoinKind::AtAnswer,
              std::nullopt,
              "{r11} {e1} {r21} {e2}"};
    v.push_back(std::move(s8));
    return v;
  }();
  return schemas;
}

const Schema* schema_by_id(std::string_view id) {
  for (const Schema& s : builtin_schemas())
    if (s.id == id) return &s;
  return nullptr;
}

namespace {

bool schema_enabled(const Schema& s, std::span<const std::string> enabled) {
  if (enabled.empty()) return true;
  return std::find(enabled.begin(), enabled.end(), s.id) != enabled.end();
}

}  // namespace

std::vector<SchemaAssignment> schemas_for(QuestionClass cls,
                                          std::span<const std::string> candidates,
                                          std::span<const std::string> enabled) {
  std::vector<SchemaAssignment> out;
  std::size_t n = candidates.size();
  if (n == 0) return out;

  if (cls == QuestionClass::OneEntity) {
    for (const char* id : {"S1", "S2", "S3"}) {
      const Schema* s = schema_by_id(id);
      if (!schema_enabled(*s, enabled)) continue;
      for (const auto& c : candidates) out.push_back(SchemaAssignment{s, {c}});
    }
    return out;
  }

  if (n < 2) {
    std::cerr << "[warn] multi-entity question with fewer than two candidate entities; "
                 "no schema assignments generated\n";
    return out;
  }
  for (const char* id : {"S4", "S5", "S6", "S8"}) {
    const Schema* s = schema_by_id(id);
    if (!schema_enabled(*s, enabled)) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) out.push_back(SchemaAssignment{s, {candidates[i], candidates[j]}});
  }
  const Schema* s7 = schema_by_id("S7");
  if (n >= 3 && schema_enabled(*s7, enabled)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
          out.push_back(SchemaAssignment{s7, {candidates[i], candidates[j], candidates[k]}});
  }
  return out;
}

namespace {

std::string mention_or_label(std::string_view entity, const MentionLexicon& lex) {
  if (auto m = lex.shortest_mention_of(entity)) return *m;
  return std::string(entity);
}

std::string bound_text(const Node& n, const MentionLexicon& lex) {
  if (n.kind == NodeKind::Literal) return n.label;
  return mention_or_label(n.label, lex);
}

}  // namespace

std::string verbalize_with_template(const QueryPath& path, std::string_view tmpl,
                                    const MentionLexicon& lex) {
  std::vector<std::pair<std::string, std::string>> fills;
  for (std::size_t b = 0; b < path.branches.size(); ++b) {
    const Branch& br = path.branches[b];
    fills.emplace_back("{e" + std::to_string(b + 1) + "}", mention_or_label(br.root, lex));
    for (std::size_t h = 0; h < br.hops.size(); ++h) {
      const Hop& hop = br.hops[h];
      fills.emplace_back("{r" + std::to_string(b + 1) + std::to_string(h + 1) + "}",
                         hop.relation);
      if (hop.bound) fills.emplace_back("{v}", bound_text(*hop.bound, lex));
    }
  }
  if (path.answer_hop) fills.emplace_back("{ra}", path.answer_hop->relation);

  std::string s(tmpl);
  for (const auto& [ph, value] : fills) {
    std::size_t pos;
    while ((pos = s.find(ph)) != std::string::npos) s.replace(pos, ph.size(), value);
  }
  // Drop placeholders a partial path has not determined yet.
  std::size_t open_brace;
  while ((open_brace = s.find('{')) != std::string::npos) {
    std::size_t close_brace = s.find('}', open_brace);
    if (close_brace == std::string::npos) break;
    s.erase(open_brace, close_brace - open_brace + 1);
  }
  // Collapse whitespace runs left behind.
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (c == ' ') {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

std::string verbalize(const QueryPath& path, const MentionLexicon& lex) {
  const Schema* s = schema_by_id(path.schema_id);
  if (!s) throw std::invalid_argument("unknown schema id: " + path.schema_id);
  return verbalize_with_template(path, s->verbal_template, lex);
}

std::string path_key(const QueryPath& path) {
  std::string key = path.schema_id;
  for (const Branch& br : path.branches) {
    key += "\tB\t";
    key += br.root;
    for (const Hop& h : br.hops) {
      key += '\t';
      key += h.relation;
      key += h.direction == Direction::Forward ? "\tF" : "\tB";
      if (h.bound) {
        key += h.bound->kind == NodeKind::Literal ? "\tL:" : "\tE:";
        key += h.bound->label;
      }
    }
  }
  if (path.answer_hop) {
    key += "\tA\t";
    key += path.answer_hop->relation;
    key += path.answer_hop->direction == Direction::Forward ? "\tF" : "\tB";
  }
  return key;
}

namespace {

nlohmann::json hop_to_json(const Hop& h) {
  nlohmann::json j;
  j["r"] = h.relation;
  j["dir"] = h.direction == Direction::Forward ? "F" : "B";
  if (h.bound) j["bound"] = node_to_string(*h.bound);
  return j;
}

Hop hop_from_json(const nlohmann::json& j) {
  Hop h;
  h.relation = j.at("r").get<std::string>();
  std::string dir = j.at("dir").get<std::string>();
  if (dir == "F")
    h.direction = Direction::Forward;
  else if (dir == "B")
    h.direction = Direction::Backward;
  else
    throw std::invalid_argument("hop direction must be F or B");
  if (j.contains("bound")) h.bound = node_from_string(j.at("bound").get<std::string>());
  return h;
}

}  // namespace

nlohmann::json path_to_json(const QueryPath& path) {
  nlohmann::json j;
  j["schema"] = path.schema_id;
  nlohmann::json branches = nlohmann::json::array();
  for (const Branch& br : path.branches) {
    nlohmann::json b;
    b["root"] = br.root;
    nlohmann::json hops = nlohmann::json::array();
    for (const Hop& h : br.hops) hops.push_back(hop_to_json(h));
    b["hops"] = std::move(hops);
    branches.push_back(std::move(b));
  }
  j["branches"] = std::move(branches);
  if (path.answer_hop) j["answer_hop"] = hop_to_json(*path.answer_hop);
  return j;
}

QueryPath path_from_json(const nlohmann::json& j) {
  QueryPath p;
  p.schema_id = j.at("schema").get<std::string>();
  const Schema* s = schema_by_id(p.schema_id);
  if (!s) throw std::invalid_argument("unknown schema id: " + p.schema_id);
  p.join = s->join;
  for (const auto& b : j.at("branches")) {
    Branch br;
    br.root = b.at("root").get<std::string>();
    for (const auto& h : b.at("hops")) br.hops.push_back(hop_from_json(h));
    p.branches.push_back(std::move(br));
  }
  if (j.contains("answer_hop")) p.answer_hop = hop_from_json(j.at("answer_hop"));
  return p;
}

}  // namespace kbqa
