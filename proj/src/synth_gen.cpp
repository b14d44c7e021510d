#include "kbqa/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "kbqa/pipeline.hpp"
#include "kbqa/rng.hpp"

#include <json.hpp>

namespace kbqa {

SynthTemplates SynthTemplates::builtin() {
  SynthTemplates t;
  t.prefix_by_schema = {
      {"S1", "what is"},       {"S2", "what is"},   {"S3", "which"},
      {"S4", "which one is"},  {"S5", "which one is"}, {"S6", "what connects"},
      {"S7", "what is common to"}, {"S8", "what links"},
  };
  return t;
}

SynthTemplates SynthTemplates::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open template file");
  SynthTemplates t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed template line (expected schema<TAB>prefix)");
    t.prefix_by_schema[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return t;
}

namespace {

// One edge incident to `node`, read as a hop ARRIVING at `node` from `other`:
// direction is the hop's direction when walking other -> node.
struct ReverseStep {
  NodeId other;
  PredId pred;
  TripleId triple;
  Direction dir;  // Forward: (other, pred, node);  Backward: (node, pred, other)
};

std::vector<ReverseStep> reverse_steps(const KnowledgeBase& kb, NodeId node) {
  std::vector<ReverseStep> steps;
  for (const Edge& e : kb.edges(node, Direction::Backward))  // (s, p, node)
    steps.push_back(ReverseStep{e.neighbor, e.predicate, e.triple, Direction::Forward});
  for (const Edge& e : kb.edges(node, Direction::Forward))   // (node, p, o)
    steps.push_back(ReverseStep{e.neighbor, e.predicate, e.triple, Direction::Backward});
  return steps;
}

// Forward step leaving `node` (used for root-first walks).
struct ForwardStep {
  NodeId target;
  PredId pred;
  TripleId triple;
  Direction dir;
};

std::vector<ForwardStep> forward_steps(const KnowledgeBase& kb, NodeId node) {
  std::vector<ForwardStep> steps;
  for (const Edge& e : kb.edges(node, Direction::Forward))
    steps.push_back(ForwardStep{e.neighbor, e.predicate, e.triple, Direction::Forward});
  for (const Edge& e : kb.edges(node, Direction::Backward))
    steps.push_back(ForwardStep{e.neighbor, e.predicate, e.triple, Direction::Backward});
  return steps;
}

Hop make_hop(const KnowledgeBase& kb, PredId pred, Direction dir) {
  return Hop{kb.predicate_label(pred), dir, std::nullopt};
}

class Walker {
 public:
  Walker(const KnowledgeBase& kb, Rng& rng) : kb_(kb), rng_(rng) {
    for (NodeId id = 0; id < kb.node_count(); ++id) {
      if (!kb.edges(id, Direction::Forward).empty() ||
          !kb.edges(id, Direction::Backward).empty()) {
        connected_nodes_.push_back(id);
        if (kb.node(id).kind == NodeKind::Entity) connected_entities_.push_back(id);
      }
    }
  }

  bool usable() const { return !connected_nodes_.empty(); }

  std::optional<QueryPath> attempt(const Schema& schema) {
    if (schema.entity_slots() == 1) return walk_chain(schema);
    return walk_join(schema);
  }

 private:
  NodeId random_of(const std::vector<NodeId>& pool) {
    return pool[static_cast<std::size_t>(rng_.below(pool.size()))];
  }

  // Root-first walk for the single-branch schemas (S1-S3).
  std::optional<QueryPath> walk_chain(const Schema& schema) {
    if (connected_entities_.empty()) return std::nullopt;
    NodeId root = random_of(connected_entities_);
    QueryPath path;
    path.schema_id = schema.id;
    path.join = schema.join;
    Branch br;
    br.root = kb_.node(root).label;

    NodeId at = root;
    TripleId in_triple = kNoId;
    Direction in_dir = Direction::Forward;
    const auto& slots = schema.branch_slots[0];
    for (std::size_t h = 0; h < slots.size(); ++h) {
      std::vector<ForwardStep> steps;
      for (const ForwardStep& s : forward_steps(kb_, at)) {
        if (in_triple != kNoId && s.triple == in_triple && s.dir == opposite(in_dir)) continue;
        if (slots[h].fixed_direction && s.dir != *slots[h].fixed_direction) continue;
        steps.push_back(s);
      }
      if (steps.empty()) return std::nullopt;
      const ForwardStep& s = steps[static_cast<std::size_t>(rng_.below(steps.size()))];
      Hop hop = make_hop(kb_, s.pred, s.dir);
      if (slots[h].bound_terminal) hop.bound = kb_.node(s.target);
      br.hops.push_back(std::move(hop));
      at = s.target;
      in_triple = s.triple;
      in_dir = s.dir;
    }
    path.branches.push_back(std::move(br));
    return path;
  }

  // Answer-first walk for the join schemas (S4-S8): pick the answer node,
  // then walk outward to find entity roots, so the branches join by
  // construction.
  std::optional<QueryPath> walk_join(const Schema& schema) {
    NodeId answer = random_of(connected_nodes_);

    NodeId join = answer;
    std::optional<Hop> answer_hop;
    if (schema.answer_slot) {
      auto steps = reverse_steps(kb_, answer);
      std::vector<ReverseStep> ok;
      for (const ReverseStep& s : steps) {
        if (schema.answer_slot->fixed_direction && s.dir != *schema.answer_slot->fixed_direction)
          continue;
        ok.push_back(s);
      }
      if (ok.empty()) return std::nullopt;
      const ReverseStep& s = ok[static_cast<std::size_t>(rng_.below(ok.size()))];
      answer_hop = make_hop(kb_, s.pred, s.dir);
      join = s.other;
    }

    QueryPath path;
    path.schema_id = schema.id;
    path.join = schema.join;
    path.answer_hop = answer_hop;

    std::vector<NodeId> used_roots;
    for (const auto& slots : schema.branch_slots) {
      Branch br;
      std::vector<Hop> hops_reversed;
      NodeId at = join;
      TripleId next_triple = kNoId;   // triple of the hop AFTER `at` (toward the join)
      Direction next_dir = Direction::Forward;
      for (std::size_t h = slots.size(); h-- > 0;) {
        std::vector<ReverseStep> ok;
        for (const ReverseStep& s : reverse_steps(kb_, at)) {
          if (slots[h].fixed_direction && s.dir != *slots[h].fixed_direction) continue;
          // Forward-reading exclusion between this hop and the next one.
          if (next_triple != kNoId && s.triple == next_triple && next_dir == opposite(s.dir))
            continue;
          // The root slot must be an entity distinct from the other roots.
          if (h == 0) {
            const Node& n = kb_.node(s.other);
            if (n.kind != NodeKind::Entity) continue;
            if (std::find(used_roots.begin(), used_roots.end(), s.other) != used_roots.end())
              continue;
          }
          ok.push_back(s);
        }
        if (ok.empty()) return std::nullopt;
        const ReverseStep& s = ok[static_cast<std::size_t>(rng_.below(ok.size()))];
        hops_reversed.push_back(make_hop(kb_, s.pred, s.dir));
        at = s.other;
        next_triple = s.triple;
        next_dir = s.dir;
      }
      used_roots.push_back(at);
      br.root = kb_.node(at).label;
      br.hops.assign(hops_reversed.rbegin(), hops_reversed.rend());
      path.branches.push_back(std::move(br));
    }
    return path;
  }

  const KnowledgeBase& kb_;
  Rng& rng_;
  std::vector<NodeId> connected_nodes_;
  std::vector<NodeId> connected_entities_;
};

}  // namespace

std::vector<SyntheticSample> generate_samples(const KnowledgeBase& kb,
                                              const MentionLexicon& lex, std::size_t count,
                                              const std::map<std::string, double>& ratios,
                                              std::uint64_t seed,
                                              const SynthTemplates& templates) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  double sum = 0;
  for (const auto& [id, r] : ratios) {
    if (!schema_by_id(id)) throw std::invalid_argument("unknown schema id in ratios: " + id);
    if (r < 0) throw std::invalid_argument("negative ratio for " + id);
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("schema ratios must sum to 1");

  // Largest-remainder apportionment of count across schemas.
  struct Quota {
    std::string id;
    std::size_t base;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [id, r] : ratios) {
    double exact = r * static_cast<double>(count);
    std::size_t base = static_cast<std::size_t>(exact);
    quotas.push_back(Quota{id, base, exact - static_cast<double>(base)});
    assigned += base;
  }
  std::stable_sort(quotas.begin(), quotas.end(), [](const Quota& a, const Quota& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    return a.id < b.id;
  });
  for (std::size_t i = 0; assigned < count; ++i, ++assigned)
    quotas[i % quotas.size()].base++;
  std::sort(quotas.begin(), quotas.end(),
            [](const Quota& a, const Quota& b) { return a.id < b.id; });

  Rng rng(seed);
  Walker walker(kb, rng);
  std::vector<SyntheticSample> samples;
  if (!walker.usable()) throw std::runtime_error("KB has no edges; cannot generate samples");

  std::size_t serial = 0;
  for (const Quota& q : quotas) {
    const Schema* schema = schema_by_id(q.id);
    bool skipped = false;
    for (std::size_t i = 0; i < q.base && !skipped; ++i) {
      std::optional<QueryPath> path;
      for (int attempt = 0; attempt < 50 && !path; ++attempt) path = walker.attempt(*schema);
      if (!path) {
        std::cerr << "[warn] schema " << q.id << " unreachable after 50 attempts; skipping "
                  << (q.base - i) << " samples\n";
        skipped = true;
        break;
      }
      SyntheticSample s;
      ++serial;
      char idbuf[24];
      std::snprintf(idbuf, sizeof idbuf, "synth-%06zu", serial);
      s.id = idbuf;
      s.schema_id = q.id;
      s.gold_path = std::move(*path);
      s.answers = execute_path(kb, s.gold_path);
      s.label = schema->entity_slots() == 1 ? QuestionClass::OneEntity
                                            : QuestionClass::MultiEntity;
      auto it = templates.prefix_by_schema.find(q.id);
      std::string prefix = it != templates.prefix_by_schema.end() ? it->second : "";
      std::string body = verbalize(s.gold_path, lex);
      s.question = prefix.empty() ? body : prefix + " " + body;
      samples.push_back(std::move(s));
    }
  }
  if (samples.empty())
    throw std::runtime_error("no schema produced any sample on this KB");
  return samples;
}

void export_samples_jsonl(std::span<const SyntheticSample> samples, std::ostream& out) {
  for (const SyntheticSample& s : samples) {
    nlohmann::json j;
    j["id"] = s.id;
    j["question"] = s.question;
    std::vector<std::string> answers;
    answers.reserve(s.answers.size());
    for (const Node& n : s.answers) answers.push_back(node_to_string(n));
    j["answers"] = answers;
    j["gold_path"] = path_to_json(s.gold_path);
    j["class"] = to_string(s.label);
    j["schema"] = s.schema_id;
    j["origin"] = "synthetic";
    out << j.dump() << '\n';
  }
}

void export_samples_jsonl(std::span<const SyntheticSample> samples, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw std::runtime_error(path + ": cannot write samples file");
  export_samples_jsonl(samples, out);
}

std::vector<SyntheticSample> load_samples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open samples file");
  std::vector<SyntheticSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    SyntheticSample s;
    s.id = j.at("id").get<std::string>();
    s.question = j.at("question").get<std::string>();
    for (const auto& a : j.at("answers")) s.answers.push_back(node_from_string(a.get<std::string>()));
    s.gold_path = path_from_json(j.at("gold_path"));
    s.label = question_class_from_string(j.at("class").get<std::string>());
    s.schema_id = j.at("schema").get<std::string>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kbqa
