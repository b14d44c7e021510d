#include "kbqa/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kbqa {

namespace {

// Nodes reachable from `from` over one hop with the given relation/direction.
std::vector<NodeId> hop_targets(const KnowledgeBase& kb, std::span<const NodeId> from,
                                const Hop& hop) {
  std::vector<NodeId> out;
  for (NodeId n : from)
    for (const Edge& e : kb.edges(n, hop.direction))
      if (kb.predicate_label(e.predicate) == hop.relation) out.push_back(e.neighbor);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool has_edge(const KnowledgeBase& kb, NodeId from, const Hop& hop, NodeId to) {
  for (const Edge& e : kb.edges(from, hop.direction))
    if (e.neighbor == to && kb.predicate_label(e.predicate) == hop.relation) return true;
  return false;
}

void check_shape(const QueryPath& path, const Schema& schema) {
  if (path.branches.size() != schema.entity_slots())
    throw std::invalid_argument("path branch count does not match schema " + schema.id);
  for (std::size_t b = 0; b < path.branches.size(); ++b) {
    const auto& slots = schema.branch_slots[b];
    const Branch& br = path.branches[b];
    if (br.hops.size() != slots.size())
      throw std::invalid_argument("branch hop count does not match schema " + schema.id);
    for (std::size_t h = 0; h < slots.size(); ++h) {
      if (slots[h].bound_terminal != br.hops[h].bound.has_value())
        throw std::invalid_argument("bound terminal outside its schema slot in " + schema.id);
      if (slots[h].fixed_direction && br.hops[h].direction != *slots[h].fixed_direction)
        throw std::invalid_argument("hop direction violates schema " + schema.id);
    }
  }
  if (schema.answer_slot.has_value() != path.answer_hop.has_value())
    throw std::invalid_argument("answer hop does not match schema " + schema.id);
}

// Bindings of a branch at its join variable: the terminal of its last open
// hop. Hops past the join variable are bound and act as filters.
std::vector<NodeId> branch_bindings(const KnowledgeBase& kb, const Branch& br) {
  std::size_t last_open = br.hops.size();
  for (std::size_t h = br.hops.size(); h-- > 0;) {
    if (!br.hops[h].bound) {
      last_open = h;
      break;
    }
  }
  if (last_open == br.hops.size())
    throw std::invalid_argument("branch has no open terminal");

  auto root = kb.find_entity(br.root);
  if (!root) return {};
  std::vector<NodeId> cur{*root};
  for (std::size_t h = 0; h <= last_open && !cur.empty(); ++h)
    cur = hop_targets(kb, cur, br.hops[h]);

  // Filter by the bound tail: the walk must continue from each binding
  // through the pinned nodes.
  for (std::size_t h = last_open + 1; h < br.hops.size() && !cur.empty(); ++h) {
    const Hop& hop = br.hops[h];
    auto target = kb.find_node(*hop.bound);
    if (!target) return {};
    if (h == last_open + 1) {
      std::vector<NodeId> kept;
      for (NodeId v : cur)
        if (has_edge(kb, v, hop, *target)) kept.push_back(v);
      cur = std::move(kept);
    } else {
      auto prev = kb.find_node(*br.hops[h - 1].bound);
      if (!prev || !has_edge(kb, *prev, hop, *target)) return {};
    }
  }
  return cur;
}

}  // namespace

std::vector<Node> execute_path(const KnowledgeBase& kb, const QueryPath& path) {
  const Schema* schema = schema_by_id(path.schema_id);
  if (!schema) throw std::invalid_argument("unknown schema id: " + path.schema_id);
  check_shape(path, *schema);

  std::vector<NodeId> join;
  for (std::size_t b = 0; b < path.branches.size(); ++b) {
    std::vector<NodeId> bindings = branch_bindings(kb, path.branches[b]);
    if (b == 0) {
      join = std::move(bindings);
    } else {
      std::vector<NodeId> merged;
      std::set_intersection(join.begin(), join.end(), bindings.begin(), bindings.end(),
                            std::back_inserter(merged));
      join = std::move(merged);
    }
    if (join.empty()) return {};
  }

  if (path.answer_hop) join = hop_targets(kb, join, *path.answer_hop);

  std::vector<Node> out;
  out.reserve(join.size());
  for (NodeId n : join) out.push_back(kb.node(n));
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_string(AnswerReason r) {
  switch (r) {
    case AnswerReason::Ok: return "ok";
    case AnswerReason::NoMention: return "no_mention";
    case AnswerReason::NoCandidatePath: return "no_candidate_path";
    default: return "scorer_failure";
  }
}

std::optional<std::size_t> rank_candidates(const std::string& question,
                                           std::vector<ScoredPath>& candidates,
                                           SimilarityScorer& scorer) {
  if (candidates.empty()) return std::nullopt;
  std::vector<std::string> sentences;
  sentences.reserve(candidates.size());
  for (const ScoredPath& c : candidates) sentences.push_back(c.verbalization);
  std::vector<double> scores = scorer.score_batch(question, sentences);
  if (scores.size() != candidates.size())
    throw ScorerError("scorer returned wrong number of scores");
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].score = scores[i];

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const ScoredPath& a = candidates[i];
    const ScoredPath& b = candidates[best];
    if (a.score > b.score ||
        (a.score == b.score &&
         (a.verbalization < b.verbalization ||
          (a.verbalization == b.verbalization && path_key(a.path) < path_key(b.path)))))
      best = i;
  }
  return best;
}

Answer answer_question(const PipelineComponents& c, const std::string& id,
                       const std::string& question) {
  Answer ans;
  ans.id = id;

  TokenizedQuestion tq = tokenize(question, *c.lex);
  std::vector<MentionHit> hits = find_mentions(tq, *c.lex);
  if (hits.empty()) {
    ans.reason = AnswerReason::NoMention;
    return ans;
  }

  // Tagging filters mentions: a mention survives if every token its span
  // touches is labeled as topic-entity material.
  if (!tq.tokens.empty()) {
    EmissionMatrix em;
    if (c.emission_scorer) {
      std::vector<double> scores;
      try {
        scores = c.emission_scorer->score_batch(question, tq.token_texts());
      } catch (const ScorerError&) {
        ans.reason = AnswerReason::ScorerFailure;
        return ans;
      }
      if (scores.size() != tq.tokens.size()) {
        ans.reason = AnswerReason::ScorerFailure;
        return ans;
      }
      em.p.resize(tq.tokens.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        double e1 = 2.0 * scores[i] - 1.0;
        em.p[i] = {-e1, e1};
      }
    } else {
      em = lexicon_emissions(tq, *c.lex);
    }
    LabelSequence tags = viterbi_decode(em, c.transitions);
    std::vector<MentionHit> kept;
    for (MentionHit& h : hits) {
      bool ok = true;
      for (std::size_t i = 0; i < tq.tokens.size() && ok; ++i) {
        const Token& t = tq.tokens[i];
        bool overlaps = t.begin < h.end && h.begin < t.end;
        if (overlaps && tags.labels[i] != 1) ok = false;
      }
      if (ok) kept.push_back(std::move(h));
    }
    hits = std::move(kept);
  }
  if (hits.empty()) {
    ans.reason = AnswerReason::NoMention;
    return ans;
  }

  std::vector<CandidateEntity> linked = link_entities(tq, hits, *c.kb, *c.lex, c.linker);
  if (linked.empty()) {
    ans.reason = AnswerReason::NoMention;
    return ans;
  }
  std::vector<std::string> entities = distinct_entities(linked);
  int count = static_cast<int>(entities.size());

  QuestionClass cls;
  if (c.classifier)
    cls = classify(*c.classifier, question, count);
  else
    cls = count >= 2 ? QuestionClass::MultiEntity : QuestionClass::OneEntity;

  const auto& class_mask =
      cls == QuestionClass::OneEntity ? c.one_entity_mask : c.multi_entity_mask;
  if (class_mask && *class_mask != c.linker.feature_mask) {
    LinkerOptions masked = c.linker;
    masked.feature_mask = *class_mask;
    linked = link_entities(tq, hits, *c.kb, *c.lex, masked);
    entities = distinct_entities(linked);
    if (entities.empty()) {
      ans.reason = AnswerReason::NoMention;
      return ans;
    }
  }

  std::vector<SchemaAssignment> assignments = schemas_for(cls, entities, c.enabled_schemas);

  std::vector<ScoredPath> candidates;
  try {
    for (const SchemaAssignment& a : assignments) {
      auto part = beam_generate(*c.kb, question, a, *c.lex, *c.beam_scorer, c.beam);
      candidates.insert(candidates.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
    }
    if (candidates.empty()) {
      ans.reason = AnswerReason::NoCandidatePath;
      return ans;
    }
    SimilarityScorer* ranker = c.rank_scorer ? c.rank_scorer : c.beam_scorer;
    std::optional<std::size_t> best = rank_candidates(question, candidates, *ranker);
    ans.chosen = candidates[*best];
    ans.answers = execute_path(*c.kb, ans.chosen->path);
  } catch (const ScorerError&) {
    ans.reason = AnswerReason::ScorerFailure;
    ans.answers.clear();
    ans.chosen.reset();
    return ans;
  }
  if (c.keep_candidates) ans.candidates = std::move(candidates);
  return ans;
}

std::vector<QuestionRecord> load_questions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open questions file");
  std::vector<QuestionRecord> out;
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
    QuestionRecord q;
    q.id = j.at("id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    if (j.contains("answers"))
      for (const auto& a : j.at("answers")) q.answers.push_back(a.get<std::string>());
    if (j.contains("gold_path") && !j.at("gold_path").is_null())
      q.gold_path = path_from_json(j.at("gold_path"));
    if (j.contains("class") && !j.at("class").is_null())
      q.cls = question_class_from_string(j.at("class").get<std::string>());
    out.push_back(std::move(q));
  }
  return out;
}

void write_questions_jsonl(std::span<const QuestionRecord> questions, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw std::runtime_error(path + ": cannot write questions file");
  for (const QuestionRecord& q : questions) {
    nlohmann::json j;
    j["id"] = q.id;
    j["question"] = q.question;
    j["answers"] = q.answers;
    if (q.gold_path) j["gold_path"] = path_to_json(*q.gold_path);
    if (q.cls) j["class"] = to_string(*q.cls);
    out << j.dump() << '\n';
  }
}

void prf_convention(const std::set<std::string>& pred, const std::set<std::string>& gold,
                    double& precision, double& recall, double& f1) {
  std::vector<std::string> shared;
  std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(),
                        std::back_inserter(shared));
  double hit = static_cast<double>(shared.size());
  precision = pred.empty() ? 0.0 : hit / static_cast<double>(pred.size());
  recall = gold.empty() ? 0.0 : hit / static_cast<double>(gold.size());
  f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

EvalReport evaluate(std::span<const Answer> answers,
                    const std::map<std::string, std::set<std::string>>& gold) {
  EvalReport report;
  long double f1_sum = 0;
  for (const Answer& a : answers) {
    auto it = gold.find(a.id);
    if (it == gold.end())
      throw std::invalid_argument("no gold answers for question id " + a.id);
    std::set<std::string> pred;
    for (const Node& n : a.answers) pred.insert(node_to_string(n));
    QuestionScore qs;
    qs.id = a.id;
    qs.reason = a.reason;
    prf_convention(pred, it->second, qs.precision, qs.recall, qs.f1);
    f1_sum += qs.f1;
    report.reason_counts[to_string(a.reason)]++;
    report.per_question.push_back(std::move(qs));
  }
  report.avg_f1 =
      answers.empty() ? 0.0 : static_cast<double>(f1_sum / static_cast<long double>(answers.size()));
  return report;
}

std::string eval_report_jsonl(const EvalReport& report) {
  std::ostringstream out;
  for (const QuestionScore& q : report.per_question) {
    nlohmann::json j;
    j["id"] = q.id;
    j["precision"] = q.precision;
    j["recall"] = q.recall;
    j["f1"] = q.f1;
    j["reason"] = to_string(q.reason);
    out << j.dump() << '\n';
  }
  nlohmann::json summary;
  summary["avg_f1"] = report.avg_f1;
  summary["questions"] = report.per_question.size();
  summary["reasons"] = report.reason_counts;
  out << summary.dump() << '\n';
  return out.str();
}

std::vector<AblationRow> ablation_harness(const KnowledgeBase& kb, const MentionLexicon& lex,
                                          std::span<const LinkingGoldQuestion> questions,
                                          const LinkerOptions& base) {
  struct Variant {
    std::string label;
    LinkerOptions opts;
  };
  std::vector<Variant> variants;
  variants.push_back({"baseline", base});
  for (int i = 1; i <= 5; ++i) {
    Variant v{"w/o f" + std::to_string(i), base};
    v.opts.weights = ablate(base.weights, i);
    variants.push_back(std::move(v));
  }

  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    long double one_sum = 0, multi_sum = 0;
    std::size_t one_n = 0, multi_n = 0;
    for (const LinkingGoldQuestion& q : questions) {
      TokenizedQuestion tq = tokenize(q.question, lex);
      auto hits = find_mentions(tq, lex);
      auto linked = link_entities(tq, hits, kb, lex, v.opts);
      auto entities = distinct_entities(linked);
      std::size_t found = 0;
      for (const std::string& g : q.gold_entities)
        if (std::find(entities.begin(), entities.end(), g) != entities.end()) ++found;
      double recall = q.gold_entities.empty()
                          ? 0.0
                          : static_cast<double>(found) /
                                static_cast<double>(q.gold_entities.size());
      if (q.gold_entities.size() <= 1) {
        one_sum += recall;
        ++one_n;
      } else {
        multi_sum += recall;
        ++multi_n;
      }
    }
    AblationRow row;
    row.label = v.label;
    row.one_entity_recall = one_n ? static_cast<double>(one_sum / one_n) : 0.0;
    row.multi_entity_recall = multi_n ? static_cast<double>(multi_sum / multi_n) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "type,one_entity,multi_entity\n";
  char buf[64];
  auto put = [&](double v) {
    auto [p, e] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, p - buf);
  };
  for (const AblationRow& r : rows) {
    out << r.label << ',';
    put(r.one_entity_recall);
    out << ',';
    put(r.multi_entity_recall);
    out << '\n';
  }
  return out.str();
}

}  // namespace kbqa
