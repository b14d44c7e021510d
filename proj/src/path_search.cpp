#include "kbqa/path_search.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <csignal>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "kbqa/text.hpp"
#include "kbqa/utf8.hpp"

#include <json.hpp>

namespace kbqa {

NgramScorer::NgramScorer(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("n-gram size must be >= 1");
}

std::vector<double> NgramScorer::score_batch(const std::string& question,
                                             const std::vector<std::string>& candidates) {
  Multiset q = char_ngrams(question, n_);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const std::string& c : candidates) {
    Multiset cm = char_ngrams(c, n_);
    if (q.empty() && cm.empty())
      scores.push_back(question == c ? 1.0 : 0.0);
    else
      scores.push_back(dice(q, cm));
  }
  return scores;
}

ExternalScorer::ExternalScorer(const std::string& command) {
  std::signal(SIGPIPE, SIG_IGN);

  int to_pipe[2];
  int from_pipe[2];
  if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
    throw ScorerError("external scorer: pipe() failed");

  pid_t pid = fork();
  if (pid < 0) throw ScorerError("external scorer: fork() failed");
  if (pid == 0) {
    dup2(to_pipe[0], STDIN_FILENO);
    dup2(from_pipe[1], STDOUT_FILENO);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  child_pid_ = pid;
  to_child_ = to_pipe[1];
  from_child_ = from_pipe[0];
}

ExternalScorer::~ExternalScorer() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (child_pid_ > 0) {
    int status = 0;
    waitpid(child_pid_, &status, 0);
  }
}

std::string ExternalScorer::read_line() {
  while (true) {
    std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    ssize_t got = read(from_child_, chunk, sizeof chunk);
    if (got <= 0) throw ScorerError("external scorer: process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

std::vector<double> ExternalScorer::score_batch(const std::string& question,
                                                const std::vector<std::string>& candidates) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (candidates.empty()) return {};

  nlohmann::json req;
  req["q"] = question;
  req["c"] = candidates;
  std::string line = req.dump();
  line.push_back('\n');
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t put = write(to_child_, line.data() + off, line.size() - off);
    if (put <= 0) throw ScorerError("external scorer: cannot write request");
    off += static_cast<std::size_t>(put);
  }

  std::string reply = read_line();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("external scorer: malformed reply: ") + e.what());
  }
  if (!j.contains("scores") || !j["scores"].is_array())
    throw ScorerError("external scorer: reply missing scores array");
  auto arr = j["scores"];
  if (arr.size() != candidates.size())
    throw ScorerError("external scorer: reply arity mismatch");
  std::vector<double> scores;
  scores.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ScorerError("external scorer: non-numeric score");
    scores.push_back(std::clamp(v.get<double>(), 0.0, 1.0));
  }
  return scores;
}

namespace {

struct WalkState {
  NodeId node;
  TripleId in_triple;
  Direction in_dir;

  auto operator<=>(const WalkState&) const = default;
};

struct Partial {
  QueryPath path;
  std::vector<WalkState> frontier;  // states of the branch being expanded
  std::vector<NodeId> join_set;     // intersection of completed branch landings
};

struct GroupKey {
  Direction dir;
  PredId pred;
  NodeId bound;  // kNoId for open slots

  auto operator<=>(const GroupKey&) const = default;
};

// One hop from every state, grouped into the abstract extensions. Bound slots
// group per landing node; open slots group per (direction, predicate).
std::map<GroupKey, std::vector<WalkState>> expand_states(const KnowledgeBase& kb,
                                                         std::span<const WalkState> states,
                                                         const HopSlot& slot,
                                                         bool exclude_back_edge) {
  std::map<GroupKey, std::vector<WalkState>> groups;
  for (const WalkState& st : states) {
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
      if (slot.fixed_direction && *slot.fixed_direction != dir) continue;
      for (const Edge& e : kb.edges(st.node, dir)) {
        if (exclude_back_edge && st.in_triple != kNoId && e.triple == st.in_triple &&
            dir == opposite(st.in_dir))
          continue;
        GroupKey key{dir, e.predicate, slot.bound_terminal ? e.neighbor : kNoId};
        groups[key].push_back(WalkState{e.neighbor, e.triple, dir});
      }
    }
  }
  for (auto& [key, sts] : groups) {
    std::sort(sts.begin(), sts.end());
    sts.erase(std::unique(sts.begin(), sts.end()), sts.end());
  }
  return groups;
}

std::vector<NodeId> landing_set(const Partial& p) {
  std::vector<NodeId> nodes;
  nodes.reserve(p.frontier.size());
  for (const WalkState& st : p.frontier) nodes.push_back(st.node);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// Shared expansion core for the beam and the exhaustive baseline.
std::vector<Partial> generate_paths(const KnowledgeBase& kb, const SchemaAssignment& assignment,
                                    const std::set<int>* prune_hops,
                                    const std::function<std::vector<std::size_t>(
                                        const std::vector<Partial>&)>& prune) {
  const Schema& schema = *assignment.schema;
  if (assignment.roots.size() != schema.entity_slots())
    throw std::invalid_argument("assignment root count does not match schema " + schema.id);

  std::vector<NodeId> root_ids;
  for (const std::string& root : assignment.roots) {
    auto id = kb.find_entity(root);
    if (!id) {
      std::cerr << "[warn] topic entity not in KB: " << root << "\n";
      return {};
    }
    root_ids.push_back(*id);
  }

  Partial seed;
  seed.path.schema_id = schema.id;
  seed.path.join = schema.join;
  std::vector<Partial> partials{seed};

  auto maybe_prune = [&](int hop_index, std::vector<Partial>& wave) {
    if (!prune || !prune_hops || !prune_hops->count(hop_index)) return;
    std::vector<std::size_t> keep = prune(wave);
    std::vector<Partial> kept;
    kept.reserve(keep.size());
    for (std::size_t i : keep) kept.push_back(std::move(wave[i]));
    wave = std::move(kept);
  };

  for (std::size_t b = 0; b < schema.branch_slots.size(); ++b) {
    for (Partial& p : partials) {
      p.path.branches.push_back(Branch{assignment.roots[b], {}});
      p.frontier = {WalkState{root_ids[b], kNoId, Direction::Forward}};
    }
    const auto& slots = schema.branch_slots[b];
    for (std::size_t h = 0; h < slots.size(); ++h) {
      std::vector<Partial> wave;
      for (Partial& p : partials) {
        auto groups = expand_states(kb, p.frontier, slots[h], /*exclude_back_edge=*/true);
        for (auto& [key, states] : groups) {
          Partial next;
          next.path = p.path;
          next.join_set = p.join_set;
          Hop hop;
          hop.relation = kb.predicate_label(key.pred);
          hop.direction = key.dir;
          if (key.bound != kNoId) hop.bound = kb.node(key.bound);
          next.path.branches.back().hops.push_back(std::move(hop));
          next.frontier = std::move(states);
          wave.push_back(std::move(next));
        }
      }
      partials = std::move(wave);
      maybe_prune(static_cast<int>(h) + 1, partials);
      if (partials.empty()) return partials;
    }
    // Branch complete; multi-branch schemas must agree on the join variable.
    if (schema.branch_slots.size() > 1) {
      std::vector<Partial> alive;
      for (Partial& p : partials) {
        std::vector<NodeId> landed = landing_set(p);
        if (b == 0) {
          p.join_set = std::move(landed);
        } else {
          std::vector<NodeId> merged;
          std::set_intersection(p.join_set.begin(), p.join_set.end(), landed.begin(),
                                landed.end(), std::back_inserter(merged));
          p.join_set = std::move(merged);
        }
        if (!p.join_set.empty()) alive.push_back(std::move(p));
      }
      partials = std::move(alive);
      if (partials.empty()) return partials;
    }
  }

  if (schema.answer_slot) {
    int hop_index = schema.total_hops();
    std::vector<Partial> wave;
    for (Partial& p : partials) {
      // The answer hop leaves the join variable; it is not a chain
      // continuation, so no back-edge exclusion applies.
      std::vector<WalkState> states;
      states.reserve(p.join_set.size());
      for (NodeId n : p.join_set) states.push_back(WalkState{n, kNoId, Direction::Forward});
      auto groups = expand_states(kb, states, *schema.answer_slot, /*exclude_back_edge=*/false);
      for (auto& [key, landed] : groups) {
        Partial next;
        next.path = p.path;
        next.join_set = p.join_set;
        Hop hop;
        hop.relation = kb.predicate_label(key.pred);
        hop.direction = key.dir;
        next.path.answer_hop = std::move(hop);
        next.frontier = std::move(landed);
        wave.push_back(std::move(next));
      }
    }
    partials = std::move(wave);
    maybe_prune(hop_index, partials);
  }

  return partials;
}

}  // namespace

std::vector<ScoredPath> beam_generate(const KnowledgeBase& kb, const std::string& question,
                                      const SchemaAssignment& assignment,
                                      const MentionLexicon& lex, SimilarityScorer& scorer,
                                      const BeamConfig& cfg) {
  if (cfg.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  for (int h : cfg.apply_at_hops)
    if (h < 1 || h > 3)
      throw std::invalid_argument("apply_at_hops entries must be in {1, 2, 3}");

  auto prune = [&](const std::vector<Partial>& wave) {
    std::vector<std::string> sentences;
    sentences.reserve(wave.size());
    for (const Partial& p : wave) sentences.push_back(verbalize(p.path, lex));
    std::vector<double> scores = scorer.score_batch(question, sentences);
    if (scores.size() != wave.size())
      throw ScorerError("scorer returned wrong number of scores");

    std::vector<std::size_t> order(wave.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::string> keys(wave.size());
    for (std::size_t i = 0; i < wave.size(); ++i) keys[i] = path_key(wave[i].path);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      if (sentences[a] != sentences[b]) return sentences[a] < sentences[b];
      return keys[a] < keys[b];
    });
    if (order.size() > cfg.beam_size) order.resize(cfg.beam_size);
    return order;
  };

  std::vector<Partial> partials =
      generate_paths(kb, assignment, &cfg.apply_at_hops, prune);

  std::vector<ScoredPath> out;
  out.reserve(partials.size());
  std::vector<std::string> sentences;
  sentences.reserve(partials.size());
  for (const Partial& p : partials) sentences.push_back(verbalize(p.path, lex));
  std::vector<double> scores =
      partials.empty() ? std::vector<double>{} : scorer.score_batch(question, sentences);
  if (scores.size() != partials.size())
    throw ScorerError("scorer returned wrong number of scores");
  for (std::size_t i = 0; i < partials.size(); ++i)
    out.push_back(ScoredPath{std::move(partials[i].path), sentences[i], scores[i]});

  std::sort(out.begin(), out.end(), [](const ScoredPath& a, const ScoredPath& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.verbalization != b.verbalization) return a.verbalization < b.verbalization;
    return path_key(a.path) < path_key(b.path);
  });
  return out;
}

std::vector<QueryPath> brute_force_generate(const KnowledgeBase& kb,
                                            const SchemaAssignment& assignment) {
  std::vector<Partial> partials = generate_paths(kb, assignment, nullptr, nullptr);
  std::vector<QueryPath> out;
  out.reserve(partials.size());
  for (Partial& p : partials) out.push_back(std::move(p.path));
  std::sort(out.begin(), out.end(), [](const QueryPath& a, const QueryPath& b) {
    return path_key(a) < path_key(b);
  });
  return out;
}

std::vector<BenchmarkRow> beam_benchmark(const KnowledgeBase& kb,
                                         std::span<const BenchmarkQuestion> questions,
                                         const MentionLexicon& lex, SimilarityScorer& scorer,
                                         std::span<const std::size_t> beam_sizes,
                                         const BeamConfig& base_cfg) {
  struct Prepared {
    const BenchmarkQuestion* q;
    SchemaAssignment assignment;
    std::string gold_key;
    std::size_t exhaustive_count;
  };
  std::vector<Prepared> prepared;
  long double exhaustive_sum = 0;
  for (const BenchmarkQuestion& q : questions) {
    const Schema* schema = schema_by_id(q.gold.schema_id);
    if (!schema || q.gold.branches.size() != schema->entity_slots()) {
      std::cerr << "[warn] skipping benchmark question " << q.id
                << ": gold path missing or malformed\n";
      continue;
    }
    SchemaAssignment a;
    a.schema = schema;
    for (const Branch& b : q.gold.branches) a.roots.push_back(b.root);
    std::size_t count = brute_force_generate(kb, a).size();
    exhaustive_sum += count;
    prepared.push_back(Prepared{&q, std::move(a), path_key(q.gold), count});
  }

  std::vector<BenchmarkRow> rows;
  if (prepared.empty()) return rows;
  double exhaustive_avg = static_cast<double>(exhaustive_sum / prepared.size());

  for (std::size_t k : beam_sizes) {
    BeamConfig cfg = base_cfg;
    cfg.beam_size = k;
    std::size_t hits = 0;
    long double path_sum = 0;
    for (const Prepared& p : prepared) {
      auto cands = beam_generate(kb, p.q->question, p.assignment, lex, scorer, cfg);
      path_sum += cands.size();
      for (const ScoredPath& sp : cands) {
        if (path_key(sp.path) == p.gold_key) {
          ++hits;
          break;
        }
      }
    }
    BenchmarkRow row;
    row.beam_size = k;
    row.recall = static_cast<double>(hits) / static_cast<double>(prepared.size());
    row.avg_paths = static_cast<double>(path_sum / prepared.size());
    row.reduction = exhaustive_avg > 0 ? 1.0 - row.avg_paths / exhaustive_avg : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string benchmark_csv(std::span<const BenchmarkRow> rows) {
  std::ostringstream out;
  out << "beam_size,recall,avg_paths,reduction\n";
  char buf[64];
  auto put = [&](double v) {
    auto [p, e] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, p - buf);
  };
  for (const BenchmarkRow& r : rows) {
    out << r.beam_size << ',';
    put(r.recall);
    out << ',';
    put(r.avg_paths);
    out << ',';
    put(r.reduction);
    out << '\n';
  }
  return out.str();
}

}  // namespace kbqa
