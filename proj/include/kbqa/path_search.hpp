#pragma once
// Candidate query-path generation: hop-by-hop expansion over the KB per
// schema assignment, pruned by a pluggable question-similarity scorer, plus
// the exhaustive baseline and the beam-size benchmark harness.

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"
#include "kbqa/schemas.hpp"

namespace kbqa {

class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic, length-preserving batch scorer mapping candidate sentences
// to similarities in [0, 1].
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::vector<double> score_batch(const std::string& question,
                                          const std::vector<std::string>& candidates) = 0;
};

// Dice coefficient of character n-gram multisets (default bigrams). Two
// strings too short for any n-gram score 1 when equal, else 0.
class NgramScorer : public SimilarityScorer {
 public:
  explicit NgramScorer(int n = 2);
  std::vector<double> score_batch(const std::string& question,
                                  const std::vector<std::string>& candidates) override;

 private:
  int n_;
};

// Scorer backed by a child process speaking line-delimited JSON on its
// stdin/stdout: request {"q": question, "c": [candidates]}, reply
// {"scores": [...]} with matching arity. Scores are clamped to [0, 1].
// Process death or a malformed reply raises ScorerError. Calls are
// serialized.
class ExternalScorer : public SimilarityScorer {
 public:
  explicit ExternalScorer(const std::string& command);
  ~ExternalScorer() override;
  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  std::vector<double> score_batch(const std::string& question,
                                  const std::vector<std::string>& candidates) override;

 private:
  std::string read_line();

  std::mutex mutex_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct BeamConfig {
  std::size_t beam_size = 16;
  // Hop indexes (1-based along the root-to-answer chain) at which the beam is
  // applied; hops not listed retain every partial path. The default mirrors
  // pruning at the first hop only.
  std::set<int> apply_at_hops = {1};
};

struct ScoredPath {
  QueryPath path;
  std::string verbalization;
  double score = 0.0;
};

// Algorithm: expand each branch hop by hop over both edge directions (never
// immediately re-walking the edge just used, in the opposite direction),
// verbalize and score every extended partial at pruned hops and keep the
// beam_size best; completed branches must join (their landing sets intersect)
// and constraint slots record the concrete node reached. Returns complete
// paths sorted by score descending (ties: verbalization, then path key).
// A topic entity absent from the KB yields an empty result with a warning.
std::vector<ScoredPath> beam_generate(const KnowledgeBase& kb, const std::string& question,
                                      const SchemaAssignment& assignment,
                                      const MentionLexicon& lex, SimilarityScorer& scorer,
                                      const BeamConfig& cfg);

// Every schema-conforming path, no pruning, sorted by path key.
std::vector<QueryPath> brute_force_generate(const KnowledgeBase& kb,
                                            const SchemaAssignment& assignment);

struct BenchmarkQuestion {
  std::string id;
  std::string question;
  QueryPath gold;
};

struct BenchmarkRow {
  std::size_t beam_size = 0;
  double recall = 0.0;      // fraction of questions whose gold path was generated
  double avg_paths = 0.0;   // mean candidate count per question
  double reduction = 0.0;   // 1 - avg_paths / exhaustive avg_paths
};

// Runs beam_generate on each question's gold schema assignment for every beam
// size, against the exhaustive baseline. Questions whose gold path does not
// name a known schema are skipped with a warning.
std::vector<BenchmarkRow> beam_benchmark(const KnowledgeBase& kb,
                                         std::span<const BenchmarkQuestion> questions,
                                         const MentionLexicon& lex, SimilarityScorer& scorer,
                                         std::span<const std::size_t> beam_sizes,
                                         const BeamConfig& base_cfg);

// CSV with header beam_size,recall,avg_paths,reduction.
std::string benchmark_csv(std::span<const BenchmarkRow> rows);

}  // namespace kbqa
