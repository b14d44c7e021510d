#pragma once
// End-to-end orchestration: tokenize -> tag -> link -> classify -> generate
// -> rank -> execute, answer-set F1 evaluation, and the experiment harnesses.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kbqa/classifier.hpp"
#include "kbqa/crf_tagger.hpp"
#include "kbqa/entity_linker.hpp"
#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"
#include "kbqa/path_search.hpp"
#include "kbqa/schemas.hpp"

namespace kbqa {

// Bindings of the answer variable: every branch's hop sequence walked from
// its root (plain conjunctive matching, constraint slots must reach their
// bound node), branch binding sets intersected at the join variable, and the
// answer hop applied for ViaIntermediate schemas. Throws on paths that do not
// conform to their schema's shape.
std::vector<Node> execute_path(const KnowledgeBase& kb, const QueryPath& path);

enum class AnswerReason : std::uint8_t { Ok, NoMention, NoCandidatePath, ScorerFailure };
std::string to_string(AnswerReason r);

struct Answer {
  std::string id;
  std::optional<ScoredPath> chosen;
  std::vector<Node> answers;  // sorted, deduplicated
  AnswerReason reason = AnswerReason::Ok;
  std::vector<ScoredPath> candidates;  // populated only when keep_candidates is set
};

// Re-scores every candidate's verbalization against the question and returns
// the index of the best (ties: lexicographically smallest verbalization, then
// path key); nullopt on an empty candidate list.
std::optional<std::size_t> rank_candidates(const std::string& question,
                                           std::vector<ScoredPath>& candidates,
                                           SimilarityScorer& scorer);

struct PipelineComponents {
  const KnowledgeBase* kb = nullptr;
  const MentionLexicon* lex = nullptr;
  LinkerOptions linker;
  // When a class-specific mask is set, candidates are re-linked with it after
  // classification, so each question class can run its own feature subset.
  std::optional<std::array<bool, 5>> one_entity_mask;
  std::optional<std::array<bool, 5>> multi_entity_mask;
  TransitionMatrix transitions = TransitionMatrix::zeros();
  const LinearClassifier* classifier = nullptr;  // optional; falls back to a
                                                 // candidate-count rule
  std::vector<std::string> enabled_schemas;      // empty = all
  BeamConfig beam;
  SimilarityScorer* beam_scorer = nullptr;
  SimilarityScorer* rank_scorer = nullptr;      // defaults to beam_scorer
  // When set, emissions come from scoring each token against the question
  // over the scorer protocol (P[i][1] = 2 * score - 1) instead of from
  // lexicon agreement.
  SimilarityScorer* emission_scorer = nullptr;
  bool keep_candidates = false;
};

Answer answer_question(const PipelineComponents& c, const std::string& id,
                       const std::string& question);

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;  // node encoding; literals carry quotes
  std::optional<QueryPath> gold_path;
  std::optional<QuestionClass> cls;
};

std::vector<QuestionRecord> load_questions_jsonl(const std::string& path);
void write_questions_jsonl(std::span<const QuestionRecord> questions, const std::string& path);

struct QuestionScore {
  std::string id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  AnswerReason reason = AnswerReason::Ok;
};

struct EvalReport {
  std::vector<QuestionScore> per_question;
  double avg_f1 = 0.0;
  std::map<std::string, int> reason_counts;
};

// Sets are compared in node encoding. Every answer id must be present in
// `gold`. The empty-prediction convention (P = 0) lives in prf_convention.
EvalReport evaluate(std::span<const Answer> answers,
                    const std::map<std::string, std::set<std::string>>& gold);

// P = |pred n gold| / |pred| (0 when pred is empty), R = |pred n gold| /
// |gold| (0 when gold is empty), F1 = 2PR/(P+R) (0 when both are 0).
void prf_convention(const std::set<std::string>& pred, const std::set<std::string>& gold,
                    double& precision, double& recall, double& f1);

// JSONL: one object per question, then one summary object.
std::string eval_report_jsonl(const EvalReport& report);

struct LinkingGoldQuestion {
  std::string question;
  std::vector<std::string> gold_entities;  // class split: 1 = one-entity, >1 = multi
};

struct AblationRow {
  std::string label;  // "baseline", "w/o f1", ...
  double one_entity_recall = 0.0;
  double multi_entity_recall = 0.0;
};

// Linking recall (mean per-question fraction of gold entities among the
// linked candidates) for the full feature set and each single-feature
// ablation, split by question class.
std::vector<AblationRow> ablation_harness(const KnowledgeBase& kb, const MentionLexicon& lex,
                                          std::span<const LinkingGoldQuestion> questions,
                                          const LinkerOptions& base);

// CSV with header type,one_entity,multi_entity.
std::string ablation_csv(std::span<const AblationRow> rows);

}  // namespace kbqa
