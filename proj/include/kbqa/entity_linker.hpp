#pragma once
// Candidate topic-entity scoring: five features per (mention, entity) pair,
// min-max normalized per question, combined by a linear weighing layer.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"

namespace kbqa {

struct LinkerWeights {
  // Defaults follow the sign heuristic: larger f1, f2, f4, f5 and smaller f3
  // make an entity more likely.
  std::array<double, 5> w{1.0, 1.0, -1.0, 1.0, 1.0};
};

// Returns a copy with the weight of feature `index` (1-based, 1..5) zeroed.
LinkerWeights ablate(const LinkerWeights& weights, int index);

struct CandidateEntity {
  std::string mention;
  std::size_t begin = 0;  // character span of the mention
  std::size_t end = 0;
  std::string entity;
  std::array<double, 5> f{};  // raw feature values
  double score = 0.0;         // linear score over normalized features
};

std::vector<std::string> default_interrogatives();

struct LinkerOptions {
  LinkerWeights weights;
  int top_k = 5;
  std::vector<std::string> interrogatives = default_interrogatives();
  std::array<bool, 5> feature_mask{true, true, true, true, true};
};

// f1: mention length in characters.
double feature_mention_length(std::string_view mention);

// f2: non-overlapping occurrences of the mention in the question divided by
// the question's character count.
double feature_mention_tf(std::string_view mention, std::string_view question);

// f3: minimum character gap between the mention span and any interrogative
// occurrence; the question length when no interrogative is present.
double feature_interrogative_distance(std::size_t begin, std::size_t end,
                                      std::string_view question,
                                      std::span<const std::string> interrogatives);

// f4: Dice overlap between the question's token multiset and the tokens of
// the distinct predicate labels in the entity's one-hop subgraph (both
// directions). Predicate labels are tokenized with the same lexicon.
double feature_predicate_overlap(const TokenizedQuestion& tq, std::string_view entity,
                                 const KnowledgeBase& kb, const MentionLexicon& lex);

// f5: sqrt of the number of relation paths within the entity's 2-hop graph.
double feature_popularity(std::string_view entity, const KnowledgeBase& kb);

// The linear weighing layer: min-max normalizes each feature across the
// candidate set (constant features map to 0.5) and combines with the masked
// weights.
std::vector<double> score_candidates(std::span<const std::array<double, 5>> features,
                                     const LinkerWeights& weights,
                                     const std::array<bool, 5>& mask = {true, true, true, true,
                                                                        true});

// Scores every (mention, entity) pair, normalizes each feature to [0,1]
// across the question's candidates (constant features map to 0.5), and
// returns the top-k by score (ties: entity label ascending, then mention
// position). Raw feature values are preserved on the results.
std::vector<CandidateEntity> link_entities(const TokenizedQuestion& tq,
                                           std::span<const MentionHit> mentions,
                                           const KnowledgeBase& kb, const MentionLexicon& lex,
                                           const LinkerOptions& opts);

// Distinct entity labels of candidates in rank order.
std::vector<std::string> distinct_entities(std::span<const CandidateEntity> candidates);

}  // namespace kbqa
