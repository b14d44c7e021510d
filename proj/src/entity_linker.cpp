#include "kbqa/entity_linker.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "kbqa/text.hpp"
#include "kbqa/utf8.hpp"

namespace kbqa {

std::vector<std::string> default_interrogatives() {
  return {"谁", "哪", "什么", "几", "who", "what", "which", "where", "when"};
}

LinkerWeights ablate(const LinkerWeights& weights, int index) {
  if (index < 1 || index > 5) throw std::invalid_argument("feature index must be 1..5");
  LinkerWeights out = weights;
  out.w[index - 1] = 0.0;
  return out;
}

double feature_mention_length(std::string_view mention) {
  return static_cast<double>(utf8::char_count(mention));
}

double feature_mention_tf(std::string_view mention, std::string_view question) {
  std::size_t qlen = utf8::char_count(question);
  if (qlen == 0) throw std::invalid_argument("feature_mention_tf: empty question");
  return static_cast<double>(count_occurrences(question, mention)) /
         static_cast<double>(qlen);
}

double feature_interrogative_distance(std::size_t begin, std::size_t end,
                                      std::string_view question,
                                      std::span<const std::string> interrogatives) {
  auto offs = utf8::char_offsets(question);
  std::size_t qchars = offs.size() - 1;

  // Character gap between [begin,end) and an interrogative at [b,e);
  // overlapping or adjacent spans have gap 0.
  auto gap = [&](std::size_t b, std::size_t e) -> std::size_t {
    if (e <= begin) return begin - e;
    if (end <= b) return b - end;
    return 0;
  };

  bool found = false;
  std::size_t best = qchars;
  for (const std::string& word : interrogatives) {
    if (word.empty()) continue;
    std::size_t wchars = utf8::char_count(word);
    if (wchars > qchars) continue;
    for (std::size_t b = 0; b + wchars <= qchars; ++b) {
      if (utf8::slice(question, offs, b, b + wchars) == word) {
        found = true;
        best = std::min(best, gap(b, b + wchars));
      }
    }
  }
  return found ? static_cast<double>(best) : static_cast<double>(qchars);
}

double feature_predicate_overlap(const TokenizedQuestion& tq, std::string_view entity,
                                 const KnowledgeBase& kb, const MentionLexicon& lex) {
  auto id = kb.find_entity(entity);
  if (!id) return 0.0;

  std::set<std::string> predicates;
  for (Direction dir : {Direction::Forward, Direction::Backward})
    for (const Edge& e : kb.edges(*id, dir)) predicates.insert(kb.predicate_label(e.predicate));

  Multiset pred_tokens;
  for (const std::string& p : predicates)
    for (const Token& t : tokenize(p, lex).tokens) pred_tokens[t.text]++;

  return dice(to_multiset(tq.token_texts()), pred_tokens);
}

double feature_popularity(std::string_view entity, const KnowledgeBase& kb) {
  return std::sqrt(static_cast<double>(kb.two_hop_path_count(entity)));
}

std::vector<double> score_candidates(std::span<const std::array<double, 5>> features,
                                     const LinkerWeights& weights,
                                     const std::array<bool, 5>& mask) {
  std::vector<double> scores(features.size(), 0.0);
  if (features.empty()) return scores;
  // Per-question min-max normalization; a feature constant across candidates
  // maps to 0.5.
  for (int i = 0; i < 5; ++i) {
    double lo = features[0][i], hi = features[0][i];
    for (const auto& f : features) {
      lo = std::min(lo, f[i]);
      hi = std::max(hi, f[i]);
    }
    double w = mask[i] ? weights.w[i] : 0.0;
    for (std::size_t c = 0; c < features.size(); ++c) {
      double norm = hi > lo ? (features[c][i] - lo) / (hi - lo) : 0.5;
      scores[c] += w * norm;
    }
  }
  return scores;
}

std::vector<CandidateEntity> link_entities(const TokenizedQuestion& tq,
                                           std::span<const MentionHit> mentions,
                                           const KnowledgeBase& kb, const MentionLexicon& lex,
                                           const LinkerOptions& opts) {
  if (opts.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  std::vector<CandidateEntity> cands;
  for (const MentionHit& hit : mentions) {
    for (const std::string& entity : hit.entities) {
      CandidateEntity c;
      c.mention = hit.mention;
      c.begin = hit.begin;
      c.end = hit.end;
      c.entity = entity;
      c.f[0] = feature_mention_length(hit.mention);
      c.f[1] = feature_mention_tf(hit.mention, tq.text);
      c.f[2] = feature_interrogative_distance(hit.begin, hit.end, tq.text,
                                              opts.interrogatives);
      c.f[3] = feature_predicate_overlap(tq, entity, kb, lex);
      c.f[4] = feature_popularity(entity, kb);
      cands.push_back(std::move(c));
    }
  }
  if (cands.empty()) return cands;

  std::vector<std::array<double, 5>> features;
  features.reserve(cands.size());
  for (const auto& c : cands) features.push_back(c.f);
  std::vector<double> scores = score_candidates(features, opts.weights, opts.feature_mask);
  for (std::size_t i = 0; i < cands.size(); ++i) cands[i].score = scores[i];

  std::sort(cands.begin(), cands.end(), [](const CandidateEntity& a, const CandidateEntity& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.entity != b.entity) return a.entity < b.entity;
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.mention < b.mention;
  });
  if (cands.size() > static_cast<std::size_t>(opts.top_k))
    cands.resize(static_cast<std::size_t>(opts.top_k));
  return cands;
}

std::vector<std::string> distinct_entities(std::span<const CandidateEntity> candidates) {
  std::vector<std::string> out;
  for (const CandidateEntity& c : candidates)
    if (std::find(out.begin(), out.end(), c.entity) == out.end()) out.push_back(c.entity);
  return out;
}

}  // namespace kbqa
