#pragma once
// Linear-chain CRF scoring and decoding over the binary topic-entity labels
// {0,1}, with virtual start/stop transitions. The emission matrix is produced
// by a pluggable scorer; the built-in one marks tokens covered by lexicon
// mentions.

#include <array>
#include <span>
#include <vector>

#include "kbqa/lexicon.hpp"

namespace kbqa {

inline constexpr int kLabelCount = 2;

struct EmissionMatrix {
  // p[i][y] is the score of label y at token i.
  std::vector<std::array<double, kLabelCount>> p;

  std::size_t length() const { return p.size(); }
};

struct TransitionMatrix {
  static constexpr int kStart = 2;
  static constexpr int kStop = 3;
  // a[from][to] over labels 0,1 plus the virtual start/stop states.
  std::array<std::array<double, 4>, 4> a{};

  static TransitionMatrix zeros() { return TransitionMatrix{}; }
};

struct LabelSequence {
  std::vector<int> labels;
  double score = 0.0;
};

// Sum of transition scores (start->y0, y_i->y_{i+1}, y_{n-1}->stop) plus
// emission scores. Label list length must equal the emission length.
double sequence_score(const EmissionMatrix& p, const TransitionMatrix& a,
                      std::span<const int> labels);

// Highest-scoring label sequence; among ties, the lexicographically smallest.
LabelSequence viterbi_decode(const EmissionMatrix& p, const TransitionMatrix& a);

// exp(score(labels)) normalized over all 2^n sequences; n must be <= 20.
double crf_potential(const EmissionMatrix& p, const TransitionMatrix& a,
                     std::span<const int> labels);

// Emission scorer backed by lexicon agreement: +1 for label 1 on tokens lying
// inside any lexicon mention, -1 otherwise; label 0 mirrors with the opposite
// sign. Stands in for a learned encoder behind the same interface.
EmissionMatrix lexicon_emissions(const TokenizedQuestion& tq, const MentionLexicon& lex);

}  // namespace kbqa
