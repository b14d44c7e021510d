#include "kbqa/crf_tagger.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kbqa {

namespace {

void check_finite(const EmissionMatrix& p, const TransitionMatrix& a) {
  for (const auto& row : p.p)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("emission scores must be finite");
  for (const auto& row : a.a)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("transition scores must be finite");
}

void check_labels(const EmissionMatrix& p, std::span<const int> labels) {
  if (labels.size() != p.length())
    throw std::invalid_argument("label sequence length does not match emissions");
  for (int y : labels)
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
}

}  // namespace

namespace {

double score_unchecked(const EmissionMatrix& p, const TransitionMatrix& a,
                       std::span<const int> labels) {
  double s = a.a[TransitionMatrix::kStart][labels[0]];
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) s += a.a[labels[i]][labels[i + 1]];
  s += a.a[labels.back()][TransitionMatrix::kStop];
  for (std::size_t i = 0; i < labels.size(); ++i) s += p.p[i][labels[i]];
  return s;
}

}  // namespace

double sequence_score(const EmissionMatrix& p, const TransitionMatrix& a,
                      std::span<const int> labels) {
  check_finite(p, a);
  check_labels(p, labels);
  if (labels.empty()) throw std::invalid_argument("empty sequence");
  return score_unchecked(p, a, labels);
}

LabelSequence viterbi_decode(const EmissionMatrix& p, const TransitionMatrix& a) {
  check_finite(p, a);
  std::size_t n = p.length();
  if (n == 0) throw std::invalid_argument("empty sequence");

  // Suffix scores: beta[i][y] = best score of positions i..n-1 given label y
  // at i (including emission at i and the stop transition). Reconstructing
  // front to back and preferring label 0 on ties yields the lexicographically
  // smallest optimum.
  std::vector<std::array<double, kLabelCount>> beta(n);
  for (int y = 0; y < kLabelCount; ++y)
    beta[n - 1][y] = p.p[n - 1][y] + a.a[y][TransitionMatrix::kStop];
  for (std::size_t i = n - 1; i-- > 0;) {
    for (int y = 0; y < kLabelCount; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      for (int z = 0; z < kLabelCount; ++z) best = std::max(best, a.a[y][z] + beta[i + 1][z]);
      beta[i][y] = p.p[i][y] + best;
    }
  }

  LabelSequence out;
  out.labels.resize(n);
  double best0 = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int y = 0; y < kLabelCount; ++y) {
    double s = a.a[TransitionMatrix::kStart][y] + beta[0][y];
    if (s > best0) {
      best0 = s;
      pick = y;
    }
  }
  out.labels[0] = pick;
  out.score = best0;
  for (std::size_t i = 1; i < n; ++i) {
    int prev = out.labels[i - 1];
    double best = -std::numeric_limits<double>::infinity();
    pick = 0;
    for (int y = 0; y < kLabelCount; ++y) {
      double s = a.a[prev][y] + beta[i][y];
      if (s > best) {
        best = s;
        pick = y;
      }
    }
    out.labels[i] = pick;
  }
  return out;
}

double crf_potential(const EmissionMatrix& p, const TransitionMatrix& a,
                     std::span<const int> labels) {
  check_finite(p, a);
  check_labels(p, labels);
  std::size_t n = p.length();
  if (n == 0) throw std::invalid_argument("empty sequence");
  if (n > 20) throw std::invalid_argument("crf_potential supports n <= 20");

  double target = score_unchecked(p, a, labels);

  // Exact partition function by enumeration, stabilized by the max score.
  std::vector<int> y(n);
  double max_score = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  scores.reserve(std::size_t{1} << n);
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) y[i] = (bits >> i) & 1;
    double s = score_unchecked(p, a, y);
    scores.push_back(s);
    max_score = std::max(max_score, s);
  }
  long double z = 0;
  for (double s : scores) z += std::exp(static_cast<long double>(s - max_score));
  return static_cast<double>(std::exp(static_cast<long double>(target - max_score)) / z);
}

EmissionMatrix lexicon_emissions(const TokenizedQuestion& tq, const MentionLexicon& lex) {
  EmissionMatrix em;
  em.p.resize(tq.tokens.size());
  auto hits = find_mentions(tq, lex);
  for (std::size_t i = 0; i < tq.tokens.size(); ++i) {
    const Token& t = tq.tokens[i];
    bool covered = false;
    for (const MentionHit& h : hits) {
      if (t.begin >= h.begin && t.end <= h.end) {
        covered = true;
        break;
      }
    }
    double e1 = covered ? 1.0 : -1.0;
    em.p[i] = {-e1, e1};
  }
  return em;
}

}  // namespace kbqa
