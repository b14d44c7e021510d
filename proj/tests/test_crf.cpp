#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace kbqa;

namespace {

EmissionMatrix random_emissions(Rng& rng, std::size_t n, double scale = 3.0) {
  EmissionMatrix em;
  em.p.resize(n);
  for (auto& row : em.p)
    for (double& v : row) v = (rng.unit() * 2.0 - 1.0) * scale;
  return em;
}

TransitionMatrix random_transitions(Rng& rng, double scale = 3.0) {
  TransitionMatrix a;
  for (auto& row : a.a)
    for (double& v : row) v = (rng.unit() * 2.0 - 1.0) * scale;
  return a;
}

}  // namespace

TEST_CASE("single emission, zero transitions") {
  EmissionMatrix p;
  p.p = {{0.5, 1.5}};
  auto a = TransitionMatrix::zeros();
  std::vector<int> y{1};
  CHECK(sequence_score(p, a, y) == doctest::Approx(1.5));
}

TEST_CASE("single transition contributes its score") {
  EmissionMatrix p;
  p.p = {{0.0, 0.0}, {0.0, 0.0}};
  auto a = TransitionMatrix::zeros();
  a.a[1][1] = 2.0;
  std::vector<int> y{1, 1};
  CHECK(sequence_score(p, a, y) == doctest::Approx(2.0));
}

TEST_CASE("start and stop transitions are part of the score") {
  EmissionMatrix p;
  p.p = {{0.0, 0.0}};
  auto a = TransitionMatrix::zeros();
  a.a[TransitionMatrix::kStart][1] = 0.25;
  a.a[1][TransitionMatrix::kStop] = 0.5;
  std::vector<int> y1{1};
  std::vector<int> y0{0};
  CHECK(sequence_score(p, a, y1) == doctest::Approx(0.75));
  CHECK(sequence_score(p, a, y0) == doctest::Approx(0.0));
}

TEST_CASE("sequence_score equals an independent re-summation on random instances") {
  Rng rng(3);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 1 + rng.below(8);
    auto p = random_emissions(rng, n);
    auto a = random_transitions(rng);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(2));

    double expect = a.a[TransitionMatrix::kStart][y[0]];
    for (std::size_t i = 0; i + 1 < n; ++i) expect += a.a[y[i]][y[i + 1]];
    expect += a.a[y[n - 1]][TransitionMatrix::kStop];
    for (std::size_t i = 0; i < n; ++i) expect += p.p[i][y[i]];

    CHECK(sequence_score(p, a, y) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("length mismatch, bad labels, and non-finite scores are rejected") {
  EmissionMatrix p;
  p.p = {{0.0, 0.0}, {0.0, 0.0}};
  auto a = TransitionMatrix::zeros();
  std::vector<int> too_short{1};
  std::vector<int> bad{1, 2};
  CHECK_THROWS_AS(sequence_score(p, a, too_short), std::invalid_argument);
  CHECK_THROWS_AS(sequence_score(p, a, bad), std::invalid_argument);

  EmissionMatrix nan_p = p;
  nan_p.p[0][1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(viterbi_decode(nan_p, a), std::invalid_argument);
  TransitionMatrix inf_a = a;
  inf_a.a[0][1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(viterbi_decode(p, inf_a), std::invalid_argument);
}

TEST_CASE("emissions strongly favoring label 1 decode to all ones") {
  EmissionMatrix p;
  p.p.assign(6, {-5.0, 5.0});
  auto decoded = viterbi_decode(p, TransitionMatrix::zeros());
  for (int y : decoded.labels) CHECK(y == 1);
}

TEST_CASE("viterbi equals exhaustive maximization on random instances up to n=12") {
  Rng rng(7);
  for (int round = 0; round < 300; ++round) {
    std::size_t n = 1 + rng.below(12);
    auto p = random_emissions(rng, n);
    auto a = random_transitions(rng);
    auto got = viterbi_decode(p, a);
    auto expect = oracle::viterbi_enumerate(p, a);
    CHECK(got.score == doctest::Approx(expect.score).epsilon(1e-12));
    CHECK(got.labels == expect.labels);
    CHECK(got.score == doctest::Approx(sequence_score(p, a, got.labels)).epsilon(1e-12));
  }
}

TEST_CASE("adversarial transitions beat unary emissions where the oracle says so") {
  // Emissions mildly prefer 1 everywhere but the 1->1 transition is so
  // costly that the optimum alternates or clears to zero.
  Rng rng(9);
  for (int round = 0; round < 40; ++round) {
    std::size_t n = 2 + rng.below(9);
    EmissionMatrix p;
    p.p.assign(n, {0.0, 0.4});
    auto a = TransitionMatrix::zeros();
    a.a[1][1] = -1.0 - rng.unit();
    auto got = viterbi_decode(p, a);
    auto expect = oracle::viterbi_enumerate(p, a);
    CHECK(got.labels == expect.labels);
    for (std::size_t i = 0; i + 1 < n; ++i) CHECK((got.labels[i] & got.labels[i + 1]) == 0);
  }
}

TEST_CASE("ties break toward the lexicographically smallest sequence") {
  EmissionMatrix p;
  p.p.assign(3, {0.0, 0.0});
  auto decoded = viterbi_decode(p, TransitionMatrix::zeros());
  CHECK(decoded.labels == std::vector<int>{0, 0, 0});
  CHECK(decoded.score == doctest::Approx(0.0));
}

TEST_CASE("adding a constant to every emission shifts scores by n*c, argmax unchanged") {
  Rng rng(13);
  for (int round = 0; round < 30; ++round) {
    std::size_t n = 1 + rng.below(8);
    auto p = random_emissions(rng, n);
    auto a = random_transitions(rng);
    double c = rng.unit() * 4.0 - 2.0;
    EmissionMatrix shifted = p;
    for (auto& row : shifted.p)
      for (double& v : row) v += c;
    auto base = viterbi_decode(p, a);
    auto moved = viterbi_decode(shifted, a);
    CHECK(moved.labels == base.labels);
    CHECK(moved.score ==
          doctest::Approx(base.score + static_cast<double>(n) * c).epsilon(1e-9));
  }
}

TEST_CASE("decoding swaps with a consistent relabeling of the two labels") {
  Rng rng(17);
  for (int round = 0; round < 40; ++round) {
    std::size_t n = 1 + rng.below(8);
    auto p = random_emissions(rng, n);
    auto a = random_transitions(rng);

    EmissionMatrix ps = p;
    for (auto& row : ps.p) std::swap(row[0], row[1]);
    TransitionMatrix as = a;
    std::swap(as.a[0][0], as.a[1][1]);
    std::swap(as.a[0][1], as.a[1][0]);
    std::swap(as.a[TransitionMatrix::kStart][0], as.a[TransitionMatrix::kStart][1]);
    std::swap(as.a[0][TransitionMatrix::kStop], as.a[1][TransitionMatrix::kStop]);

    auto base = viterbi_decode(p, a);
    auto swapped = viterbi_decode(ps, as);
    REQUIRE(base.labels.size() == swapped.labels.size());
    for (std::size_t i = 0; i < base.labels.size(); ++i)
      CHECK(swapped.labels[i] == 1 - base.labels[i]);
  }
}

TEST_CASE("uniform potentials: every n=2 sequence has probability 1/4") {
  EmissionMatrix p;
  p.p.assign(2, {0.0, 0.0});
  auto a = TransitionMatrix::zeros();
  for (int y0 : {0, 1})
    for (int y1 : {0, 1}) {
      std::vector<int> y{y0, y1};
      CHECK(crf_potential(p, a, y) == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("a sequence dominating by +100 saturates to probability 1") {
  EmissionMatrix p;
  p.p.assign(3, {0.0, 100.0 / 3.0});
  auto a = TransitionMatrix::zeros();
  std::vector<int> ones{1, 1, 1};
  CHECK(crf_potential(p, a, ones) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("potentials sum to 1 over all sequences") {
  Rng rng(19);
  for (std::size_t n : {1, 2, 5, 8, 12}) {
    auto p = random_emissions(rng, n);
    auto a = random_transitions(rng);
    long double total = 0;
    std::vector<int> y(n);
    for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n); ++bits) {
      for (std::size_t i = 0; i < n; ++i) y[i] = (bits >> i) & 1;
      total += crf_potential(p, a, y);
    }
    CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-9);
  }
}

TEST_CASE("crf_potential rejects oversized instances") {
  EmissionMatrix p;
  p.p.assign(21, {0.0, 0.0});
  std::vector<int> y(21, 0);
  CHECK_THROWS_AS(crf_potential(p, TransitionMatrix::zeros(), y), std::invalid_argument);
}

TEST_CASE("lexicon emissions mark mention-covered tokens") {
  auto lex = testing::lex_from_pairs({{"Avatar", "E1"}});

  auto covered = tokenize("Avatar", lex);
  auto em1 = lexicon_emissions(covered, lex);
  for (const auto& row : em1.p) CHECK(row[1] == doctest::Approx(1.0));

  auto uncovered = tokenize("zzz", lex);
  auto em0 = lexicon_emissions(uncovered, lex);
  for (const auto& row : em0.p) CHECK(row[1] == doctest::Approx(-1.0));

  // partial coverage follows the mention spans
  auto mixed = tokenize("xxAvatarxx", lex);
  auto hits = find_mentions(mixed, lex);
  REQUIRE(hits.size() == 1);
  auto em = lexicon_emissions(mixed, lex);
  for (std::size_t i = 0; i < mixed.tokens.size(); ++i) {
    const Token& t = mixed.tokens[i];
    bool inside = t.begin >= hits[0].begin && t.end <= hits[0].end;
    CHECK(em.p[i][1] == doctest::Approx(inside ? 1.0 : -1.0));
    CHECK(em.p[i][0] == doctest::Approx(-em.p[i][1]));
  }
}
