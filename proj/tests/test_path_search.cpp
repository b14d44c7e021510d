#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "oracles.hpp"

#include "kbqa/path_search.hpp"
#include "kbqa/pipeline.hpp"

using namespace kbqa;
using testing::kb_from_string;
using testing::kb_line;
using testing::lex_from_pairs;
using testing::TempFile;

namespace {

std::set<std::string> key_set(const std::vector<ScoredPath>& paths) {
  std::set<std::string> keys;
  for (const auto& p : paths) keys.insert(path_key(p.path));
  return keys;
}

std::set<std::string> key_set(const std::vector<QueryPath>& paths) {
  std::set<std::string> keys;
  for (const auto& p : paths) keys.insert(path_key(p));
  return keys;
}

}  // namespace

TEST_CASE("ngram scorer: identical, disjoint, and the worked half-overlap") {
  NgramScorer scorer;
  auto s = scorer.score_batch("abc", {"abc", "xyz", "abd"});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(0.5));  // {ab,bc} vs {ab,bd}
}

TEST_CASE("ngram scorer handles strings shorter than the gram size") {
  NgramScorer scorer;
  auto s = scorer.score_batch("a", {"a", "b"});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
}

TEST_CASE("external scorer: a constant stub scores everything 0.5") {
  TempFile stub(
      "import sys, json\n"
      "for line in sys.stdin:\n"
      "    req = json.loads(line)\n"
      "    print(json.dumps({\"scores\": [0.5]*len(req[\"c\"])}), flush=True)\n",
      ".py");
  ExternalScorer scorer("python3 " + stub.path());
  auto s = scorer.score_batch("q", {"a", "b", "c"});
  REQUIRE(s.size() == 3);
  for (double v : s) CHECK(v == doctest::Approx(0.5));
  // repeated batches over the same process
  auto s2 = scorer.score_batch("q2", {"x"});
  CHECK(s2.size() == 1);
}

TEST_CASE("external scorer: wrong arity and death raise ScorerError") {
  TempFile wrong(
      "import sys, json\n"
      "for line in sys.stdin:\n"
      "    req = json.loads(line)\n"
      "    print(json.dumps({\"scores\": [0.5]*(len(req[\"c\"])-1)}), flush=True)\n",
      ".py");
  ExternalScorer bad("python3 " + wrong.path());
  CHECK_THROWS_AS(bad.score_batch("q", {"a", "b"}), ScorerError);

  ExternalScorer dead("python3 -c 'import sys; sys.exit(1)'");
  CHECK_THROWS_AS(dead.score_batch("q", {"a"}), ScorerError);

  TempFile junk(
      "import sys\n"
      "for line in sys.stdin:\n"
      "    print('not json', flush=True)\n",
      ".py");
  ExternalScorer malformed("python3 " + junk.path());
  CHECK_THROWS_AS(malformed.score_batch("q", {"a"}), ScorerError);
}

TEST_CASE("external scorer clamps scores into [0,1]") {
  TempFile stub(
      "import sys, json\n"
      "for line in sys.stdin:\n"
      "    req = json.loads(line)\n"
      "    print(json.dumps({\"scores\": [3.7, -1.0][:len(req[\"c\"])]}), flush=True)\n",
      ".py");
  ExternalScorer scorer("python3 " + stub.path());
  auto s = scorer.score_batch("q", {"a", "b"});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
}

TEST_CASE("a Dice stub over the wire reproduces the in-process scorer bit for bit") {
  TempFile stub(
      "import sys, json\n"
      "from collections import Counter\n"
      "def grams(s):\n"
      "    return Counter([s[i:i+2] for i in range(len(s)-1)])\n"
      "for line in sys.stdin:\n"
      "    req = json.loads(line)\n"
      "    qg = grams(req['q'])\n"
      "    out = []\n"
      "    for c in req['c']:\n"
      "        cg = grams(c)\n"
      "        tot = sum(qg.values()) + sum(cg.values())\n"
      "        if tot == 0:\n"
      "            out.append(1.0 if req['q'] == c else 0.0)\n"
      "        else:\n"
      "            shared = sum(min(qg[k], cg[k]) for k in qg)\n"
      "            out.append(2.0*shared/tot)\n"
      "    print(json.dumps({'scores': out}), flush=True)\n",
      ".py");
  ExternalScorer remote("python3 " + stub.path());
  NgramScorer local;
  std::vector<std::string> cands{"director_of Avatar", "actor_of Avatar", "abc", "日本語"};
  auto a = remote.score_batch("who directed Avatar", cands);
  auto b = local.score_batch("who directed Avatar", cands);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("beam K=1 on a one-hop star keeps the director path, score computed by hand") {
  auto kb = kb_from_string(kb_line("Cameron", "director_of", "Avatar") +
                           kb_line("Worthington", "actor_of", "Avatar"));
  auto lex = lex_from_pairs({{"Avatar", "Avatar"}});
  NgramScorer scorer;
  SchemaAssignment a{schema_by_id("S1"), {"Avatar"}};
  BeamConfig cfg;
  cfg.beam_size = 1;
  auto out = beam_generate(kb, "who directed Avatar", a, lex, scorer, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].path.branches[0].hops[0].relation == "director_of");
  CHECK(out[0].path.branches[0].hops[0].direction == Direction::Backward);
  CHECK(out[0].verbalization == "director_of Avatar");
  // 18 question bigrams, 17 candidate bigrams, 11 shared
  CHECK(out[0].score == doctest::Approx(22.0 / 35.0));
}

TEST_CASE("with no effective pruning the beam equals the exhaustive baseline") {
  auto kb = kb_from_string(kb_line("e", "a", "X") + kb_line("e", "b", "Y") +
                           kb_line("e", "c", "Z") + kb_line("X", "d", "W"));
  auto lex = lex_from_pairs({{"e", "e"}});
  NgramScorer scorer;
  for (const char* sid : {"S1", "S2", "S3"}) {
    SchemaAssignment a{schema_by_id(sid), {"e"}};
    BeamConfig cfg;
    cfg.beam_size = 64;  // above every frontier in this KB
    auto beam = beam_generate(kb, "whatever", a, lex, scorer, cfg);
    auto brute = brute_force_generate(kb, a);
    CHECK(key_set(beam) == key_set(brute));
  }
}

TEST_CASE("the two-hop chain example survives beam size 2 on a five-relation toy KB") {
  auto kb = kb_from_string(kb_line("Cameron", "director_of", "Avator") +
                           kb_line("Weaver", "actor_of", "Avator") +
                           kb_line("Fox", "producer_of", "Avator") +
                           kb_line("Horner", "composer_of", "Avator") +
                           kb_line("Landau", "editor_of", "Avator") +
                           kb_line("Amis", "wife_of", "Cameron"));
  auto lex = lex_from_pairs({{"Avator", "Avator"}});
  NgramScorer scorer;
  SchemaAssignment a{schema_by_id("S2"), {"Avator"}};

  auto brute = brute_force_generate(kb, a);
  REQUIRE(brute.size() == 1);  // only Cameron extends to a second hop
  std::string gold = path_key(brute[0]);
  CHECK(brute[0].branches[0].hops[0].relation == "director_of");
  CHECK(brute[0].branches[0].hops[1].relation == "wife_of");

  BeamConfig cfg;
  cfg.beam_size = 2;
  auto beam = beam_generate(kb, "Whose husband is the director of Avator", a, lex, scorer, cfg);
  CHECK(key_set(beam).count(gold) == 1);
}

TEST_CASE("brute force on an empty KB is empty; chains obey the counting rules") {
  auto empty = kb_from_string("");
  SchemaAssignment a{schema_by_id("S2"), {"A"}};
  CHECK(brute_force_generate(empty, a).empty());

  auto chain = kb_from_string(kb_line("A", "r1", "B") + kb_line("B", "r2", "C"));
  auto paths = brute_force_generate(chain, a);
  // exactly one 2-hop path: forward r1 then forward r2 (the back-edge B->A is
  // excluded, and C has no further hop)
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].branches[0].hops[0].relation == "r1");
  CHECK(paths[0].branches[0].hops[0].direction == Direction::Forward);
  CHECK(paths[0].branches[0].hops[1].relation == "r2");
}

TEST_CASE("beam output is always a subset of brute force, and grows with K") {
  Rng rng(43);
  NgramScorer scorer;
  for (int round = 0; round < 6; ++round) {
    testing::RandomKbSpec spec;
    spec.entities = 18;
    spec.predicates = 5;
    spec.triples = 60;
    auto kb = kb_from_string(testing::random_kb_text(rng, spec));
    auto lex = lex_from_pairs({{"E1", "E1"}, {"E2", "E2"}});
    std::string question = "what is r1 r0 E1";

    for (const char* sid : {"S2", "S4", "S6"}) {
      const Schema* schema = schema_by_id(sid);
      SchemaAssignment a{schema, {"E1"}};
      if (schema->entity_slots() == 2) a.roots.push_back("E2");
      auto brute = key_set(brute_force_generate(kb, a));

      std::set<std::string> prev;
      for (std::size_t k : {1, 2, 3, 5, 9, 1000}) {
        BeamConfig cfg;
        cfg.beam_size = k;
        auto keys = key_set(beam_generate(kb, question, a, lex, scorer, cfg));
        CHECK(std::includes(brute.begin(), brute.end(), keys.begin(), keys.end()));
        CHECK(std::includes(keys.begin(), keys.end(), prev.begin(), prev.end()));
        prev = keys;
      }
      CHECK(prev == brute);  // K = 1000 exceeds every frontier here
    }
  }
}

TEST_CASE("every emitted complete path executes to a non-empty answer") {
  Rng rng(47);
  NgramScorer scorer;
  for (int round = 0; round < 4; ++round) {
    testing::RandomKbSpec spec;
    spec.entities = 15;
    spec.predicates = 4;
    spec.triples = 50;
    auto kb = kb_from_string(testing::random_kb_text(rng, spec));
    auto lex = lex_from_pairs({{"E1", "E1"}});
    for (const Schema& schema : builtin_schemas()) {
      SchemaAssignment a{&schema, {"E1"}};
      for (std::size_t s = 1; s < schema.entity_slots(); ++s)
        a.roots.push_back("E" + std::to_string(s + 1));
      BeamConfig cfg;
      cfg.beam_size = 4;
      for (const ScoredPath& sp : beam_generate(kb, "q", a, lex, scorer, cfg))
        CHECK(!execute_path(kb, sp.path).empty());
    }
  }
}

TEST_CASE("generation is deterministic") {
  Rng rng(53);
  auto kb = kb_from_string(testing::random_kb_text(rng));
  auto lex = lex_from_pairs({{"E1", "E1"}, {"E2", "E2"}});
  NgramScorer scorer;
  SchemaAssignment a{schema_by_id("S4"), {"E1", "E2"}};
  BeamConfig cfg;
  cfg.beam_size = 3;
  auto first = beam_generate(kb, "what r0 E1 r1 E2", a, lex, scorer, cfg);
  auto second = beam_generate(kb, "what r0 E1 r1 E2", a, lex, scorer, cfg);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(path_key(first[i].path) == path_key(second[i].path));
    CHECK(first[i].score == second[i].score);
  }
}

TEST_CASE("an unknown topic entity yields an empty result") {
  auto kb = kb_from_string(kb_line("A", "r", "B"));
  auto lex = lex_from_pairs({{"A", "A"}});
  NgramScorer scorer;
  SchemaAssignment a{schema_by_id("S1"), {"Martian"}};
  CHECK(beam_generate(kb, "q", a, lex, scorer, BeamConfig{}).empty());
  CHECK(brute_force_generate(kb, a).empty());
}

TEST_CASE("beam config validation") {
  auto kb = kb_from_string(kb_line("A", "r", "B"));
  auto lex = lex_from_pairs({{"A", "A"}});
  NgramScorer scorer;
  SchemaAssignment a{schema_by_id("S1"), {"A"}};
  BeamConfig zero;
  zero.beam_size = 0;
  CHECK_THROWS_AS(beam_generate(kb, "q", a, lex, scorer, zero), std::invalid_argument);
  BeamConfig bad_hop;
  bad_hop.apply_at_hops = {0, 1};
  CHECK_THROWS_AS(beam_generate(kb, "q", a, lex, scorer, bad_hop), std::invalid_argument);
  BeamConfig deep_hop;
  deep_hop.apply_at_hops = {4};
  CHECK_THROWS_AS(beam_generate(kb, "q", a, lex, scorer, deep_hop), std::invalid_argument);
}

TEST_CASE("S8 generates only its directed pattern, a subset of S4's free search") {
  auto kb = kb_from_string(kb_line("E1", "r1", "X") + kb_line("X", "r2", "E2") +
                           kb_line("E2", "r3", "X"));
  auto lex = lex_from_pairs({{"E1", "E1"}, {"E2", "E2"}});
  NgramScorer scorer;
  BeamConfig cfg;
  cfg.beam_size = 100;

  SchemaAssignment s8{schema_by_id("S8"), {"E1", "E2"}};
  auto out8 = beam_generate(kb, "q", s8, lex, scorer, cfg);
  REQUIRE(out8.size() == 1);
  CHECK(out8[0].path.branches[0].hops[0].direction == Direction::Forward);
  CHECK(out8[0].path.branches[0].hops[0].relation == "r1");
  CHECK(out8[0].path.branches[1].hops[0].direction == Direction::Backward);
  CHECK(out8[0].path.branches[1].hops[0].relation == "r2");

  SchemaAssignment s4{schema_by_id("S4"), {"E1", "E2"}};
  auto out4 = beam_generate(kb, "q", s4, lex, scorer, cfg);
  CHECK(out4.size() == 2);  // the S8 pattern plus the r3 forward pattern
}

namespace {

struct BenchFixture {
  std::string kb_text;
  KnowledgeBase kb;
  MentionLexicon lex;
  std::vector<BenchmarkQuestion> questions;

  BenchFixture() {
    // 12 roots, fan-out 6 at each hop; relation labels share a common prefix
    // so Dice scores are close but distinguishable.
    for (int r = 0; r < 12; ++r) {
      std::string root = "Root" + std::to_string(r);
      for (int i = 0; i < 6; ++i) {
        std::string mid = root + "_m" + std::to_string(i);
        kb_text += testing::kb_line(root, "rel_" + std::to_string(r) + "_" + std::to_string(i),
                                    mid);
        for (int j = 0; j < 6; ++j)
          kb_text += testing::kb_line(
              mid, "sub_" + std::to_string(r) + "_" + std::to_string(i) + "_" + std::to_string(j),
              mid + "_t" + std::to_string(j));
      }
    }
    kb = testing::kb_from_string(kb_text);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int r = 0; r < 12; ++r)
      pairs.emplace_back("Root" + std::to_string(r), "Root" + std::to_string(r));
    lex = MentionLexicon::from_pairs(pairs);

    Rng rng(71);
    for (int r = 0; r < 12; ++r) {
      std::string root = "Root" + std::to_string(r);
      int i = static_cast<int>(rng.below(6));
      int j = static_cast<int>(rng.below(6));
      QueryPath gold;
      gold.schema_id = "S2";
      gold.branches = {Branch{
          root,
          {Hop{"rel_" + std::to_string(r) + "_" + std::to_string(i), Direction::Forward, {}},
           Hop{"sub_" + std::to_string(r) + "_" + std::to_string(i) + "_" + std::to_string(j),
               Direction::Forward, {}}}}};
      MentionLexicon dummy;
      BenchmarkQuestion q;
      q.id = "b" + std::to_string(r);
      q.question = "what is " + verbalize(gold, lex);
      q.gold = gold;
      questions.push_back(std::move(q));
    }
  }
};

}  // namespace

TEST_CASE("beam benchmark: monotone curves, exhaustive endpoint, CSV shape") {
  BenchFixture fx;
  NgramScorer scorer;
  std::vector<std::size_t> ks{1, 2, 4, 6};
  auto rows = beam_benchmark(fx.kb, fx.questions, fx.lex, scorer, ks, BeamConfig{});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].recall >= rows[i - 1].recall);
    CHECK(rows[i].avg_paths >= rows[i - 1].avg_paths);
  }
  // K = 6 equals the full fan-out: nothing pruned, recall 1, reduction 0
  CHECK(rows.back().recall == doctest::Approx(1.0));
  CHECK(rows.back().reduction == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rows.back().avg_paths == doctest::Approx(36.0));
  // K = 1 keeps one sub-tree: 6 paths
  CHECK(rows.front().avg_paths == doctest::Approx(6.0));

  std::string csv = benchmark_csv(rows);
  CHECK(csv.rfind("beam_size,recall,avg_paths,reduction\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("benchmark questions with malformed gold are skipped with a warning") {
  BenchFixture fx;
  NgramScorer scorer;
  auto broken = fx.questions;
  broken[0].gold.branches.clear();  // malformed: no branches
  std::vector<std::size_t> ks{2};
  auto rows = beam_benchmark(fx.kb, broken, fx.lex, scorer, ks, BeamConfig{});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].avg_paths > 0.0);
}
