#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"

#include "kbqa/utf8.hpp"

using namespace kbqa;
using testing::lex_from_pairs;

namespace {

MentionLexicon lex_from_text(const std::string& text, bool fold = false) {
  std::istringstream in(text);
  return MentionLexicon::load_stream(in, "<test>", fold);
}

}  // namespace

TEST_CASE("duplicate pairs are deduplicated") {
  auto lex = lex_from_text("ab\tE1\nc\tE2\nab\tE1\n");
  CHECK(lex.pair_count() == 2);
  CHECK(lex.entities_for("ab") == std::vector<std::string>{"E1"});
}

TEST_CASE("a mention mapping to two entities returns both, sorted") {
  auto lex = lex_from_text("m\tE2\nm\tE1\n");
  CHECK(lex.entities_for("m") == std::vector<std::string>{"E1", "E2"});
}

TEST_CASE("malformed lexicon lines name their line number") {
  CHECK_THROWS_WITH_AS(lex_from_text("justone\n"), doctest::Contains("<test>:1"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(lex_from_text("a\tE\nx\ty\tz\n"), doctest::Contains("<test>:2"),
                       std::runtime_error);
  CHECK_THROWS_AS(lex_from_text("\tE\n"), std::runtime_error);
}

TEST_CASE("1000 synthetic pairs are all retrievable") {
  std::string text;
  for (int i = 0; i < 1000; ++i)
    text += "m" + std::to_string(i) + "\tE" + std::to_string(i) + "\n";
  auto lex = lex_from_text(text);
  CHECK(lex.pair_count() == 1000);
  for (int i = 0; i < 1000; ++i) {
    auto ents = lex.entities_for("m" + std::to_string(i));
    REQUIRE(ents.size() == 1);
    CHECK(ents[0] == "E" + std::to_string(i));
  }
}

TEST_CASE("forward maximum matching basics") {
  auto lex = lex_from_pairs({{"ab", "E1"}, {"c", "E2"}});
  auto tq = tokenize("abc", lex);
  REQUIRE(tq.tokens.size() == 2);
  CHECK(tq.tokens[0].text == "ab");
  CHECK(tq.tokens[1].text == "c");

  auto empty = MentionLexicon{};
  auto tq2 = tokenize("xyz", empty);
  REQUIRE(tq2.tokens.size() == 3);
  CHECK(tq2.tokens[0].text == "x");
  CHECK(tq2.tokens[2].text == "z");
}

TEST_CASE("forward maximum matching takes the longest match, greedily left to right") {
  // At position 0 the longest hit is "abc", leaving "d" as a single char,
  // even though "ab" + "bcd" would also tile the string.
  auto lex = lex_from_pairs({{"abc", "E1"}, {"ab", "E2"}, {"bcd", "E3"}});
  auto tq = tokenize("abcd", lex);
  REQUIRE(tq.tokens.size() == 2);
  CHECK(tq.tokens[0].text == "abc");
  CHECK(tq.tokens[1].text == "d");
}

TEST_CASE("token texts tile the input byte-for-byte, for arbitrary bytes") {
  auto lex = lex_from_pairs({{"日本", "E1"}, {"ab", "E2"}, {"本語x", "E3"}});
  Rng rng(5);
  for (int round = 0; round < 300; ++round) {
    // Mix of valid UTF-8 snippets and raw bytes, including malformed leads.
    std::string s;
    std::size_t pieces = rng.below(12);
    for (std::size_t i = 0; i < pieces; ++i) {
      switch (rng.below(5)) {
        case 0: s += "日本語"; break;
        case 1: s += "ab"; break;
        case 2: s.push_back(static_cast<char>(rng.below(256))); break;
        case 3: s += "x"; break;
        default: s += "\xE6\x97"; break;  // truncated multi-byte sequence
      }
    }
    auto tq = tokenize(s, lex);
    std::string rebuilt;
    std::size_t prev_end = 0;
    bool offsets_ok = true;
    for (const Token& t : tq.tokens) {
      rebuilt += t.text;
      offsets_ok &= (t.begin == prev_end) && (t.end > t.begin);
      prev_end = t.end;
    }
    CHECK(rebuilt == s);
    CHECK(offsets_ok);
  }
}

TEST_CASE("tokenize is deterministic") {
  auto lex = lex_from_pairs({{"ab", "E1"}, {"bc", "E2"}});
  auto a = tokenize("xabcx", lex);
  auto b = tokenize("xabcx", lex);
  REQUIRE(a.tokens.size() == b.tokens.size());
  for (std::size_t i = 0; i < a.tokens.size(); ++i) CHECK(a.tokens[i].text == b.tokens[i].text);
}

TEST_CASE("find_mentions spots a linked film title with its span") {
  auto lex = lex_from_pairs({{"Avatar", "Avatar_film"}});
  auto tq = tokenize("Who directed Avatar", lex);
  auto hits = find_mentions(tq, lex);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].mention == "Avatar");
  CHECK(hits[0].begin == 13);
  CHECK(hits[0].end == 19);
  CHECK(hits[0].entities == std::vector<std::string>{"Avatar_film"});
}

TEST_CASE("find_mentions: no hits yields an empty list") {
  auto lex = lex_from_pairs({{"zzz", "E"}});
  auto tq = tokenize("nothing here", lex);
  CHECK(find_mentions(tq, lex).empty());
}

TEST_CASE("nested mentions are all reported") {
  auto lex = lex_from_pairs({{"AB", "E1"}, {"A", "E2"}});
  auto tq = tokenize("xABy", lex);
  auto hits = find_mentions(tq, lex);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].mention == "A");
  CHECK(hits[0].begin == 1);
  CHECK(hits[1].mention == "AB");
  CHECK(hits[1].begin == 1);
  CHECK(hits[1].end == 3);
}

TEST_CASE("find_mentions equals the exhaustive substring scan on short questions") {
  std::vector<std::string> mentions{"ab", "b", "bc", "abc", "日本", "x日"};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& m : mentions) pairs.emplace_back(m, "E_" + m);
  auto lex = lex_from_pairs(pairs);

  Rng rng(17);
  const std::string alphabet[] = {"a", "b", "c", "x", "日", "本"};
  for (int round = 0; round < 200; ++round) {
    std::string q;
    std::size_t len = 1 + rng.below(64);
    for (std::size_t i = 0; i < len; ++i) q += alphabet[rng.below(6)];
    auto tq = tokenize(q, lex);
    auto hits = find_mentions(tq, lex);
    auto expect = oracle::mentions_scan(q, mentions);
    REQUIRE(hits.size() == expect.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      auto [m, b, e] = expect[i];
      CHECK(hits[i].mention == m);
      CHECK(hits[i].begin == b);
      CHECK(hits[i].end == e);
    }
  }
}

TEST_CASE("offsets are in characters, not bytes") {
  auto lex = lex_from_pairs({{"日本", "JP"}});
  auto tq = tokenize("x日本y", lex);
  auto hits = find_mentions(tq, lex);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].begin == 1);
  CHECK(hits[0].end == 3);
}

TEST_CASE("case folding is off by default and applies when enabled") {
  auto exact = lex_from_pairs({{"Avatar", "E1"}});
  CHECK(exact.entities_for("avatar").empty());

  auto folded = lex_from_pairs({{"Avatar", "E1"}}, /*fold=*/true);
  CHECK(folded.entities_for("AVATAR") == std::vector<std::string>{"E1"});
  CHECK(folded.entities_for("avatar") == std::vector<std::string>{"E1"});
  // fullwidth forms fold to their ASCII counterparts
  CHECK(folded.entities_for("Ａvatar") == std::vector<std::string>{"E1"});
}

TEST_CASE("shortest_mention_of prefers the shortest surface form") {
  auto lex = lex_from_pairs({{"The Film Avatar", "E1"}, {"Avatar", "E1"}, {"Avatr", "E2"}});
  CHECK(lex.shortest_mention_of("E1") == std::string("Avatar"));
  CHECK(lex.shortest_mention_of("nope") == std::nullopt);
}

TEST_CASE("add_kb_subjects maps each subject to itself") {
  auto kb = testing::kb_from_string(testing::kb_line("Avatar_film", "director", "Cameron"));
  auto lex = lex_from_pairs({{"Avatar", "Avatar_film"}});
  lex.add_kb_subjects(kb);
  CHECK(lex.entities_for("Avatar_film") == std::vector<std::string>{"Avatar_film"});
  // predicates are not added
  CHECK(lex.entities_for("director").empty());
}
