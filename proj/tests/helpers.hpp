#pragma once
// Random fixtures and scratch files shared by the test suites.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"
#include "kbqa/rng.hpp"

namespace testing {

inline std::string kb_line(const std::string& s, const std::string& p, const std::string& o) {
  return s + "\t" + p + "\t" + o + "\n";
}

inline kbqa::KnowledgeBase kb_from_string(const std::string& text) {
  std::istringstream in(text);
  return kbqa::KnowledgeBase::load_stream(in, "<test>");
}

inline kbqa::MentionLexicon lex_from_pairs(
    std::vector<std::pair<std::string, std::string>> pairs, bool fold = false) {
  return kbqa::MentionLexicon::from_pairs(pairs, fold);
}

struct RandomKbSpec {
  std::size_t entities = 40;
  std::size_t predicates = 8;
  std::size_t triples = 120;
  double literal_fraction = 0.15;
  // Zero-pad numeric suffixes to this width. Fixed-width labels cannot be
  // substrings of one another, which matters for mention-spotting fixtures.
  int label_width = 0;
};

inline std::string numbered(const char* prefix, std::uint64_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width)
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

// Random KB text with entity labels E0.., predicates r0.., literal objects
// quoted. Duplicate lines may occur; the loader's set semantics absorb them.
inline std::string random_kb_text(kbqa::Rng& rng, const RandomKbSpec& spec = {}) {
  std::string text;
  for (std::size_t i = 0; i < spec.triples; ++i) {
    std::string s = numbered("E", rng.below(spec.entities), spec.label_width);
    std::string p = numbered("r", rng.below(spec.predicates), spec.label_width);
    std::string o;
    if (rng.unit() < spec.literal_fraction)
      o = "\"" + numbered("v", rng.below(spec.entities), spec.label_width) + "\"";
    else
      o = numbered("E", rng.below(spec.entities), spec.label_width);
    text += kb_line(s, p, o);
  }
  return text;
}

class TempFile {
 public:
  explicit TempFile(const std::string& contents, const std::string& suffix = ".txt") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("kbqa_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
              suffix))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testing
