#pragma once
// Artificial question construction: seeded random walks instantiate the
// predefined schemas against the KB, the verbalized path plus a per-schema
// question prefix becomes the question text, and executing the path yields
// the recorded gold answers.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kbqa/classifier.hpp"
#include "kbqa/kb_store.hpp"
#include "kbqa/lexicon.hpp"
#include "kbqa/schemas.hpp"

namespace kbqa {

struct SyntheticSample {
  std::string id;
  std::string question;
  std::string schema_id;
  QueryPath gold_path;
  std::vector<Node> answers;  // sorted, deduplicated
  QuestionClass label = QuestionClass::OneEntity;

  bool operator==(const SyntheticSample&) const = default;
};

// Per-schema question-word prefixes. The builtin table is English; a file of
// `schema<TAB>prefix` lines replaces it.
struct SynthTemplates {
  std::map<std::string, std::string> prefix_by_schema;

  static SynthTemplates builtin();
  static SynthTemplates load_file(const std::string& path);
};

// Apportions `count` across schemas by largest remainder over `ratios`
// (which must sum to 1 within 1e-9 and name known schemas), then walks each
// quota. A walk failing 50 consecutive attempts skips the rest of its
// schema's quota with a warning; producing nothing at all is an error.
std::vector<SyntheticSample> generate_samples(const KnowledgeBase& kb,
                                              const MentionLexicon& lex, std::size_t count,
                                              const std::map<std::string, double>& ratios,
                                              std::uint64_t seed,
                                              const SynthTemplates& templates);

void export_samples_jsonl(std::span<const SyntheticSample> samples, std::ostream& out);
void export_samples_jsonl(std::span<const SyntheticSample> samples, const std::string& path);
std::vector<SyntheticSample> load_samples_jsonl(const std::string& path);

}  // namespace kbqa
