#pragma once
// Mention dictionary: exact-match lookup from surface mentions to KB entity
// labels, forward-maximum-matching tokenization, and exhaustive mention
// spotting. Immutable once built; all operations are pure.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbqa/kb_store.hpp"

namespace kbqa {

struct Token {
  std::string text;
  std::size_t begin;  // character offsets into the question
  std::size_t end;
};

struct TokenizedQuestion {
  std::string text;
  std::vector<Token> tokens;

  std::vector<std::string> token_texts() const;
};

struct MentionHit {
  std::string mention;  // surface form as it appears in the question
  std::size_t begin;    // character offsets
  std::size_t end;
  std::vector<std::string> entities;  // sorted ascending
};

class MentionLexicon {
 public:
  // File format: one `mention<TAB>entity` per line, UTF-8; `#` comments.
  // Duplicate pairs are deduplicated. When `fold` is set, matching is done on
  // case/width-folded text (see utf8::fold); default is exact match.
  static MentionLexicon load_file(const std::string& path, bool fold = false);
  static MentionLexicon load_stream(std::istream& in, const std::string& name,
                                    bool fold = false);
  static MentionLexicon from_pairs(
      std::span<const std::pair<std::string, std::string>> pairs, bool fold = false);

  // Adds every KB subject as a mention of itself (the dictionary "consisting
  // of all subjects in KB"). Predicates are not added.
  void add_kb_subjects(const KnowledgeBase& kb);

  bool contains(std::string_view mention) const;
  // Entity labels for an exact mention, sorted ascending; empty if absent.
  std::vector<std::string> entities_for(std::string_view mention) const;
  // Shortest mention mapping to `entity` (ties: lexicographically smallest).
  std::optional<std::string> shortest_mention_of(std::string_view entity) const;

  std::size_t pair_count() const { return pair_count_; }
  std::size_t max_mention_chars() const { return max_mention_chars_; }
  bool folded() const { return fold_; }
  std::string fold_key(std::string_view s) const;

 private:
  void add_pair(std::string_view mention, std::string_view entity);

  bool fold_ = false;
  std::size_t pair_count_ = 0;
  std::size_t max_mention_chars_ = 0;
  std::unordered_map<std::string, std::vector<std::string>> entries_;  // key is folded
  std::unordered_map<std::string, std::vector<std::string>> mentions_of_entity_;
};

// Forward maximum matching: at each position take the longest lexicon mention
// starting there; otherwise emit a single character. Token texts tile the
// input byte-for-byte.
TokenizedQuestion tokenize(std::string_view text, const MentionLexicon& lex);

// Every substring of the question present in the lexicon, with all its
// entities; overlapping and nested hits are all reported. Sorted by
// (begin, end).
std::vector<MentionHit> find_mentions(const TokenizedQuestion& tq, const MentionLexicon& lex);

}  // namespace kbqa
