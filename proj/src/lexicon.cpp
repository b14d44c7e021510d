#include "kbqa/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "kbqa/utf8.hpp"

namespace kbqa {

std::vector<std::string> TokenizedQuestion::token_texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

std::string MentionLexicon::fold_key(std::string_view s) const {
  return fold_ ? utf8::fold(s) : std::string(s);
}

void MentionLexicon::add_pair(std::string_view mention, std::string_view entity) {
  std::string key = fold_key(mention);
  auto& ents = entries_[key];
  if (std::find(ents.begin(), ents.end(), entity) != ents.end()) return;  // duplicate pair
  ents.emplace_back(entity);
  std::sort(ents.begin(), ents.end());
  ++pair_count_;
  max_mention_chars_ = std::max(max_mention_chars_, utf8::char_count(key));

  auto& mens = mentions_of_entity_[std::string(entity)];
  std::string surface(mention);
  if (std::find(mens.begin(), mens.end(), surface) == mens.end()) {
    mens.push_back(std::move(surface));
    std::sort(mens.begin(), mens.end(), [](const std::string& a, const std::string& b) {
      std::size_t ca = utf8::char_count(a), cb = utf8::char_count(b);
      if (ca != cb) return ca < cb;
      return a < b;
    });
  }
}

MentionLexicon MentionLexicon::load_file(const std::string& path, bool fold) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open lexicon file");
  return load_stream(in, path, fold);
}

MentionLexicon MentionLexicon::load_stream(std::istream& in, const std::string& name,
                                           bool fold) {
  MentionLexicon lex;
  lex.fold_ = fold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": malformed lexicon line (expected mention<TAB>entity)");
    std::string_view mention(line.data(), tab);
    std::string_view entity(line.data() + tab + 1, line.size() - tab - 1);
    if (mention.empty() || entity.empty())
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty field");
    lex.add_pair(mention, entity);
  }
  return lex;
}

MentionLexicon MentionLexicon::from_pairs(
    std::span<const std::pair<std::string, std::string>> pairs, bool fold) {
  MentionLexicon lex;
  lex.fold_ = fold;
  for (const auto& [m, e] : pairs) {
    if (m.empty() || e.empty()) throw std::invalid_argument("lexicon pair with empty field");
    lex.add_pair(m, e);
  }
  return lex;
}

void MentionLexicon::add_kb_subjects(const KnowledgeBase& kb) {
  for (const Triple& t : kb.triples()) add_pair(t.subject, t.subject);
}

bool MentionLexicon::contains(std::string_view mention) const {
  return entries_.find(fold_key(mention)) != entries_.end();
}

std::vector<std::string> MentionLexicon::entities_for(std::string_view mention) const {
  auto it = entries_.find(fold_key(mention));
  if (it == entries_.end()) return {};
  return it->second;
}

std::optional<std::string> MentionLexicon::shortest_mention_of(std::string_view entity) const {
  auto it = mentions_of_entity_.find(std::string(entity));
  if (it == mentions_of_entity_.end() || it->second.empty()) return std::nullopt;
  return it->second.front();
}

TokenizedQuestion tokenize(std::string_view text, const MentionLexicon& lex) {
  TokenizedQuestion tq;
  tq.text = std::string(text);
  auto offs = utf8::char_offsets(text);
  std::size_t chars = offs.size() - 1;
  std::size_t pos = 0;
  while (pos < chars) {
    std::size_t best = 1;
    std::size_t cap = std::min(lex.max_mention_chars(), chars - pos);
    for (std::size_t len = cap; len >= 2; --len) {
      if (lex.contains(utf8::slice(text, offs, pos, pos + len))) {
        best = len;
        break;
      }
    }
    tq.tokens.push_back(Token{std::string(utf8::slice(text, offs, pos, pos + best)),
                              pos, pos + best});
    pos += best;
  }
  return tq;
}

std::vector<MentionHit> find_mentions(const TokenizedQuestion& tq, const MentionLexicon& lex) {
  std::vector<MentionHit> hits;
  std::string_view text = tq.text;
  auto offs = utf8::char_offsets(text);
  std::size_t chars = offs.size() - 1;
  for (std::size_t begin = 0; begin < chars; ++begin) {
    std::size_t cap = std::min(lex.max_mention_chars(), chars - begin);
    for (std::size_t len = 1; len <= cap; ++len) {
      std::string_view sub = utf8::slice(text, offs, begin, begin + len);
      auto entities = lex.entities_for(sub);
      if (!entities.empty())
        hits.push_back(MentionHit{std::string(sub), begin, begin + len, std::move(entities)});
    }
  }
  return hits;  // already sorted by (begin, end) by construction
}

}  // namespace kbqa
