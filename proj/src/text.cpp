#include "kbqa/text.hpp"

#include "kbqa/utf8.hpp"

namespace kbqa {

Multiset char_ngrams(std::string_view s, int n) {
  Multiset out;
  auto offs = utf8::char_offsets(s);
  std::size_t chars = offs.size() - 1;
  if (chars < static_cast<std::size_t>(n)) return out;
  for (std::size_t i = 0; i + n <= chars; ++i)
    out[std::string(utf8::slice(s, offs, i, i + n))]++;
  return out;
}

Multiset to_multiset(const std::vector<std::string>& items) {
  Multiset out;
  for (const auto& it : items) out[it]++;
  return out;
}

double dice(const Multiset& a, const Multiset& b) {
  long total = 0;
  for (const auto& [k, c] : a) total += c;
  for (const auto& [k, c] : b) total += c;
  if (total == 0) return 0.0;
  long shared = 0;
  for (const auto& [k, c] : a) {
    auto it = b.find(k);
    if (it != b.end()) shared += std::min(c, it->second);
  }
  return 2.0 * static_cast<double>(shared) / static_cast<double>(total);
}

int count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  int n = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

}  // namespace kbqa
