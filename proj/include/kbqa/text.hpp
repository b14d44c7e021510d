#pragma once
// Character n-gram multisets and Dice overlap, shared by the similarity scorer
// and the linker's word-overlap feature.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kbqa {

using Multiset = std::map<std::string, int>;

// Multiset of consecutive n-character slices (n in characters, not bytes).
Multiset char_ngrams(std::string_view s, int n);

Multiset to_multiset(const std::vector<std::string>& items);

// 2*|A n B| / (|A| + |B|) with multiset intersection (min of counts).
// Both empty -> 0.
double dice(const Multiset& a, const Multiset& b);

// Non-overlapping occurrences of needle in haystack, scanning left to right.
int count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace kbqa
