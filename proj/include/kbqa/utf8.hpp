#pragma once
// Minimal UTF-8 walking helpers. Decoding is lenient: any byte that does not
// start a well-formed sequence is treated as a one-byte character, so every
// byte string can be segmented and reassembled losslessly.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kbqa::utf8 {

// Length in bytes of the character starting at `pos`, clamped to the well-formed
// sequence actually present (malformed input yields 1).
std::size_t char_len(std::string_view s, std::size_t pos);

// Code point starting at `pos` (malformed bytes decode as their byte value).
char32_t decode(std::string_view s, std::size_t pos, std::size_t& len);

// Number of characters in `s`.
std::size_t char_count(std::string_view s);

// Byte offset of every character boundary, with s.size() appended; size() is
// char_count + 1. Index by character position to slice strings.
std::vector<std::size_t> char_offsets(std::string_view s);

// Substring covering characters [from_char, to_char) given a boundary table.
std::string_view slice(std::string_view s, const std::vector<std::size_t>& offsets,
                       std::size_t from_char, std::size_t to_char);

// Case/width folding used when lexicon normalization is enabled: ASCII letters
// lowercase, fullwidth ASCII forms (U+FF01..U+FF5E) map to their halfwidth
// counterparts, ideographic space (U+3000) maps to ' '.
std::string fold(std::string_view s);

// Append a code point as UTF-8.
void append(std::string& out, char32_t cp);

}  // namespace kbqa::utf8
