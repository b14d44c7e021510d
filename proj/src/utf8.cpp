#include "kbqa/utf8.hpp"

namespace kbqa::utf8 {

namespace {

inline bool is_cont(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

std::size_t char_len(std::string_view s, std::size_t pos) {
  unsigned char lead = static_cast<unsigned char>(s[pos]);
  std::size_t want = 1;
  if (lead >= 0xF0)
    want = 4;
  else if (lead >= 0xE0)
    want = 3;
  else if (lead >= 0xC0)
    want = 2;
  if (want == 1) return 1;
  if (pos + want > s.size()) return 1;
  for (std::size_t i = 1; i < want; ++i)
    if (!is_cont(static_cast<unsigned char>(s[pos + i]))) return 1;
  return want;
}

char32_t decode(std::string_view s, std::size_t pos, std::size_t& len) {
  len = char_len(s, pos);
  unsigned char lead = static_cast<unsigned char>(s[pos]);
  if (len == 1) return static_cast<char32_t>(lead);
  char32_t cp = 0;
  switch (len) {
    case 2: cp = lead & 0x1F; break;
    case 3: cp = lead & 0x0F; break;
    default: cp = lead & 0x07; break;
  }
  for (std::size_t i = 1; i < len; ++i)
    cp = (cp << 6) | (static_cast<unsigned char>(s[pos + i]) & 0x3F);
  return cp;
}

std::size_t char_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); pos += char_len(s, pos)) ++n;
  return n;
}

std::vector<std::size_t> char_offsets(std::string_view s) {
  std::vector<std::size_t> offs;
  offs.reserve(s.size() + 1);
  for (std::size_t pos = 0; pos < s.size(); pos += char_len(s, pos)) offs.push_back(pos);
  offs.push_back(s.size());
  return offs;
}

std::string_view slice(std::string_view s, const std::vector<std::size_t>& offsets,
                       std::size_t from_char, std::size_t to_char) {
  return s.substr(offsets[from_char], offsets[to_char] - offsets[from_char]);
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = 0;
    char32_t cp = decode(s, pos, len);
    if (cp >= 'A' && cp <= 'Z') {
      cp += 'a' - 'A';
    } else if (cp >= 0xFF01 && cp <= 0xFF5E) {
      cp -= 0xFEE0;
      if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
    } else if (cp == 0x3000) {
      cp = ' ';
    }
    append(out, cp);
    pos += len;
  }
  return out;
}

}  // namespace kbqa::utf8
