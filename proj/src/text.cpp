#include "narrex/text.hpp"

#include <locale.h>
#include <wctype.h>

#include <algorithm>

namespace narrex::text {
namespace {

// glibc's C.UTF-8 carries the full Unicode ctype tables; fall back to a
// coarse classification when it is missing.
locale_t utf8_ctype() {
  static const locale_t loc = newlocale(LC_CTYPE_MASK, "C.UTF-8", locale_t{});
  return loc;
}

bool is_ascii_letter(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

}  // namespace

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(U'�');
      ++i;
      continue;
    }
    if (i + extra >= s.size()) {
      out.push_back(U'�');
      break;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t char_count(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9) ||
         (c >= 0x0966 && c <= 0x096F) || (c >= 0xFF10 && c <= 0xFF19);
}

bool is_letter(char32_t c) {
  if (c < 0x80) return is_ascii_letter(c);
  if (is_digit(c)) return false;
  if (locale_t loc = utf8_ctype()) return iswalpha_l(static_cast<wint_t>(c), loc) != 0;
  return c >= 0xC0 && !(c >= 0x2000 && c <= 0x2BFF) && !(c >= 0x3000 && c <= 0x303F) && c != 0xFFFD;
}

char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 32 : c;
  if (locale_t loc = utf8_ctype()) return static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), loc));
  return c;
}

std::string to_lower(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (auto& c : cps) c = to_lower(c);
  return encode_utf8(cps);
}

std::string strip_possessives(std::string_view s) {
  const std::u32string cps = decode_utf8(s);
  std::u32string out;
  out.reserve(cps.size());
  auto is_apos = [](char32_t c) { return c == U'\'' || c == U'’'; };
  auto word_char = [](char32_t c) { return is_letter(c) || is_digit(c); };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (is_apos(cps[i]) && i > 0 && word_char(cps[i - 1])) {
      const bool next_is_s = i + 1 < cps.size() && (cps[i + 1] == U's' || cps[i + 1] == U'S');
      if (next_is_s && (i + 2 >= cps.size() || !word_char(cps[i + 2]))) {
        ++i;  // drop "'s"
        continue;
      }
      const char32_t prev = cps[i - 1];
      if ((prev == U's' || prev == U'S') && (i + 1 >= cps.size() || !word_char(cps[i + 1]))) continue;
    }
    out.push_back(cps[i]);
  }
  return encode_utf8(out);
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : decode_utf8(s)) {
    if (is_letter(c) || is_digit(c)) {
      current.push_back(to_lower(c));
    } else if (!current.empty()) {
      tokens.push_back(encode_utf8(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(encode_utf8(current));
  return tokens;
}

bool contains_sequence(const std::vector<std::string>& tokens, const std::vector<std::string>& pattern) {
  if (pattern.empty() || pattern.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), pattern.begin(), pattern.end()) != tokens.end();
}

}  // namespace narrex::text
