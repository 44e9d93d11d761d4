#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace narrex::text {

/// Decodes UTF-8 into code points. Invalid sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of code points in a UTF-8 string.
std::size_t char_count(std::string_view s);

bool is_letter(char32_t c);
bool is_digit(char32_t c);
char32_t to_lower(char32_t c);

std::string to_lower(std::string_view s);

/// Removes possessive suffixes ("'s", "’s", trailing "'" after s) at word ends.
std::string strip_possessives(std::string_view s);

/// Lowercase runs of letters and digits; everything else separates tokens.
/// Used for keyword and alias matching, where "f35" or "idf" must survive.
std::vector<std::string> word_tokens(std::string_view s);

/// Finds `pattern` as a contiguous run inside `tokens`.
bool contains_sequence(const std::vector<std::string>& tokens,
                       const std::vector<std::string>& pattern);

}  // namespace narrex::text
