#include <doctest.h>

#include "narrex/text.hpp"

using namespace narrex::text;

TEST_CASE("utf8 round trip and code point counting") {
  const std::string s = "Iran ایران ✓";
  CHECK(encode_utf8(decode_utf8(s)) == s);
  CHECK(char_count(s) == 12);
  CHECK(char_count("") == 0);
}

TEST_CASE("invalid and truncated utf8 becomes replacement characters") {
  CHECK(decode_utf8("\xff") == std::u32string{U'�'});
  CHECK(decode_utf8("a\xd8") == std::u32string{U'a', U'�'});
  CHECK(decode_utf8("\xe2\x9c") == std::u32string{U'�'});
}

TEST_CASE("letter and digit classes cover Persian script") {
  CHECK(is_letter(U'a'));
  CHECK(is_letter(U'ا'));
  CHECK_FALSE(is_letter(U'7'));
  CHECK_FALSE(is_letter(U'۱'));
  CHECK(is_digit(U'۱'));
  CHECK(is_digit(U'٣'));
  CHECK_FALSE(is_letter(U','));
}

TEST_CASE("lowercasing is Unicode aware") {
  CHECK(to_lower("IRAN Ünited") == "iran ünited");
  CHECK(to_lower("ایران") == "ایران");
}

TEST_CASE("possessives are stripped at word ends") {
  CHECK(strip_possessives("Tehran's response") == "Tehran response");
  CHECK(strip_possessives("Tehran’s response") == "Tehran response");
  CHECK(strip_possessives("the protesters' demands") == "the protesters demands");
  CHECK(strip_possessives("it'sy") == "it'sy");
}

TEST_CASE("word tokens keep digits inside words") {
  CHECK(word_tokens("F-35 jets, IDF!") == std::vector<std::string>{"f", "35", "jets", "idf"});
  CHECK(word_tokens("") == std::vector<std::string>{});
}

TEST_CASE("contiguous sequence search") {
  const std::vector<std::string> tokens = {"a", "no", "fly", "zone", "was"};
  CHECK(contains_sequence(tokens, {"no", "fly", "zone"}));
  CHECK_FALSE(contains_sequence(tokens, {"no", "zone"}));
  CHECK_FALSE(contains_sequence(tokens, {}));
  CHECK_FALSE(contains_sequence({"no"}, {"no", "fly"}));
}
