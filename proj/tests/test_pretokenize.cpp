#include <doctest.h>

#include <string>
#include <vector>

#include "crosstok/errors.hpp"
#include "crosstok/pretokenize.hpp"
#include "crosstok/util.hpp"
#include "support/textgen.hpp"

using namespace crosstok;

namespace {

std::string detokenize(const std::vector<WordUnit>& units) {
  std::string out;
  for (const auto& u : units) {
    if (u.leading_space) out.push_back(' ');
    out += u.bytes;
  }
  return out;
}

}  // namespace

TEST_SUITE("pretokenize") {
  TEST_CASE("supercategory basics") {
    CHECK(supercategory('a') == Supercategory::LM);
    CHECK(supercategory('Z') == Supercategory::LM);
    CHECK(supercategory(' ') == Supercategory::Z);
    CHECK(supercategory('7') == Supercategory::N);
    CHECK(supercategory('.') == Supercategory::PS);
    CHECK(supercategory('+') == Supercategory::PS);
    CHECK(supercategory('\n') == Supercategory::C);
    CHECK(supercategory('\t') == Supercategory::C);
    CHECK(supercategory(0x0301) == Supercategory::LM);   // combining acute
    CHECK(supercategory(0x4E2D) == Supercategory::LM);   // CJK ideograph
    CHECK(supercategory(0x1F600) == Supercategory::PS);  // emoji (So)
    CHECK(supercategory(0x0660) == Supercategory::N);    // Arabic-Indic digit
    CHECK(supercategory(0xA0) == Supercategory::Z);      // no-break space
    CHECK(supercategory(0x10FFFF) == Supercategory::C);  // unassigned
  }

  TEST_CASE("two-word split") {
    auto units = segment_words("in the", ScriptConfig::defaults());
    REQUIRE(units.size() == 2);
    CHECK(units[0].bytes == "in");
    CHECK(!units[0].leading_space);
    CHECK(units[0].category == Supercategory::LM);
    CHECK(units[1].bytes == "the");
    CHECK(units[1].leading_space);
  }

  TEST_CASE("category change splits") {
    auto units = segment_words("state-of-the-art", ScriptConfig::defaults());
    REQUIRE(units.size() == 7);
    const char* expect[] = {"state", "-", "of", "-", "the", "-", "art"};
    for (size_t i = 0; i < 7; i++) {
      CHECK(units[i].bytes == expect[i]);
      CHECK(!units[i].leading_space);
      CHECK(units[i].category ==
            (i % 2 == 0 ? Supercategory::LM : Supercategory::PS));
    }
  }

  TEST_CASE("char-level scripts split per scalar") {
    auto units = segment_words("\xE6\x9D\xB1\xE4\xBA\xAC\xE3\x82\xBF\xE3\x83\xAF\xE3\x83\xBC",
                               ScriptConfig::defaults());
    REQUIRE(units.size() == 5);  // two CJK + three katakana scalars
    for (const auto& u : units) CHECK(u.bytes.size() == 3);
    CHECK(detokenize(units) ==
          "\xE6\x9D\xB1\xE4\xBA\xAC\xE3\x82\xBF\xE3\x83\xAF\xE3\x83\xBC");
  }

  TEST_CASE("digit runs stay one unit") {
    auto units = segment_words("abc123 456", ScriptConfig::defaults());
    REQUIRE(units.size() == 3);
    CHECK(units[0].bytes == "abc");
    CHECK(units[1].bytes == "123");
    CHECK(!units[1].leading_space);
    CHECK(units[2].bytes == "456");
    CHECK(units[2].leading_space);
    CHECK(units[2].category == Supercategory::N);
  }

  TEST_CASE("space runs preserve losslessness") {
    auto units = segment_words("a  b", ScriptConfig::defaults());
    REQUIRE(units.size() == 3);
    CHECK(units[0].bytes == "a");
    CHECK(units[1].category == Supercategory::Z);
    CHECK(units[1].bytes == " ");
    CHECK(units[2].bytes == "b");
    CHECK(units[2].leading_space);
    CHECK(detokenize(units) == "a  b");

    CHECK(detokenize(segment_words("   ", ScriptConfig::defaults())) == "   ");
    CHECK(detokenize(segment_words("a ", ScriptConfig::defaults())) == "a ");
    CHECK(detokenize(segment_words(" a", ScriptConfig::defaults())) == " a");
  }

  TEST_CASE("newlines and tabs are standalone units") {
    auto units = segment_words("a \nb", ScriptConfig::defaults());
    REQUIRE(units.size() == 4);
    CHECK(units[0].bytes == "a");
    CHECK(units[1].bytes == " ");  // space before \n cannot be absorbed
    CHECK(units[2].bytes == "\n");
    CHECK(units[2].category == Supercategory::C);
    CHECK(!units[2].leading_space);
    CHECK(units[3].bytes == "b");
    CHECK(!units[3].leading_space);
  }

  TEST_CASE("no unit is empty or mixes categories") {
    Rng rng(1234);
    for (int iter = 0; iter < 300; iter++) {
      std::string text = testgen::random_utf8(rng, 80);
      auto units = segment_words(text, ScriptConfig::defaults());
      for (const auto& u : units) {
        REQUIRE(!u.bytes.empty());
        size_t pos = 0;
        while (pos < u.bytes.size()) {
          DecodedScalar d = utf8_next(u.bytes, pos);
          Supercategory c = d.valid ? supercategory(d.cp) : Supercategory::C;
          CHECK(c == u.category);
          pos += d.len;
        }
      }
    }
  }

  TEST_CASE("losslessness fuzz including invalid bytes") {
    Rng rng(20260814);
    for (int iter = 0; iter < 2000; iter++) {
      std::string text = iter % 2 == 0 ? testgen::random_utf8(rng, 120)
                                       : testgen::random_bytes(rng, 120);
      auto units = segment_words(text, ScriptConfig::defaults());
      CHECK(detokenize(units) == text);
    }
  }

  TEST_CASE("spans partition the input") {
    Rng rng(88);
    for (int iter = 0; iter < 500; iter++) {
      std::string text = testgen::random_utf8(rng, 100);
      std::vector<UnitSpan> spans;
      segment(text, ScriptConfig::defaults(), spans);
      uint32_t cursor = 0;
      for (const auto& s : spans) {
        CHECK(s.begin == cursor);
        CHECK(s.end > s.begin);
        cursor = s.end;
      }
      CHECK(cursor == text.size());
    }
  }

  TEST_CASE("concatenation locality at a space boundary") {
    Rng rng(4321);
    for (int iter = 0; iter < 200; iter++) {
      std::string a = testgen::random_utf8(rng, 40);
      std::string b = testgen::random_utf8(rng, 40);
      // force a clean boundary: a must not end in space, b must not start with one
      a += "x";
      b = "y" + b;
      auto whole = segment_words(a + " " + b, ScriptConfig::defaults());
      auto left = segment_words(a, ScriptConfig::defaults());
      auto right = segment_words(" " + b, ScriptConfig::defaults());
      left.insert(left.end(), right.begin(), right.end());
      REQUIRE(whole.size() == left.size());
      for (size_t i = 0; i < whole.size(); i++) {
        CHECK(whole[i].bytes == left[i].bytes);
        CHECK(whole[i].leading_space == left[i].leading_space);
      }
    }
  }

  TEST_CASE("script config validation") {
    ScriptConfig cfg;
    cfg.char_level_ranges = {{0x100, 0x1FF}, {0x150, 0x250}};
    CHECK_THROWS_AS(cfg.normalize(), Error);
    ScriptConfig ok;
    ok.char_level_ranges = {{0x300, 0x3FF}, {0x100, 0x1FF}};
    ok.normalize();  // sorts
    CHECK(ok.char_level_ranges[0].first == 0x100);
    CHECK(ok.char_level(0x155));
    CHECK(!ok.char_level(0x255));
  }
}
