#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>

#include "crosstok/errors.hpp"
#include "crosstok/utf8.hpp"
#include "crosstok/util.hpp"

using namespace crosstok;

TEST_SUITE("util") {
  TEST_CASE("fnv1a64 known vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("to_hex16") {
    CHECK(to_hex16(0) == "0000000000000000");
    CHECK(to_hex16(0xdeadbeef12345678ULL) == "deadbeef12345678");
  }

  TEST_CASE("rng determinism and ranges") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; i++) {
      uint64_t x = a.next_u64();
      if (x != b.next_u64()) all_equal = false;
      if (x != c.next_u64()) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);

    Rng r(7);
    for (int i = 0; i < 1000; i++) {
      double d = r.next_double();
      CHECK(d >= 0.0);
      CHECK(d < 1.0);
      CHECK(r.below(17) < 17);
      int64_t v = r.range_int(-3, 3);
      CHECK(v >= -3);
      CHECK(v <= 3);
      double x = r.range_real(1.5, 3.0);
      CHECK(x >= 1.5);
      CHECK(x <= 3.0);
    }
  }

  TEST_CASE("range_int closed bounds are reachable") {
    Rng r(11);
    std::set<int64_t> seen;
    for (int i = 0; i < 2000; i++) seen.insert(r.range_int(2, 5));
    CHECK(seen == std::set<int64_t>{2, 3, 4, 5});
  }

  TEST_CASE("mix_seed separates streams") {
    CHECK(mix_seed(1, 2) != mix_seed(1, 3));
    CHECK(mix_seed(1, 2) != mix_seed(2, 2));
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  }

  TEST_CASE("base64 roundtrip all byte values") {
    std::string all;
    for (int i = 0; i < 256; i++) all.push_back(char(i));
    CHECK(base64_decode(base64_encode(all)) == all);
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    Rng r(5);
    for (int i = 0; i < 200; i++) {
      std::string s;
      size_t n = r.below(64);
      for (size_t j = 0; j < n; j++) s.push_back(char(r.below(256)));
      CHECK(base64_decode(base64_encode(s)) == s);
    }
  }

  TEST_CASE("base64 decode rejects malformed input") {
    CHECK_THROWS_AS(base64_decode("Zg"), Error);
    CHECK_THROWS_AS(base64_decode("Zm9v!A=="), Error);
    CHECK_THROWS_AS(base64_decode("=Zm9"), Error);
    try {
      base64_decode("Zg");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::CorruptModel);
    }
  }

  TEST_CASE("format_double roundtrips") {
    for (double v : {0.0, 1.0, -1.5, 3.0227200765000832, 1e-12, 5.91, 1e300}) {
      std::string s = format_double(v);
      CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
  }

  TEST_CASE("utf8 decoder totality") {
    std::string s = "a\xC3\xA9\xE4\xB8\xAD\xF0\x9F\x98\x80";
    size_t pos = 0;
    DecodedScalar d = utf8_next(s, pos);
    CHECK(d.cp == 'a');
    CHECK(d.len == 1);
    pos += d.len;
    d = utf8_next(s, pos);
    CHECK(d.cp == 0xE9);
    CHECK(d.len == 2);
    pos += d.len;
    d = utf8_next(s, pos);
    CHECK(d.cp == 0x4E2D);
    CHECK(d.len == 3);
    pos += d.len;
    d = utf8_next(s, pos);
    CHECK(d.cp == 0x1F600);
    CHECK(d.len == 4);
    CHECK(d.valid);

    // invalid sequences consume one byte and flag invalid
    std::string bad = "\xFF\xC3(\xE2\x28\xA1\xED\xA0\x80";
    pos = 0;
    size_t scalars = 0;
    bool any_valid = false;
    while (pos < bad.size()) {
      DecodedScalar x = utf8_next(bad, pos);
      CHECK(x.len >= 1);
      any_valid = any_valid || x.valid;
      pos += x.len;
      scalars++;
    }
    CHECK(pos == bad.size());
    CHECK(!utf8_valid(bad));
    CHECK(utf8_valid(s));
    CHECK(scalar_count(s) == 4);
  }

  TEST_CASE("utf8 rejects overlongs and surrogates") {
    auto first = [](const char* s) {
      std::string t(s);
      size_t pos = 0;
      return utf8_next(t, pos);
    };
    CHECK(!first("\xC0\xAF").valid);          // overlong '/'
    CHECK(!first("\xE0\x80\xAF").valid);      // overlong
    CHECK(!first("\xED\xA0\x80").valid);      // surrogate D800
    CHECK(!first("\xF4\x90\x80\x80").valid);  // > U+10FFFF
    CHECK(first("\xF4\x8F\xBF\xBF").valid);   // U+10FFFF
  }

  TEST_CASE("append_utf8 inverts utf8_next") {
    Rng r(99);
    for (int i = 0; i < 2000; i++) {
      uint32_t cp = uint32_t(r.below(0x110000));
      if (cp >= 0xD800 && cp <= 0xDFFF) continue;
      std::string s;
      append_utf8(s, cp);
      size_t pos = 0;
      DecodedScalar d = utf8_next(s, pos);
      CHECK(d.valid);
      CHECK(d.cp == cp);
      CHECK(d.len == s.size());
    }
  }

  TEST_CASE("file io and digest") {
    std::string path = "tmp_util_io.bin";
    std::string payload = "bytes";
    payload.push_back('\0');
    payload.push_back('\xFF');
    payload += "more";
    write_file(path, payload);
    CHECK(read_file(path) == payload);
    CHECK(file_digest(path) == fnv1a64(payload));
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_file("definitely_missing_file.xyz"), Error);
  }
}
