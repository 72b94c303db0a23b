#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace crosstok {

struct DecodedScalar {
  uint32_t cp;     // scalar value, or the raw byte when valid is false
  uint32_t len;    // bytes consumed, always >= 1
  bool valid;
};

// Decodes the scalar at `pos`. Invalid sequences consume exactly one byte so
// arbitrary binary input still yields a total decoding.
inline DecodedScalar utf8_next(std::string_view s, size_t pos) {
  uint8_t b0 = uint8_t(s[pos]);
  if (b0 < 0x80) return {b0, 1, true};
  auto cont = [&](size_t i) {
    return pos + i < s.size() && (uint8_t(s[pos + i]) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0) {
    if (b0 >= 0xc2 && cont(1)) {
      uint32_t cp = (uint32_t(b0 & 0x1f) << 6) | (uint8_t(s[pos + 1]) & 0x3f);
      return {cp, 2, true};
    }
  } else if ((b0 & 0xf0) == 0xe0) {
    if (cont(1) && cont(2)) {
      uint32_t cp = (uint32_t(b0 & 0x0f) << 12) | (uint32_t(uint8_t(s[pos + 1]) & 0x3f) << 6) |
                    (uint8_t(s[pos + 2]) & 0x3f);
      if (cp >= 0x800 && !(cp >= 0xd800 && cp <= 0xdfff)) return {cp, 3, true};
    }
  } else if ((b0 & 0xf8) == 0xf0) {
    if (cont(1) && cont(2) && cont(3)) {
      uint32_t cp = (uint32_t(b0 & 0x07) << 18) | (uint32_t(uint8_t(s[pos + 1]) & 0x3f) << 12) |
                    (uint32_t(uint8_t(s[pos + 2]) & 0x3f) << 6) | (uint8_t(s[pos + 3]) & 0x3f);
      if (cp >= 0x10000 && cp <= 0x10ffff) return {cp, 4, true};
    }
  }
  return {b0, 1, false};
}

inline size_t scalar_count(std::string_view s) {
  size_t n = 0;
  for (size_t i = 0; i < s.size(); i += utf8_next(s, i).len) n++;
  return n;
}

inline bool utf8_valid(std::string_view s) {
  for (size_t i = 0; i < s.size();) {
    auto d = utf8_next(s, i);
    if (!d.valid) return false;
    i += d.len;
  }
  return true;
}

inline void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xc0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xe0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(char(0xf0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  }
}

}  // namespace crosstok
