#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crosstok/unicode.hpp"

namespace crosstok {

// Scalar ranges segmented one scalar per unit (scripts without word
// boundaries). Part of the serialized model so encode-time segmentation
// matches train-time segmentation exactly.
struct ScriptConfig {
  std::vector<std::pair<uint32_t, uint32_t>> char_level_ranges;

  // CJK Unified Ideographs, Hiragana, Katakana, Thai.
  static ScriptConfig defaults();

  bool char_level(uint32_t cp) const;
  void normalize();  // sort, validate disjoint
};

// One segmented unit, as byte offsets into the source text. When
// leading_space is set the span starts at the absorbed U+0020 byte and the
// unit's own bytes begin one past it.
struct UnitSpan {
  uint32_t begin;
  uint32_t end;
  bool leading_space;
  Supercategory category;
};

struct WordUnit {
  std::string bytes;  // excludes the absorbed leading space
  bool leading_space;
  Supercategory category;
};

// Splits at every supercategory change and at every space. A single space
// directly before an LM/PS/N unit is absorbed as leading_space; every other
// space stands alone as a Z unit. Z and C scalars (newlines, tabs, NBSP,
// invalid bytes) are one unit per scalar. Concatenating the spans reproduces
// text byte for byte, for arbitrary byte content.
void segment(std::string_view text, const ScriptConfig& cfg, std::vector<UnitSpan>& out);

std::vector<WordUnit> segment_words(std::string_view text, const ScriptConfig& cfg);

inline std::string_view unit_bytes(std::string_view text, const UnitSpan& u) {
  uint32_t b = u.begin + (u.leading_space ? 1 : 0);
  return text.substr(b, u.end - b);
}

// The unit's bytes with its leading space included, the substrate merges
// operate on.
inline std::string_view materialized_bytes(std::string_view text, const UnitSpan& u) {
  return text.substr(u.begin, u.end - u.begin);
}

}  // namespace crosstok
