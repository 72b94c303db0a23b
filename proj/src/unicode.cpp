#include "crosstok/unicode.hpp"

#include <cstddef>

namespace crosstok {
namespace {

struct SupercatRange {
  uint32_t lo, hi;
  uint8_t cls;
};

#include "unicode_supercat.inc"

}  // namespace

Supercategory supercategory(uint32_t cp) {
  // ASCII fast path covers the bulk of English corpora.
  if (cp < 0x80) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return Supercategory::LM;
    if (cp >= '0' && cp <= '9') return Supercategory::N;
    if (cp == ' ') return Supercategory::Z;
    if (cp >= 0x21 && cp <= 0x7e) return Supercategory::PS;
    return Supercategory::C;
  }
  size_t lo = 0, hi = kSupercatRangeCount;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (cp < kSupercatRanges[mid].lo) {
      hi = mid;
    } else if (cp > kSupercatRanges[mid].hi) {
      lo = mid + 1;
    } else {
      return Supercategory(kSupercatRanges[mid].cls);
    }
  }
  return Supercategory::C;
}

const char* supercategory_name(Supercategory sc) {
  switch (sc) {
    case Supercategory::LM: return "LM";
    case Supercategory::PS: return "PS";
    case Supercategory::N: return "N";
    case Supercategory::Z: return "Z";
    case Supercategory::C: return "C";
  }
  return "?";
}

}  // namespace crosstok
