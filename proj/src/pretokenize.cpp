#include "crosstok/pretokenize.hpp"

#include <algorithm>

#include "crosstok/errors.hpp"
#include "crosstok/utf8.hpp"

namespace crosstok {

ScriptConfig ScriptConfig::defaults() {
  ScriptConfig cfg;
  cfg.char_level_ranges = {
      {0x0E00, 0x0E7F},  // Thai
      {0x3040, 0x309F},  // Hiragana
      {0x30A0, 0x30FF},  // Katakana
      {0x4E00, 0x9FFF},  // CJK Unified Ideographs
  };
  return cfg;
}

bool ScriptConfig::char_level(uint32_t cp) const {
  size_t lo = 0, hi = char_level_ranges.size();
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (cp < char_level_ranges[mid].first) {
      hi = mid;
    } else if (cp > char_level_ranges[mid].second) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

void ScriptConfig::normalize() {
  std::sort(char_level_ranges.begin(), char_level_ranges.end());
  for (size_t i = 0; i < char_level_ranges.size(); i++) {
    auto [lo, hi] = char_level_ranges[i];
    if (lo > hi) throw Error(Errc::InvalidConfig, "char_level range lo > hi");
    if (i > 0 && lo <= char_level_ranges[i - 1].second)
      throw Error(Errc::InvalidConfig, "char_level ranges overlap");
  }
}

namespace {

struct Scalar {
  uint32_t cp;
  uint32_t begin, end;
  Supercategory cat;
  bool char_level;
};

inline Scalar scan_scalar(std::string_view text, size_t pos, const ScriptConfig& cfg) {
  DecodedScalar d = utf8_next(text, pos);
  Scalar s;
  s.begin = uint32_t(pos);
  s.end = uint32_t(pos + d.len);
  s.cp = d.cp;
  s.cat = d.valid ? supercategory(d.cp) : Supercategory::C;
  s.char_level = d.valid && cfg.char_level(d.cp);
  return s;
}

inline bool absorbs_space(const Scalar& s) {
  return s.cat == Supercategory::LM || s.cat == Supercategory::PS || s.cat == Supercategory::N;
}

}  // namespace

void segment(std::string_view text, const ScriptConfig& cfg, std::vector<UnitSpan>& out) {
  out.clear();
  size_t i = 0;
  while (i < text.size()) {
    Scalar s = scan_scalar(text, i, cfg);

    if (s.cp == 0x20 && s.cat == Supercategory::Z && s.end - s.begin == 1) {
      // Space run: the last space is absorbed by a following word-ish unit,
      // the rest stand alone.
      uint32_t run_begin = s.begin;
      uint32_t run_len = 0;
      while (i < text.size()) {
        Scalar sp = scan_scalar(text, i, cfg);
        if (!(sp.cp == 0x20 && sp.cat == Supercategory::Z && sp.end - sp.begin == 1)) break;
        run_len++;
        i = sp.end;
      }
      bool absorb = false;
      if (i < text.size()) {
        Scalar next = scan_scalar(text, i, cfg);
        absorb = absorbs_space(next);
      }
      uint32_t standalone = absorb ? run_len - 1 : run_len;
      for (uint32_t k = 0; k < standalone; k++)
        out.push_back({run_begin + k, run_begin + k + 1, false, Supercategory::Z});
      if (absorb) {
        Scalar first = scan_scalar(text, i, cfg);
        uint32_t space_pos = run_begin + run_len - 1;
        if (first.char_level) {
          out.push_back({space_pos, first.end, true, first.cat});
          i = first.end;
        } else {
          uint32_t end = first.end;
          size_t j = first.end;
          while (j < text.size()) {
            Scalar nx = scan_scalar(text, j, cfg);
            if (nx.cat != first.cat || nx.char_level || nx.cp == 0x20) break;
            end = nx.end;
            j = nx.end;
          }
          out.push_back({space_pos, end, true, first.cat});
          i = end;
        }
      }
      continue;
    }

    if (s.char_level || s.cat == Supercategory::Z || s.cat == Supercategory::C) {
      out.push_back({s.begin, s.end, false, s.cat});
      i = s.end;
      continue;
    }

    uint32_t end = s.end;
    size_t j = s.end;
    while (j < text.size()) {
      Scalar nx = scan_scalar(text, j, cfg);
      if (nx.cat != s.cat || nx.char_level || nx.cp == 0x20) break;
      end = nx.end;
      j = nx.end;
    }
    out.push_back({s.begin, end, false, s.cat});
    i = end;
  }
}

std::vector<WordUnit> segment_words(std::string_view text, const ScriptConfig& cfg) {
  std::vector<UnitSpan> spans;
  segment(text, cfg, spans);
  std::vector<WordUnit> out;
  out.reserve(spans.size());
  for (const auto& u : spans)
    out.push_back({std::string(unit_bytes(text, u)), u.leading_space, u.category});
  return out;
}

}  // namespace crosstok
