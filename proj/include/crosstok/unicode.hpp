#pragma once

#include <cstdint>

namespace crosstok {

// Coarse categories for segmentation. Letters and combining marks cluster
// together so accents never split a word; punctuation and symbols likewise.
enum class Supercategory : uint8_t {
  LM = 0,  // L* and M*
  PS = 1,  // P* and S*
  N = 2,   // N*
  Z = 3,   // Z*
  C = 4,   // C* and unassigned
};

Supercategory supercategory(uint32_t cp);

const char* supercategory_name(Supercategory sc);

}  // namespace crosstok
