#pragma once
// Trained tokenizer artifact: byte-level base vocabulary plus an ordered merge
// list annotated with curriculum phase and cross-boundary flags.

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "crosstok/pretokenize.hpp"

namespace crosstok {

inline constexpr uint32_t kByteVocab = 256;
inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum class Phase : uint8_t { P1 = 1, P2 = 2, P3 = 3 };

const char* phase_name(Phase p);

struct MergeRule {
  uint32_t left = 0;
  uint32_t right = 0;
  uint32_t result = 0;
  uint32_t rank = 0;
  Phase phase = Phase::P1;
  bool crosses_boundary = false;
};

// Token ids stay below 2^31, so operands and the cross flag pack into one key
// without bit overlap.
inline uint64_t rule_key(uint32_t left, uint32_t right, bool cross) {
  return (uint64_t(left) << 32) | (uint64_t(right) << 1) | uint64_t(cross);
}

struct TokenizerModel {
  std::vector<std::string> tokens;  // byte content by id; [0, 256) are single bytes
  std::vector<MergeRule> merges;    // rank order; merges[k].result == 256 + k
  ScriptConfig script = ScriptConfig::defaults();
  std::map<std::string, std::string> metadata;  // sorted keys, stable serialization
  std::unordered_map<uint64_t, uint32_t> rule_rank;  // rule_key -> rank

  size_t vocab_size() const { return tokens.size(); }

  static TokenizerModel byte_model();

  // Appends a merge, allocating the next dense token id. Returns the rule.
  const MergeRule& add_merge(uint32_t left, uint32_t right, Phase phase, bool cross);

  void rebuild_rule_rank();

  // Checks every structural invariant: dense ranks and result ids, operands
  // defined at lower ids, byte concatenation, phase monotonicity, cross flags
  // confined to P2/P3. Throws CorruptModel.
  void validate() const;
};

}  // namespace crosstok
