#pragma once
// Runtime encode/decode against a trained model, plus model file io.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crosstok/model.hpp"

namespace crosstok {

struct EncodeResult {
  std::vector<uint32_t> ids;
  std::vector<std::pair<uint32_t, uint32_t>> offsets;  // byte span per token
};

// Applies non-cross merges in rank order to one unit's bytes or to an
// existing token list.
std::vector<uint32_t> apply_intra_rules(const TokenizerModel& model, std::string_view bytes);
std::vector<uint32_t> apply_intra_rules(const TokenizerModel& model, std::vector<uint32_t> toks);

class Codec {
 public:
  explicit Codec(TokenizerModel model);

  const TokenizerModel& model() const { return model_; }

  // Pure and safe for concurrent callers. Within-unit merges run per unit;
  // cross-boundary merges then run rank-ordered over the unit stream, each
  // consuming two single-token units.
  EncodeResult encode(std::string_view text) const;
  std::vector<uint32_t> encode_ids(std::string_view text) const;

  // Throws UnknownToken for out-of-range ids.
  std::string decode(std::span<const uint32_t> ids) const;

 private:
  friend class Encoder;
  void encode_into(std::string_view text,
                   std::unordered_map<std::string, std::vector<uint32_t>>& cache,
                   EncodeResult& out, bool want_offsets) const;

  TokenizerModel model_;
};

// Single-threaded encode session with a persistent per-unit cache; the fast
// path for bulk corpus work.
class Encoder {
 public:
  explicit Encoder(const Codec& codec) : codec_(codec) {}
  void encode(std::string_view text, EncodeResult& out, bool want_offsets = false);
  std::vector<uint32_t> encode_ids(std::string_view text);

 private:
  const Codec& codec_;
  std::unordered_map<std::string, std::vector<uint32_t>> cache_;
};

// Versioned JSON model file. Unknown top-level fields are rejected; a
// format_version other than the supported one raises SchemaVersionMismatch.
void save_model(const TokenizerModel& model, const std::string& path);
TokenizerModel load_model(const std::string& path);

}  // namespace crosstok
