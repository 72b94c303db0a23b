#include "crosstok/model.hpp"

#include "crosstok/errors.hpp"

namespace crosstok {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::P1: return "P1";
    case Phase::P2: return "P2";
    case Phase::P3: return "P3";
  }
  return "?";
}

TokenizerModel TokenizerModel::byte_model() {
  TokenizerModel m;
  m.tokens.reserve(kByteVocab);
  for (uint32_t b = 0; b < kByteVocab; b++) m.tokens.push_back(std::string(1, char(b)));
  return m;
}

const MergeRule& TokenizerModel::add_merge(uint32_t left, uint32_t right, Phase phase,
                                           bool cross) {
  MergeRule rule;
  rule.left = left;
  rule.right = right;
  rule.result = uint32_t(tokens.size());
  rule.rank = uint32_t(merges.size());
  rule.phase = phase;
  rule.crosses_boundary = cross;
  tokens.push_back(tokens[left] + tokens[right]);
  rule_rank.emplace(rule_key(left, right, cross), rule.rank);
  merges.push_back(rule);
  return merges.back();
}

void TokenizerModel::rebuild_rule_rank() {
  rule_rank.clear();
  rule_rank.reserve(merges.size());
  for (const auto& r : merges)
    rule_rank.emplace(rule_key(r.left, r.right, r.crosses_boundary), r.rank);
}

void TokenizerModel::validate() const {
  if (tokens.size() < kByteVocab)
    throw Error(Errc::CorruptModel, "model lacks the 256 byte tokens");
  if (tokens.size() != kByteVocab + merges.size())
    throw Error(Errc::CorruptModel, "token count does not match merge count");
  for (uint32_t b = 0; b < kByteVocab; b++)
    if (tokens[b].size() != 1 || uint8_t(tokens[b][0]) != b)
      throw Error(Errc::CorruptModel, "byte token " + std::to_string(b) + " is malformed");
  Phase prev = Phase::P1;
  for (size_t k = 0; k < merges.size(); k++) {
    const MergeRule& r = merges[k];
    if (r.rank != k) throw Error(Errc::CorruptModel, "merge ranks are not dense");
    if (r.result != kByteVocab + k)
      throw Error(Errc::CorruptModel, "merge result ids are not dense");
    if (r.left >= r.result || r.right >= r.result)
      throw Error(Errc::CorruptModel, "merge references an undefined token");
    if (tokens[r.result] != tokens[r.left] + tokens[r.right])
      throw Error(Errc::CorruptModel, "merge result bytes do not concatenate operands");
    if (tokens[r.result].empty())
      throw Error(Errc::CorruptModel, "empty token bytes");
    if (r.crosses_boundary && r.phase == Phase::P1)
      throw Error(Errc::CorruptModel, "cross-boundary merge in phase P1");
    if (uint8_t(r.phase) < uint8_t(prev))
      throw Error(Errc::CorruptModel, "merge phases are not monotone");
    prev = r.phase;
  }
}

}  // namespace crosstok
