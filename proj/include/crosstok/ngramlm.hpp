#pragma once
// Add-one-smoothed n-gram language model over word units. Serves as the
// phase-3 predictability oracle and the perplexity term of evaluation.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crosstok/mining.hpp"

namespace crosstok {

class NGramLM {
 public:
  // Counts every context length 0..order-1 at every position. Throws
  // EmptyCorpus when the corpus has no units, InvalidConfig when order < 1.
  static NGramLM fit(const UnitCorpus& corpus, uint32_t order);

  // Counts only the given contexts (each of length <= order-1). Probabilities
  // conditioned on those contexts match fit() exactly; everything else is
  // uncounted. One corpus pass regardless of how many contexts.
  static NGramLM fit_focused(const UnitCorpus& corpus, uint32_t order,
                             const std::vector<std::vector<uint32_t>>& contexts);

  uint32_t order() const { return order_; }
  uint64_t vocab_size() const { return vocab_size_; }
  uint64_t total_units() const { return total_units_; }

  // log2 P(next | tail of history), conditioning on exactly
  // min(order-1, |history|) trailing units. Always finite.
  double log2_prob(std::span<const uint32_t> history, uint32_t next) const;

  void save(const std::string& path) const;
  static NGramLM load(const std::string& path);

 private:
  static std::string key_of(std::span<const uint32_t> seq);

  uint32_t order_ = 3;
  uint64_t vocab_size_ = 0;
  uint64_t total_units_ = 0;
  std::unordered_map<std::string, uint64_t> ctx_counts_;
  std::unordered_map<std::string, uint64_t> cond_counts_;
};

struct Predictability {
  double internal = 0.0;
  double external = 0.0;
};

// internal: mean log2 probability of each interior unit given its in-sequence
// history. external: right-context-count-weighted mean log2 probability of the
// units observed to follow the sequence. Throws UnseenSequence when
// occurrences == 0 and NoContexts when right_contexts is empty.
Predictability predictability(std::span<const uint32_t> seq, uint64_t occurrences,
                              const NGramLM& lm,
                              const std::unordered_map<uint32_t, uint64_t>& right_contexts);

// Contexts fit_focused must count so that predictability() can score each
// sequence: every interior history prefix plus the external tail.
std::vector<std::vector<uint32_t>> predictability_contexts(
    const std::vector<std::vector<uint32_t>>& seqs, uint32_t order);

}  // namespace crosstok
