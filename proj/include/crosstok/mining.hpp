#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crosstok/pretokenize.hpp"

namespace crosstok {

// ---- Unit streams ----

// Interned word units. Element addresses are stable, so the lookup keys can
// view into the stored strings.
class SymbolTable {
 public:
  uint32_t intern(std::string_view bytes);
  std::optional<uint32_t> find(std::string_view bytes) const;
  const std::string& bytes(uint32_t sym) const { return store_[sym]; }
  size_t size() const { return store_.size(); }

 private:
  std::deque<std::string> store_;
  std::unordered_map<std::string_view, uint32_t> ids_;
};

// Symbol-id streams with document boundaries; n-grams never cross them.
struct UnitCorpus {
  SymbolTable symbols;
  std::vector<uint32_t> stream;
  std::vector<uint64_t> doc_offsets;  // size = docs + 1

  size_t doc_count() const { return doc_offsets.empty() ? 0 : doc_offsets.size() - 1; }
  std::span<const uint32_t> doc(size_t i) const {
    return std::span<const uint32_t>(stream).subspan(doc_offsets[i],
                                                     doc_offsets[i + 1] - doc_offsets[i]);
  }
  void add_doc(std::span<const uint32_t> syms);
};

// Unit identity here is the unit's own bytes; leading spaces are adjacency
// metadata, not part of the symbol.
UnitCorpus make_unit_corpus(const std::vector<std::vector<WordUnit>>& docs);

// ---- N-gram statistics ----

enum class Side : uint8_t { Left, Right };

class NGramTable {
 public:
  // Exact windowed counts of all n-grams (n = 1..n_max) occurring at least
  // min_count times. Longer grams are counted only over surviving prefixes,
  // which keeps the maps small without changing the surviving set. Context
  // maps are optional; they are only affordable at modest corpus sizes.
  static NGramTable count(const UnitCorpus& corpus, uint32_t n_max, uint64_t min_count,
                          bool with_contexts);

  uint32_t n_max() const { return n_max_; }
  uint64_t min_count() const { return min_count_; }
  bool with_contexts() const { return with_contexts_; }
  uint64_t total_unigrams() const { return windows_[1]; }
  uint64_t windows(uint32_t n) const { return windows_[n]; }
  uint64_t distinct(uint32_t n) const { return distinct_[n]; }

  // 0 when the gram was pruned or never seen.
  uint64_t count_of(std::span<const uint32_t> seq) const;
  uint64_t unigram_count(uint32_t sym) const;

  // log2( P(seq) / prod P(w_i) ) with P(seq) = count/windows(n) and
  // P(w) = count/total_unigrams, optionally add-k smoothed over the observed
  // distinct-gram domain. Throws MissingCount.
  double pmi(std::span<const uint32_t> seq, double add_k = 0.0) const;

  // Shannon entropy of the adjacent-unit distribution on one side.
  // Throws NoContexts when nothing was recorded (document-edge sequences).
  double branching_entropy(std::span<const uint32_t> seq, Side side) const;

  const std::unordered_map<uint32_t, uint64_t>* contexts(std::span<const uint32_t> seq,
                                                         Side side) const;

  // Visits surviving n-grams of one order; seq is only valid for the call.
  void for_each(uint32_t n,
                const std::function<void(std::span<const uint32_t>, uint64_t)>& fn) const;

  // gram handle for context scans
  std::optional<std::pair<uint32_t, uint32_t>> gram_of(std::span<const uint32_t> seq) const;

  void save(const std::string& path, const SymbolTable& symbols) const;
  static std::pair<NGramTable, SymbolTable> load(const std::string& path);

 private:
  struct Level {
    std::unordered_map<uint64_t, uint32_t> ids;  // packed key -> gram id
    std::vector<uint64_t> counts;                // by gram id, pruned entries removed from ids
    std::vector<uint64_t> keys;                  // by gram id
    std::vector<std::unordered_map<uint32_t, uint64_t>> left, right;
  };

  std::optional<uint32_t> gram_id(std::span<const uint32_t> seq) const;
  void unpack(uint32_t n, uint32_t id, std::vector<uint32_t>& out) const;

  uint32_t n_max_ = 0;
  uint64_t min_count_ = 0;
  bool with_contexts_ = false;
  std::vector<uint64_t> windows_;   // by n, [0] unused
  std::vector<uint64_t> distinct_;  // pre-prune distinct grams by n
  std::vector<uint64_t> unigrams_;  // dense by symbol id
  std::vector<std::unordered_map<uint32_t, uint64_t>> uni_left_, uni_right_;
  std::vector<Level> levels_;  // [0] and [1] unused

  friend std::vector<std::pair<std::unordered_map<uint32_t, uint64_t>,
                               std::unordered_map<uint32_t, uint64_t>>>
  collect_contexts(const UnitCorpus&, const NGramTable&,
                   const std::vector<std::vector<uint32_t>>&);
};

// ---- Candidate selection ----

struct Candidate {
  std::vector<uint32_t> seq;
  uint64_t frequency = 0;
  double pmi = 0.0;
  double h_left = 0.0;
  double h_right = 0.0;
  double score = 0.0;
  std::string bytes;  // concatenated unit bytes, the lexicographic tie-break key
};

// All surviving n-grams (n >= 2) passing PMI > pmi_threshold and
// frequency >= min_frequency, unranked. With contexts enabled, sequences
// seen only at document edges are dropped: branching entropy needs at least
// one recorded neighbor on each side.
std::vector<Candidate> gather_candidates(const NGramTable& t, const SymbolTable& symbols,
                                         double pmi_threshold, uint64_t min_frequency,
                                         double add_k = 0.0);

// Rank by PMI descending, frequency descending, then byte-lexicographic;
// then greedily drop any candidate whose unit-multiset overlap with an
// already accepted candidate covers at least half of its positions.
void rank_and_diversify(std::vector<Candidate>& pool, size_t max_candidates);

std::vector<Candidate> select_candidates(const NGramTable& t, const SymbolTable& symbols,
                                         double pmi_threshold, uint64_t min_frequency,
                                         size_t max_candidates, double add_k = 0.0);

// Left/right adjacent-unit counts for each sequence, one corpus pass.
std::vector<std::pair<std::unordered_map<uint32_t, uint64_t>,
                      std::unordered_map<uint32_t, uint64_t>>>
collect_contexts(const UnitCorpus& corpus, const NGramTable& t,
                 const std::vector<std::vector<uint32_t>>& seqs);

}  // namespace crosstok
