#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crosstok/corpus.hpp"
#include "crosstok/eval.hpp"
#include "crosstok/util.hpp"

namespace crosstok {

// Closed sampling ranges. Defaults are the documented full-scale baseline;
// the desk preset narrows vocab_size to [8192, 65536].
struct SearchSpace {
  int64_t vocab_lo = 160000, vocab_hi = 320000;
  double pmi_lo = 1.5, pmi_hi = 3.0;
  int64_t min_freq_lo = 3, min_freq_hi = 10;
  int64_t n_max_lo = 2, n_max_hi = 5;
  double add_k_lo = 0.0, add_k_hi = 1.0;

  void validate() const;
};

struct TrialPoint {
  int64_t vocab_size = 0;
  double pmi_threshold = 0.0;
  int64_t min_frequency = 0;
  int64_t n_max = 0;
  double add_k = 0.0;
};

struct TrialRecord {
  uint64_t trial = 0;
  uint64_t seed = 0;  // derived per-trial seed
  TrialPoint point;
  bool ok = false;
  std::string error;
  EvalMetrics metrics;
  double score = 0.0;
  double wall_seconds = 0.0;
};

struct SweepResult {
  TrialRecord best;
  std::vector<TrialRecord> log;  // one record per trial index
};

// Fixed draw order: vocab, pmi, min_frequency, n_max, add_k.
TrialPoint sample_point(const SearchSpace& space, Rng& rng);

// Held-out documents hash to the last decile of their id.
bool heldout_doc(const Document& d);

std::string trial_to_json(const TrialRecord& r);
TrialRecord trial_from_json(const std::string& line);

using TrialSink = std::function<void(const TrialRecord&)>;

// Uniform random search. Each trial trains on the train split and scores on
// the held-out split with its own seed stream, so resumed runs reproduce the
// remaining trials exactly. `completed` records are reused, not re-run; the
// sink fires only for newly executed trials. Throws AllTrialsFailed when no
// trial completes.
SweepResult random_search(const SearchSpace& space, uint64_t trials,
                          const ScoreWeights& weights,
                          const std::vector<Document>& corpus, uint64_t seed,
                          const std::vector<TrialRecord>& completed = {},
                          const TrialSink& sink = {});

}  // namespace crosstok
