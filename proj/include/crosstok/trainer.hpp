#pragma once
// Three-phase curriculum trainer: within-unit BPE, then PMI-gated
// cross-boundary merges, then complex expressions gated additionally by
// branching entropy and predictability.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crosstok/corpus.hpp"
#include "crosstok/model.hpp"

namespace crosstok {

struct TrainConfig {
  int64_t vocab_size = 256000;
  // -1 resolves to a share of vocab_size - 256 in a 100:100:56 split after
  // explicitly set budgets are taken out. Fully explicit budgets must sum to
  // vocab_size - 256 exactly.
  int64_t phase1_budget = -1;
  int64_t phase2_budget = -1;
  int64_t phase3_budget = -1;

  double pmi_threshold = 2.0;  // accepted range [1.5, 3.0]
  int64_t min_frequency = 100;  // accepted values [3, 10] or 100
  int64_t n_max = 4;            // accepted range [2, 5]; phase 2 always uses 2
  double add_k = 0.0;           // accepted range [0, 1]

  // Phase-3 gates, all percentiles within the current candidate pool:
  // both boundary entropies at or below, internal predictability at or
  // above, external predictability at or below.
  double p3_entropy_percentile = 0.5;
  double p3_internal_percentile = 0.75;
  double p3_external_percentile = 0.25;

  int64_t batch_size = 512;  // accepted merges between statistics refreshes
  int64_t lm_order = 3;
  double unigram_ratio = 1.0;  // recorded in metadata, no effect
  uint64_t rng_seed = 0;
  bool force_thresholds = false;  // waives the range checks above
  ScriptConfig script = ScriptConfig::defaults();

  // Explicit budgets plus resolved -1 shares. Throws InvalidConfig when the
  // arithmetic cannot work out.
  std::array<int64_t, 3> resolved_budgets() const;
  void validate() const;  // throws InvalidConfig
};

// One JSON object per line: batch records during training.
using TelemetrySink = std::function<void(const std::string& json_line)>;

// Deterministic for fixed (corpus, cfg). Throws EmptyCorpus when no document
// yields any word unit. The result carries the config digest and per-phase
// outcome in metadata.
TokenizerModel train(const std::vector<Document>& corpus, const TrainConfig& cfg,
                     const TelemetrySink& telemetry = {});

}  // namespace crosstok
