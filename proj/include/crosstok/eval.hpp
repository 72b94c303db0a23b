#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "crosstok/codec.hpp"
#include "crosstok/corpus.hpp"

namespace crosstok {

struct EvalMetrics {
  double chars_per_token = 0.0;  // Unicode scalars per token
  double vocab_utilization = 0.0;
  double unigram_perplexity = 1.0;
  double encode_latency = 0.0;  // seconds per megabyte (1e6 bytes)
  uint64_t corpus_docs = 0;
  uint64_t corpus_scalars = 0;
  uint64_t corpus_bytes = 0;
};

struct ScoreWeights {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.01;
  void validate() const;  // weights nonnegative, at least one positive
};

double compression_ratio(const Codec& codec, const std::vector<Document>& corpus);
double vocab_utilization(const Codec& codec, const std::vector<Document>& corpus);

// Fit half: even-index docs (the whole stream's first half for a single doc).
// Add-one unigram fit, perplexity = 2^(cross-entropy bits) on the other half.
double unigram_perplexity(const Codec& codec, const std::vector<Document>& corpus);

// Median seconds per megabyte over `repetitions` timed passes after one
// warm-up pass. Empty corpora measure nothing: returns 0 and warns on stderr.
double encode_latency(const Codec& codec, const std::vector<Document>& corpus,
                      int repetitions = 3);

double score(const EvalMetrics& m, const ScoreWeights& w);

EvalMetrics evaluate(const Codec& codec, const std::vector<Document>& corpus,
                     int latency_repetitions = 3);

}  // namespace crosstok
