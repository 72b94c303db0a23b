#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crosstok/util.hpp"

namespace crosstok {

enum class EntropyClass : uint8_t { Low = 0, Medium = 1, High = 2 };

const char* entropy_class_name(EntropyClass c);

struct Document {
  std::string id;
  std::string text;
  double entropy_bits = 0.0;
  EntropyClass entropy_class = EntropyClass::Low;
};

struct CurationConfig {
  double low_cutoff = 3.0;
  double high_cutoff = 4.5;
  double retain_low = 0.10;
  double retain_medium = 0.50;
  double retain_high = 0.90;
  uint64_t rng_seed = 0;

  void validate() const;
  double retention(EntropyClass c) const;
};

struct CurationStats {
  uint64_t docs_seen[3] = {0, 0, 0};  // indexed by EntropyClass
  uint64_t docs_kept[3] = {0, 0, 0};
  uint64_t bytes_seen = 0;
  uint64_t bytes_kept = 0;
  uint64_t decode_failures = 0;
  uint64_t too_short = 0;

  uint64_t total_seen() const { return docs_seen[0] + docs_seen[1] + docs_seen[2]; }
  uint64_t total_kept() const { return docs_kept[0] + docs_kept[1] + docs_kept[2]; }
  void merge(const CurationStats& other);
};

// ---- Entropy classification ----

// Shannon entropy over the empirical distribution of adjacent Unicode-scalar
// bigrams. Throws TooShort below 2 scalars.
double doc_entropy(std::string_view text);

EntropyClass classify_entropy(double h, const CurationConfig& cfg);

// Bernoulli keep-draw with the class's retention probability. rng must be
// seeded from (config seed, document id) so the decision is reproducible and
// independent of stream order.
bool sample_decision(EntropyClass cls, const CurationConfig& cfg, Rng& rng);

inline Rng doc_rng(const CurationConfig& cfg, std::string_view doc_id) {
  return Rng(mix_seed(cfg.rng_seed, fnv1a64(doc_id)));
}

// ---- Streamed ingestion ----

struct RawDoc {
  std::string id;
  std::string text;
};

class DocumentReader {
 public:
  virtual ~DocumentReader() = default;
  virtual std::optional<RawDoc> next() = 0;
};

// Plain UTF-8 text, documents separated by one or more blank lines.
std::unique_ptr<DocumentReader> open_plain_reader(const std::string& path);

// Newline-delimited JSON with required "text" and optional "id". Missing ids
// are the FNV-1a hash of the text as 16 hex digits.
std::unique_ptr<DocumentReader> open_ndjson_reader(const std::string& path);

// Picks a reader by extension: .ndjson/.jsonl parse as JSON lines, anything
// else as plain text.
std::unique_ptr<DocumentReader> open_reader(const std::string& path);

std::unique_ptr<DocumentReader> make_vector_reader(std::vector<RawDoc> docs);

// Annotates each document with entropy and keeps it per sample_decision.
// Documents that fail UTF-8 decode or are too short for a bigram are counted
// and skipped, never fatal.
CurationStats stream_filter(DocumentReader& reader, const CurationConfig& cfg,
                            const std::function<void(Document&&)>& sink);

// Single-pass uniform sample of k documents (algorithm R). The sample is
// returned in arrival order.
std::vector<Document> reservoir_sample(DocumentReader& reader, size_t k, uint64_t rng_seed);
std::vector<Document> reservoir_sample(std::vector<Document> docs, size_t k, uint64_t rng_seed);

std::vector<Document> read_all(DocumentReader& reader);

}  // namespace crosstok
