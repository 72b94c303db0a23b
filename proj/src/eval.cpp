#include "crosstok/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "crosstok/errors.hpp"
#include "crosstok/utf8.hpp"

namespace crosstok {

namespace {

void require_nonempty(const std::vector<Document>& corpus) {
  for (const auto& d : corpus)
    if (!d.text.empty()) return;
  throw Error(Errc::EmptyCorpus, "evaluation needs at least one non-empty document");
}

}  // namespace

// ---- ScoreWeights ----

void ScoreWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0)
    throw Error(Errc::InvalidConfig, "score weights must be nonnegative");
  if (alpha == 0 && beta == 0 && gamma == 0)
    throw Error(Errc::InvalidConfig, "score weights must not all be zero");
}

// ---- Metrics ----

double compression_ratio(const Codec& codec, const std::vector<Document>& corpus) {
  require_nonempty(corpus);
  Encoder enc(codec);
  uint64_t scalars = 0, tokens = 0;
  for (const auto& d : corpus) {
    scalars += scalar_count(d.text);
    tokens += enc.encode_ids(d.text).size();
  }
  return double(scalars) / double(tokens);
}

double vocab_utilization(const Codec& codec, const std::vector<Document>& corpus) {
  require_nonempty(corpus);
  Encoder enc(codec);
  std::unordered_set<uint32_t> seen;
  for (const auto& d : corpus)
    for (uint32_t id : enc.encode_ids(d.text)) seen.insert(id);
  return double(seen.size()) / double(codec.model().vocab_size());
}

double unigram_perplexity(const Codec& codec, const std::vector<Document>& corpus) {
  require_nonempty(corpus);
  Encoder enc(codec);
  std::vector<uint32_t> fit, hold;
  if (corpus.size() == 1) {
    auto ids = enc.encode_ids(corpus[0].text);
    size_t mid = (ids.size() + 1) / 2;
    fit.assign(ids.begin(), ids.begin() + mid);
    hold.assign(ids.begin() + mid, ids.end());
  } else {
    for (size_t i = 0; i < corpus.size(); i++) {
      auto ids = enc.encode_ids(corpus[i].text);
      auto& half = (i % 2 == 0) ? fit : hold;
      half.insert(half.end(), ids.begin(), ids.end());
    }
  }
  if (hold.empty()) return 1.0;

  std::unordered_map<uint32_t, uint64_t> counts;
  for (uint32_t id : fit) counts[id]++;
  const double denom = double(fit.size()) + double(codec.model().vocab_size());
  double bits = 0.0;
  for (uint32_t id : hold) {
    auto it = counts.find(id);
    uint64_t c = it == counts.end() ? 0 : it->second;
    bits -= std::log2(double(c + 1) / denom);
  }
  return std::exp2(bits / double(hold.size()));
}

double encode_latency(const Codec& codec, const std::vector<Document>& corpus,
                      int repetitions) {
  if (repetitions < 3)
    throw Error(Errc::InvalidConfig, "encode_latency needs at least 3 repetitions");
  uint64_t bytes = 0;
  for (const auto& d : corpus) bytes += d.text.size();
  if (bytes == 0) {
    std::fprintf(stderr, "warning: encode_latency on an empty corpus, reporting 0\n");
    return 0.0;
  }

  Encoder enc(codec);
  std::vector<uint32_t> sink;
  auto pass = [&] {
    for (const auto& d : corpus) {
      sink = enc.encode_ids(d.text);
    }
  };
  pass();  // warm-up fills the unit cache

  std::vector<double> secs;
  for (int r = 0; r < repetitions; r++) {
    auto t0 = std::chrono::steady_clock::now();
    pass();
    auto t1 = std::chrono::steady_clock::now();
    secs.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(secs.begin(), secs.end());
  double median = secs.size() % 2 == 1
                      ? secs[secs.size() / 2]
                      : 0.5 * (secs[secs.size() / 2 - 1] + secs[secs.size() / 2]);
  return median / (double(bytes) / 1e6);
}

double score(const EvalMetrics& m, const ScoreWeights& w) {
  w.validate();
  return w.alpha * m.chars_per_token - w.beta * std::log(m.unigram_perplexity) -
         w.gamma * m.encode_latency;
}

EvalMetrics evaluate(const Codec& codec, const std::vector<Document>& corpus,
                     int latency_repetitions) {
  EvalMetrics m;
  m.chars_per_token = compression_ratio(codec, corpus);
  m.vocab_utilization = vocab_utilization(codec, corpus);
  m.unigram_perplexity = unigram_perplexity(codec, corpus);
  m.encode_latency = encode_latency(codec, corpus, latency_repetitions);
  m.corpus_docs = corpus.size();
  for (const auto& d : corpus) {
    m.corpus_scalars += scalar_count(d.text);
    m.corpus_bytes += d.text.size();
  }
  return m;
}

}  // namespace crosstok
