#include "crosstok/ngramlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>

#include "crosstok/errors.hpp"
#include "crosstok/util.hpp"

namespace crosstok {

std::string NGramLM::key_of(std::span<const uint32_t> seq) {
  std::string key(seq.size() * 4, '\0');
  std::memcpy(key.data(), seq.data(), seq.size() * 4);
  return key;
}

NGramLM NGramLM::fit(const UnitCorpus& corpus, uint32_t order) {
  if (order < 1) throw Error(Errc::InvalidConfig, "n-gram order must be >= 1");
  NGramLM lm;
  lm.order_ = order;
  lm.total_units_ = corpus.stream.size();
  if (lm.total_units_ == 0) throw Error(Errc::EmptyCorpus, "cannot fit on an empty corpus");
  std::vector<bool> seen(corpus.symbols.size(), false);
  for (uint32_t sym : corpus.stream)
    if (!seen[sym]) {
      seen[sym] = true;
      lm.vocab_size_++;
    }
  for (size_t d = 0; d < corpus.doc_count(); d++) {
    auto doc = corpus.doc(d);
    for (size_t i = 0; i < doc.size(); i++) {
      size_t k_max = std::min<size_t>(order - 1, i);
      for (size_t k = 0; k <= k_max; k++) {
        std::string ctx = key_of(doc.subspan(i - k, k));
        lm.ctx_counts_[ctx]++;
        ctx.append(reinterpret_cast<const char*>(&doc[i]), 4);
        lm.cond_counts_[ctx]++;
      }
    }
  }
  return lm;
}

NGramLM NGramLM::fit_focused(const UnitCorpus& corpus, uint32_t order,
                             const std::vector<std::vector<uint32_t>>& contexts) {
  if (order < 1) throw Error(Errc::InvalidConfig, "n-gram order must be >= 1");
  NGramLM lm;
  lm.order_ = order;
  lm.total_units_ = corpus.stream.size();
  if (lm.total_units_ == 0) throw Error(Errc::EmptyCorpus, "cannot fit on an empty corpus");
  std::vector<bool> seen(corpus.symbols.size(), false);
  for (uint32_t sym : corpus.stream)
    if (!seen[sym]) {
      seen[sym] = true;
      lm.vocab_size_++;
    }
  std::unordered_set<std::string> wanted;
  std::set<size_t> lengths;
  for (const auto& ctx : contexts) {
    if (ctx.size() > order - 1)
      throw Error(Errc::InvalidConfig, "focused context longer than order - 1");
    wanted.insert(key_of(ctx));
    lengths.insert(ctx.size());
  }
  for (size_t d = 0; d < corpus.doc_count(); d++) {
    auto doc = corpus.doc(d);
    for (size_t i = 0; i < doc.size(); i++) {
      for (size_t k : lengths) {
        if (k > i) continue;
        std::string ctx = key_of(doc.subspan(i - k, k));
        if (!wanted.count(ctx)) continue;
        lm.ctx_counts_[ctx]++;
        ctx.append(reinterpret_cast<const char*>(&doc[i]), 4);
        lm.cond_counts_[ctx]++;
      }
    }
  }
  return lm;
}

double NGramLM::log2_prob(std::span<const uint32_t> history, uint32_t next) const {
  size_t k = std::min<size_t>(order_ - 1, history.size());
  std::string ctx = key_of(history.subspan(history.size() - k, k));
  uint64_t ctx_count = 0;
  if (auto it = ctx_counts_.find(ctx); it != ctx_counts_.end()) ctx_count = it->second;
  ctx.append(reinterpret_cast<const char*>(&next), 4);
  uint64_t cond_count = 0;
  if (auto it = cond_counts_.find(ctx); it != cond_counts_.end()) cond_count = it->second;
  return std::log2(double(cond_count + 1) / double(ctx_count + vocab_size_));
}

// ---- Predictability ----

Predictability predictability(std::span<const uint32_t> seq, uint64_t occurrences,
                              const NGramLM& lm,
                              const std::unordered_map<uint32_t, uint64_t>& right_contexts) {
  if (seq.size() < 2)
    throw Error(Errc::InvalidConfig, "predictability needs a sequence of length >= 2");
  if (occurrences == 0) throw Error(Errc::UnseenSequence, "sequence never occurs in corpus");
  Predictability p;
  for (size_t j = 1; j < seq.size(); j++)
    p.internal += lm.log2_prob(seq.subspan(0, j), seq[j]);
  p.internal /= double(seq.size() - 1);
  if (right_contexts.empty())
    throw Error(Errc::NoContexts, "sequence has no recorded followers");
  uint64_t total = 0;
  for (const auto& [sym, c] : right_contexts) {
    p.external += double(c) * lm.log2_prob(seq, sym);
    total += c;
  }
  p.external /= double(total);
  return p;
}

std::vector<std::vector<uint32_t>> predictability_contexts(
    const std::vector<std::vector<uint32_t>>& seqs, uint32_t order) {
  std::set<std::vector<uint32_t>> out;
  for (const auto& seq : seqs) {
    for (size_t j = 1; j < seq.size(); j++) {
      size_t k = std::min<size_t>(order - 1, j);
      out.emplace(seq.begin() + (j - k), seq.begin() + j);
    }
    size_t k = std::min<size_t>(order - 1, seq.size());
    out.emplace(seq.end() - k, seq.end());
  }
  return {out.begin(), out.end()};
}

// ---- Serialization ----

namespace {

constexpr char kMagic[4] = {'C', 'T', 'L', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view data, size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw Error(Errc::CorruptModel, "lm file truncated");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_map(std::string& out, const std::unordered_map<std::string, uint64_t>& m) {
  put<uint64_t>(out, m.size());
  std::vector<const std::string*> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) {
    (void)v;
    keys.push_back(&k);
  }
  std::sort(keys.begin(), keys.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const auto* k : keys) {
    put<uint32_t>(out, uint32_t(k->size()));
    out += *k;
    put<uint64_t>(out, m.at(*k));
  }
}

std::unordered_map<std::string, uint64_t> take_map(std::string_view data, size_t& pos) {
  std::unordered_map<std::string, uint64_t> m;
  uint64_t n = take<uint64_t>(data, pos);
  for (uint64_t i = 0; i < n; i++) {
    uint32_t len = take<uint32_t>(data, pos);
    if (pos + len > data.size()) throw Error(Errc::CorruptModel, "lm file truncated");
    std::string key(data.substr(pos, len));
    pos += len;
    m.emplace(std::move(key), take<uint64_t>(data, pos));
  }
  return m;
}

}  // namespace

void NGramLM::save(const std::string& path) const {
  std::string out;
  out.append(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, order_);
  put<uint64_t>(out, vocab_size_);
  put<uint64_t>(out, total_units_);
  put_map(out, ctx_counts_);
  put_map(out, cond_counts_);
  write_file(path, out);
}

NGramLM NGramLM::load(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < 8 || std::memcmp(data.data(), kMagic, 4) != 0)
    throw Error(Errc::CorruptModel, "not an lm file");
  size_t pos = 4;
  uint32_t version = take<uint32_t>(data, pos);
  if (version != kVersion)
    throw Error(Errc::SchemaVersionMismatch,
                "lm file version " + std::to_string(version) + ", supported " +
                    std::to_string(kVersion));
  NGramLM lm;
  lm.order_ = take<uint32_t>(data, pos);
  lm.vocab_size_ = take<uint64_t>(data, pos);
  lm.total_units_ = take<uint64_t>(data, pos);
  lm.ctx_counts_ = take_map(data, pos);
  lm.cond_counts_ = take_map(data, pos);
  if (pos != data.size()) throw Error(Errc::CorruptModel, "trailing bytes in lm file");
  return lm;
}

}  // namespace crosstok
