#include "crosstok/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "crosstok/errors.hpp"
#include "crosstok/util.hpp"

namespace crosstok {

// ---- SymbolTable ----

uint32_t SymbolTable::intern(std::string_view bytes) {
  auto it = ids_.find(bytes);
  if (it != ids_.end()) return it->second;
  store_.emplace_back(bytes);
  uint32_t id = uint32_t(store_.size() - 1);
  ids_.emplace(std::string_view(store_.back()), id);
  return id;
}

std::optional<uint32_t> SymbolTable::find(std::string_view bytes) const {
  auto it = ids_.find(bytes);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void UnitCorpus::add_doc(std::span<const uint32_t> syms) {
  if (doc_offsets.empty()) doc_offsets.push_back(0);
  stream.insert(stream.end(), syms.begin(), syms.end());
  doc_offsets.push_back(stream.size());
}

UnitCorpus make_unit_corpus(const std::vector<std::vector<WordUnit>>& docs) {
  UnitCorpus corpus;
  corpus.doc_offsets.push_back(0);
  for (const auto& doc : docs) {
    for (const auto& u : doc) corpus.stream.push_back(corpus.symbols.intern(u.bytes));
    corpus.doc_offsets.push_back(corpus.stream.size());
  }
  return corpus;
}

// ---- NGramTable ----

namespace {

inline uint64_t pack(uint32_t hi, uint32_t lo) { return (uint64_t(hi) << 32) | lo; }

}  // namespace

NGramTable NGramTable::count(const UnitCorpus& corpus, uint32_t n_max, uint64_t min_count,
                             bool with_contexts) {
  if (n_max < 2) throw Error(Errc::InvalidConfig, "count_ngrams needs n_max >= 2");
  NGramTable t;
  t.n_max_ = n_max;
  t.min_count_ = min_count;
  t.with_contexts_ = with_contexts;
  t.windows_.assign(n_max + 1, 0);
  t.distinct_.assign(n_max + 1, 0);
  t.levels_.resize(n_max + 1);
  t.unigrams_.assign(corpus.symbols.size(), 0);

  size_t docs = corpus.doc_count();
  for (size_t d = 0; d < docs; d++) {
    auto doc = corpus.doc(d);
    for (uint32_t n = 1; n <= n_max; n++)
      if (doc.size() >= n) t.windows_[n] += doc.size() - n + 1;
    for (uint32_t sym : doc) t.unigrams_[sym]++;
  }
  for (uint64_t c : t.unigrams_)
    if (c > 0) t.distinct_[1]++;

  // Bigrams, then longer grams over surviving prefixes only.
  {
    Level& lvl = t.levels_[2];
    for (size_t d = 0; d < docs; d++) {
      auto doc = corpus.doc(d);
      for (size_t i = 0; i + 1 < doc.size(); i++) {
        uint64_t key = pack(doc[i], doc[i + 1]);
        auto [it, fresh] = lvl.ids.try_emplace(key, uint32_t(lvl.counts.size()));
        if (fresh) {
          lvl.counts.push_back(0);
          lvl.keys.push_back(key);
        }
        lvl.counts[it->second]++;
      }
    }
    t.distinct_[2] = lvl.counts.size();
    for (auto it = lvl.ids.begin(); it != lvl.ids.end();)
      it = lvl.counts[it->second] < min_count ? lvl.ids.erase(it) : std::next(it);
  }
  for (uint32_t n = 3; n <= n_max; n++) {
    Level& lvl = t.levels_[n];
    for (size_t d = 0; d < docs; d++) {
      auto doc = corpus.doc(d);
      if (doc.size() < n) continue;
      for (size_t i = 0; i + n <= doc.size(); i++) {
        auto p2 = t.levels_[2].ids.find(pack(doc[i], doc[i + 1]));
        if (p2 == t.levels_[2].ids.end()) continue;
        uint32_t pid = p2->second;
        bool ok = true;
        for (uint32_t k = 3; k < n; k++) {
          auto pk = t.levels_[k].ids.find(pack(pid, doc[i + k - 1]));
          if (pk == t.levels_[k].ids.end()) {
            ok = false;
            break;
          }
          pid = pk->second;
        }
        if (!ok) continue;
        uint64_t key = pack(pid, doc[i + n - 1]);
        auto [it, fresh] = lvl.ids.try_emplace(key, uint32_t(lvl.counts.size()));
        if (fresh) {
          lvl.counts.push_back(0);
          lvl.keys.push_back(key);
        }
        lvl.counts[it->second]++;
      }
    }
    t.distinct_[n] = lvl.counts.size();
    for (auto it = lvl.ids.begin(); it != lvl.ids.end();)
      it = lvl.counts[it->second] < min_count ? lvl.ids.erase(it) : std::next(it);
  }

  if (with_contexts) {
    t.uni_left_.resize(corpus.symbols.size());
    t.uni_right_.resize(corpus.symbols.size());
    for (uint32_t n = 2; n <= n_max; n++) {
      t.levels_[n].left.resize(t.levels_[n].counts.size());
      t.levels_[n].right.resize(t.levels_[n].counts.size());
    }
    for (size_t d = 0; d < docs; d++) {
      auto doc = corpus.doc(d);
      for (size_t i = 0; i < doc.size(); i++) {
        if (t.unigrams_[doc[i]] >= min_count) {
          if (i > 0) t.uni_left_[doc[i]][doc[i - 1]]++;
          if (i + 1 < doc.size()) t.uni_right_[doc[i]][doc[i + 1]]++;
        }
        uint32_t pid = 0;
        for (uint32_t n = 2; n <= n_max && i + n <= doc.size(); n++) {
          uint64_t key = n == 2 ? pack(doc[i], doc[i + 1]) : pack(pid, doc[i + n - 1]);
          auto it = t.levels_[n].ids.find(key);
          if (it == t.levels_[n].ids.end()) break;
          pid = it->second;
          if (i > 0) t.levels_[n].left[pid][doc[i - 1]]++;
          if (i + n < doc.size()) t.levels_[n].right[pid][doc[i + n]]++;
        }
      }
    }
  }
  return t;
}

std::optional<uint32_t> NGramTable::gram_id(std::span<const uint32_t> seq) const {
  uint32_t n = uint32_t(seq.size());
  if (n < 2 || n > n_max_) return std::nullopt;
  auto it2 = levels_[2].ids.find(pack(seq[0], seq[1]));
  if (it2 == levels_[2].ids.end()) return std::nullopt;
  uint32_t id = it2->second;
  for (uint32_t k = 3; k <= n; k++) {
    auto it = levels_[k].ids.find(pack(id, seq[k - 1]));
    if (it == levels_[k].ids.end()) return std::nullopt;
    id = it->second;
  }
  return id;
}

uint64_t NGramTable::count_of(std::span<const uint32_t> seq) const {
  if (seq.size() == 1) return unigram_count(seq[0]);
  auto id = gram_id(seq);
  return id ? levels_[seq.size()].counts[*id] : 0;
}

uint64_t NGramTable::unigram_count(uint32_t sym) const {
  if (sym >= unigrams_.size()) return 0;
  uint64_t c = unigrams_[sym];
  return c >= min_count_ ? c : 0;
}

double NGramTable::pmi(std::span<const uint32_t> seq, double add_k) const {
  uint32_t n = uint32_t(seq.size());
  if (n < 2) throw Error(Errc::InvalidConfig, "pmi needs a sequence of length >= 2");
  if (n > n_max_) throw Error(Errc::MissingCount, "sequence longer than counted n_max");
  uint64_t c = count_of(seq);
  if (c == 0) throw Error(Errc::MissingCount, "sequence not present in table");
  double p_seq =
      (double(c) + add_k) / (double(windows_[n]) + add_k * double(distinct_[n]));
  double log_prod = 0.0;
  for (uint32_t sym : seq) {
    uint64_t cu = unigram_count(sym);
    if (cu == 0) throw Error(Errc::MissingCount, "unigram not present in table");
    log_prod += std::log2((double(cu) + add_k) /
                          (double(windows_[1]) + add_k * double(distinct_[1])));
  }
  return std::log2(p_seq) - log_prod;
}

const std::unordered_map<uint32_t, uint64_t>* NGramTable::contexts(
    std::span<const uint32_t> seq, Side side) const {
  if (!with_contexts_) return nullptr;
  if (seq.size() == 1) {
    if (seq[0] >= unigrams_.size() || unigram_count(seq[0]) == 0) return nullptr;
    const auto& m = side == Side::Left ? uni_left_[seq[0]] : uni_right_[seq[0]];
    return m.empty() ? nullptr : &m;
  }
  auto id = gram_id(seq);
  if (!id) return nullptr;
  const Level& lvl = levels_[seq.size()];
  const auto& m = side == Side::Left ? lvl.left[*id] : lvl.right[*id];
  return m.empty() ? nullptr : &m;
}

double NGramTable::branching_entropy(std::span<const uint32_t> seq, Side side) const {
  const auto* ctx = contexts(seq, side);
  if (!ctx) throw Error(Errc::NoContexts, "no recorded contexts on that side");
  uint64_t total = 0;
  for (const auto& [sym, c] : *ctx) {
    (void)sym;
    total += c;
  }
  double h = 0.0;
  for (const auto& [sym, c] : *ctx) {
    (void)sym;
    double p = double(c) / double(total);
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

void NGramTable::unpack(uint32_t n, uint32_t id, std::vector<uint32_t>& out) const {
  out.resize(n);
  for (uint32_t k = n; k >= 3; k--) {
    uint64_t key = levels_[k].keys[id];
    out[k - 1] = uint32_t(key & 0xffffffffu);
    id = uint32_t(key >> 32);
  }
  uint64_t key2 = levels_[2].keys[id];
  out[0] = uint32_t(key2 >> 32);
  out[1] = uint32_t(key2 & 0xffffffffu);
}

void NGramTable::for_each(
    uint32_t n, const std::function<void(std::span<const uint32_t>, uint64_t)>& fn) const {
  if (n < 2 || n > n_max_) return;
  std::vector<uint32_t> seq;
  for (const auto& [key, id] : levels_[n].ids) {
    (void)key;
    unpack(n, id, seq);
    fn(seq, levels_[n].counts[id]);
  }
}

std::optional<std::pair<uint32_t, uint32_t>> NGramTable::gram_of(
    std::span<const uint32_t> seq) const {
  auto id = gram_id(seq);
  if (!id) return std::nullopt;
  return std::make_pair(uint32_t(seq.size()), *id);
}

// ---- Sidecar serialization ----

namespace {

constexpr char kMagic[4] = {'C', 'T', 'N', 'G'};
constexpr uint32_t kSidecarVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view data, size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw Error(Errc::CorruptModel, "sidecar truncated");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void NGramTable::save(const std::string& path, const SymbolTable& symbols) const {
  std::string out;
  out.append(kMagic, 4);
  put<uint32_t>(out, kSidecarVersion);
  put<uint32_t>(out, n_max_);
  put<uint64_t>(out, min_count_);
  put<uint64_t>(out, uint64_t(symbols.size()));
  for (size_t s = 0; s < symbols.size(); s++) {
    const std::string& b = symbols.bytes(uint32_t(s));
    put<uint32_t>(out, uint32_t(b.size()));
    out += b;
  }
  for (uint32_t n = 1; n <= n_max_; n++) {
    put<uint64_t>(out, windows_[n]);
    put<uint64_t>(out, distinct_[n]);
  }
  put<uint64_t>(out, uint64_t(unigrams_.size()));
  for (uint64_t c : unigrams_) put<uint64_t>(out, c);
  for (uint32_t n = 2; n <= n_max_; n++) {
    const Level& lvl = levels_[n];
    put<uint64_t>(out, uint64_t(lvl.ids.size()));
    // sorted by key so files are byte-identical across runs
    std::vector<uint64_t> keys;
    keys.reserve(lvl.ids.size());
    for (const auto& [key, id] : lvl.ids) {
      (void)id;
      keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    for (uint64_t key : keys) {
      put<uint64_t>(out, key);
      put<uint64_t>(out, levels_[n].counts[lvl.ids.at(key)]);
    }
  }
  write_file(path, out);
}

std::pair<NGramTable, SymbolTable> NGramTable::load(const std::string& path) {
  std::string data = read_file(path);
  size_t pos = 0;
  if (data.size() < 8 || std::memcmp(data.data(), kMagic, 4) != 0)
    throw Error(Errc::CorruptModel, "not an n-gram sidecar file");
  pos = 4;
  uint32_t version = take<uint32_t>(data, pos);
  if (version != kSidecarVersion)
    throw Error(Errc::SchemaVersionMismatch, "sidecar version " + std::to_string(version) +
                                                 ", supported " + std::to_string(kSidecarVersion));
  NGramTable t;
  SymbolTable symbols;
  t.n_max_ = take<uint32_t>(data, pos);
  t.min_count_ = take<uint64_t>(data, pos);
  uint64_t sym_count = take<uint64_t>(data, pos);
  for (uint64_t s = 0; s < sym_count; s++) {
    uint32_t len = take<uint32_t>(data, pos);
    if (pos + len > data.size()) throw Error(Errc::CorruptModel, "sidecar truncated");
    symbols.intern(std::string_view(data).substr(pos, len));
    pos += len;
  }
  t.windows_.assign(t.n_max_ + 1, 0);
  t.distinct_.assign(t.n_max_ + 1, 0);
  for (uint32_t n = 1; n <= t.n_max_; n++) {
    t.windows_[n] = take<uint64_t>(data, pos);
    t.distinct_[n] = take<uint64_t>(data, pos);
  }
  uint64_t uni = take<uint64_t>(data, pos);
  t.unigrams_.resize(uni);
  for (uint64_t i = 0; i < uni; i++) t.unigrams_[i] = take<uint64_t>(data, pos);
  t.levels_.resize(t.n_max_ + 1);
  for (uint32_t n = 2; n <= t.n_max_; n++) {
    Level& lvl = t.levels_[n];
    uint64_t entries = take<uint64_t>(data, pos);
    lvl.counts.reserve(entries);
    for (uint64_t i = 0; i < entries; i++) {
      uint64_t key = take<uint64_t>(data, pos);
      uint64_t count = take<uint64_t>(data, pos);
      lvl.ids.emplace(key, uint32_t(lvl.counts.size()));
      lvl.counts.push_back(count);
      lvl.keys.push_back(key);
    }
  }
  if (pos != data.size()) throw Error(Errc::CorruptModel, "trailing bytes in sidecar");
  return {std::move(t), std::move(symbols)};
}

// ---- Candidate selection ----

std::vector<Candidate> gather_candidates(const NGramTable& t, const SymbolTable& symbols,
                                         double pmi_threshold, uint64_t min_frequency,
                                         double add_k) {
  std::vector<Candidate> pool;
  for (uint32_t n = 2; n <= t.n_max(); n++) {
    t.for_each(n, [&](std::span<const uint32_t> seq, uint64_t freq) {
      if (freq < min_frequency) return;
      double p = t.pmi(seq, add_k);
      if (!(p > pmi_threshold)) return;
      Candidate c;
      c.seq.assign(seq.begin(), seq.end());
      c.frequency = freq;
      c.pmi = p;
      c.score = p;
      if (t.with_contexts()) {
        const auto* l = t.contexts(seq, Side::Left);
        const auto* r = t.contexts(seq, Side::Right);
        if (!l || !r) return;  // occurs only at document edges, entropy undefined
        c.h_left = t.branching_entropy(seq, Side::Left);
        c.h_right = t.branching_entropy(seq, Side::Right);
      }
      for (uint32_t sym : c.seq) c.bytes += symbols.bytes(sym);
      pool.push_back(std::move(c));
    });
  }
  return pool;
}

namespace {

bool candidate_order(const Candidate& a, const Candidate& b) {
  if (a.pmi != b.pmi) return a.pmi > b.pmi;
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  if (a.bytes != b.bytes) return a.bytes < b.bytes;
  return a.seq < b.seq;
}

uint64_t multiset_overlap(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  uint64_t overlap = 0;
  std::vector<bool> used(b.size(), false);
  for (uint32_t sym : a) {
    for (size_t j = 0; j < b.size(); j++) {
      if (!used[j] && b[j] == sym) {
        used[j] = true;
        overlap++;
        break;
      }
    }
  }
  return overlap;
}

}  // namespace

void rank_and_diversify(std::vector<Candidate>& pool, size_t max_candidates) {
  std::sort(pool.begin(), pool.end(), candidate_order);
  std::vector<Candidate> accepted;
  for (auto& c : pool) {
    if (accepted.size() >= max_candidates) break;
    bool rejected = false;
    for (const auto& a : accepted) {
      if (2 * multiset_overlap(c.seq, a.seq) >= c.seq.size()) {
        rejected = true;
        break;
      }
    }
    if (!rejected) accepted.push_back(std::move(c));
  }
  pool = std::move(accepted);
}

std::vector<Candidate> select_candidates(const NGramTable& t, const SymbolTable& symbols,
                                         double pmi_threshold, uint64_t min_frequency,
                                         size_t max_candidates, double add_k) {
  auto pool = gather_candidates(t, symbols, pmi_threshold, min_frequency, add_k);
  rank_and_diversify(pool, max_candidates);
  return pool;
}

// ---- Targeted context collection ----

std::vector<std::pair<std::unordered_map<uint32_t, uint64_t>,
                      std::unordered_map<uint32_t, uint64_t>>>
collect_contexts(const UnitCorpus& corpus, const NGramTable& t,
                 const std::vector<std::vector<uint32_t>>& seqs) {
  std::vector<std::pair<std::unordered_map<uint32_t, uint64_t>,
                        std::unordered_map<uint32_t, uint64_t>>>
      out(seqs.size());
  // wanted[n]: gram id -> seq index
  std::vector<std::unordered_map<uint32_t, uint32_t>> wanted(t.n_max() + 1);
  for (size_t i = 0; i < seqs.size(); i++) {
    auto gram = t.gram_of(seqs[i]);
    if (gram) wanted[gram->first].emplace(gram->second, uint32_t(i));
  }
  for (size_t d = 0; d < corpus.doc_count(); d++) {
    auto doc = corpus.doc(d);
    for (size_t i = 0; i < doc.size(); i++) {
      uint32_t pid = 0;
      for (uint32_t n = 2; n <= t.n_max() && i + n <= doc.size(); n++) {
        uint64_t key = n == 2 ? pack(doc[i], doc[i + 1]) : pack(pid, doc[i + n - 1]);
        auto it = t.levels_[n].ids.find(key);
        if (it == t.levels_[n].ids.end()) break;
        pid = it->second;
        auto w = wanted[n].find(pid);
        if (w != wanted[n].end()) {
          auto& [left, right] = out[w->second];
          if (i > 0) left[doc[i - 1]]++;
          if (i + n < doc.size()) right[doc[i + n]]++;
        }
      }
    }
  }
  return out;
}

}  // namespace crosstok
