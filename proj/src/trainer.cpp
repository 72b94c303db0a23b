#include "crosstok/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "crosstok/codec.hpp"
#include "crosstok/errors.hpp"
#include "crosstok/mining.hpp"
#include "crosstok/ngramlm.hpp"
#include "crosstok/utf8.hpp"
#include "crosstok/util.hpp"

namespace crosstok {

using nlohmann::json;

// ---- Config ----

std::array<int64_t, 3> TrainConfig::resolved_budgets() const {
  static constexpr int64_t kWeights[3] = {100, 100, 56};
  if (vocab_size < int64_t(kByteVocab))
    throw Error(Errc::InvalidConfig, "vocab_size must be at least 256");
  const int64_t total = vocab_size - int64_t(kByteVocab);
  std::array<int64_t, 3> budgets = {phase1_budget, phase2_budget, phase3_budget};
  std::array<bool, 3> open = {};
  int64_t fixed = 0, open_weight = 0;
  for (int i = 0; i < 3; i++) {
    if (budgets[i] < -1)
      throw Error(Errc::InvalidConfig, "phase budgets must be >= 0, or -1 for a default share");
    open[i] = budgets[i] == -1;
    if (open[i]) open_weight += kWeights[i];
    else fixed += budgets[i];
  }
  if (open_weight == 0) {
    if (fixed != total)
      throw Error(Errc::InvalidConfig, "explicit budgets sum to " + std::to_string(fixed) +
                                           " but vocab_size - 256 is " + std::to_string(total));
    return budgets;
  }
  int64_t remainder = total - fixed;
  if (remainder < 0)
    throw Error(Errc::InvalidConfig, "explicit budgets exceed vocab_size - 256");
  int64_t assigned = 0;
  for (int i = 0; i < 3; i++)
    if (open[i]) {
      budgets[i] = remainder * kWeights[i] / open_weight;
      assigned += budgets[i];
    }
  for (int i = 0; i < 3 && assigned < remainder; i++)
    if (open[i]) {
      budgets[i] += remainder - assigned;
      assigned = remainder;
    }
  return budgets;
}

void TrainConfig::validate() const {
  (void)resolved_budgets();
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
  if (lm_order < 2 || lm_order > 8)
    throw Error(Errc::InvalidConfig, "lm_order must be in [2, 8]");
  if (min_frequency < 1) throw Error(Errc::InvalidConfig, "min_frequency must be >= 1");
  if (n_max < 2) throw Error(Errc::InvalidConfig, "n_max must be >= 2");
  if (add_k < 0.0) throw Error(Errc::InvalidConfig, "add_k must be >= 0");
  for (double p : {p3_entropy_percentile, p3_internal_percentile, p3_external_percentile})
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(Errc::InvalidConfig, "percentile gates must lie in [0, 1]");
  if (force_thresholds) return;
  if (pmi_threshold < 1.5 || pmi_threshold > 3.0)
    throw Error(Errc::InvalidConfig,
                "pmi_threshold outside [1.5, 3.0]; set force_thresholds to override");
  if (!((min_frequency >= 3 && min_frequency <= 10) || min_frequency == 100))
    throw Error(Errc::InvalidConfig,
                "min_frequency outside [3, 10] and not 100; set force_thresholds to override");
  if (n_max > 5)
    throw Error(Errc::InvalidConfig, "n_max outside [2, 5]; set force_thresholds to override");
  if (add_k > 1.0)
    throw Error(Errc::InvalidConfig, "add_k outside [0, 1]; set force_thresholds to override");
  if (unigram_ratio < 0.8 || unigram_ratio > 1.0)
    throw Error(Errc::InvalidConfig,
                "unigram_ratio outside [0.8, 1.0]; set force_thresholds to override");
}

// ---- Trainer ----

namespace {

uint64_t pair_key(uint32_t a, uint32_t b) { return (uint64_t(a) << 32) | b; }

// (a1+a2) < (b1+b2) without building the concatenations.
bool concat_less(const std::string& a1, const std::string& a2, const std::string& b1,
                 const std::string& b2) {
  auto at = [](const std::string& x, const std::string& y, size_t i) {
    return uint8_t(i < x.size() ? x[i] : y[i - x.size()]);
  };
  size_t la = a1.size() + a2.size(), lb = b1.size() + b2.size();
  size_t n = std::min(la, lb);
  for (size_t i = 0; i < n; i++) {
    uint8_t ca = at(a1, a2, i), cb = at(b1, b2, i);
    if (ca != cb) return ca < cb;
  }
  return la < lb;
}

double map_entropy(const std::unordered_map<uint32_t, uint64_t>& m) {
  double total = 0.0;
  for (const auto& [sym, c] : m) total += double(c);
  double h = 0.0;
  for (const auto& [sym, c] : m) {
    double p = double(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Nearest-rank percentile over the values.
double percentile_value(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t idx = p <= 0.0 ? 0 : size_t(std::ceil(p * double(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

struct TypeInfo {
  std::vector<uint32_t> toks;
  uint64_t freq = 0;
};

struct P1Entry {
  int64_t count;
  uint32_t left, right;
};

struct Trainer {
  const std::vector<Document>& docs;
  const TrainConfig& cfg;
  const TelemetrySink& sink;
  std::array<int64_t, 3> budgets;

  TokenizerModel model = TokenizerModel::byte_model();
  SymbolTable syms;
  std::vector<TypeInfo> types;
  std::vector<std::vector<uint32_t>> stream;

  std::unordered_set<std::string> cross_bytes;  // dedupes cross results by content
  std::array<int64_t, 3> phase_merges = {0, 0, 0};
  std::array<std::string, 3> end_reason = {"budget", "budget", "budget"};
  size_t val_docs = 0;       // validation slice: first <= 64 docs
  double val_scalars = 0.0;  // Unicode scalars in the slice

  Trainer(const std::vector<Document>& d, const TrainConfig& c, const TelemetrySink& s)
      : docs(d), cfg(c), sink(s), budgets(c.resolved_budgets()) {}

  void emit(json record) {
    if (!sink) return;
    record["merges_total"] = model.merges.size();
    record["chars_per_token"] = validation_cpt();
    sink(record.dump());
  }

  double validation_cpt() const {
    uint64_t toks = 0;
    for (size_t d = 0; d < val_docs; d++)
      for (uint32_t s : stream[d]) toks += types[s].toks.size();
    return toks == 0 ? 0.0 : val_scalars / double(toks);
  }

  void ingest() {
    ScriptConfig script = cfg.script;
    script.normalize();
    model.script = script;
    uint64_t total_units = 0;
    stream.reserve(docs.size());
    for (const Document& d : docs) {
      auto units = segment_words(d.text, script);
      std::vector<uint32_t> ds;
      ds.reserve(units.size());
      for (const WordUnit& u : units) {
        std::string mat = u.leading_space ? " " + u.bytes : u.bytes;
        uint32_t id = syms.intern(mat);
        if (id == types.size()) {
          TypeInfo t;
          t.toks.reserve(mat.size());
          for (char c : mat) t.toks.push_back(uint8_t(c));
          types.push_back(std::move(t));
        }
        types[id].freq++;
        ds.push_back(id);
      }
      total_units += ds.size();
      stream.push_back(std::move(ds));
    }
    if (total_units == 0) throw Error(Errc::EmptyCorpus, "no word units in the corpus");
    val_docs = std::min<size_t>(stream.size(), 64);
    for (size_t d = 0; d < val_docs; d++) val_scalars += double(scalar_count(docs[d].text));
  }

  // ---- Phase 1: within-unit BPE over the type table ----

  void phase1() {
    const int64_t budget = budgets[0];
    std::unordered_map<uint64_t, int64_t> pc;              // pair -> freq-weighted count
    std::unordered_map<uint64_t, std::vector<uint32_t>> pt;  // pair -> candidate types
    auto reg = [&](uint64_t key, uint32_t t) {
      auto& v = pt[key];
      if (v.empty() || v.back() != t) v.push_back(t);
    };
    for (uint32_t t = 0; t < types.size(); t++) {
      const auto& toks = types[t].toks;
      for (size_t i = 0; i + 1 < toks.size(); i++) {
        uint64_t k = pair_key(toks[i], toks[i + 1]);
        pc[k] += int64_t(types[t].freq);
        reg(k, t);
      }
    }

    auto worse = [this](const P1Entry& a, const P1Entry& b) {
      if (a.count != b.count) return a.count < b.count;
      const auto& tk = model.tokens;
      if (tk[a.left] != tk[b.left] || tk[a.right] != tk[b.right]) {
        if (concat_less(tk[a.left], tk[a.right], tk[b.left], tk[b.right])) return false;
        if (concat_less(tk[b.left], tk[b.right], tk[a.left], tk[a.right])) return true;
      }
      return std::pair(a.left, a.right) > std::pair(b.left, b.right);
    };
    std::priority_queue<P1Entry, std::vector<P1Entry>, decltype(worse)> heap(worse);
    for (const auto& [k, c] : pc) heap.push({c, uint32_t(k >> 32), uint32_t(k & 0xffffffff)});

    int64_t done = 0;
    int64_t batch = 0;
    while (done < budget) {
      if (heap.empty()) {
        end_reason[0] = "no_pairs";
        break;
      }
      P1Entry top = heap.top();
      heap.pop();
      uint64_t k = pair_key(top.left, top.right);
      auto cur = pc.find(k);
      int64_t count = cur == pc.end() ? 0 : cur->second;
      if (count != top.count) {
        if (count >= 2) heap.push({count, top.left, top.right});
        continue;
      }
      if (count < 2) {
        end_reason[0] = "no_pair_above_1";
        break;
      }

      uint32_t res = model.add_merge(top.left, top.right, Phase::P1, false).result;
      std::vector<uint32_t> affected = std::move(pt[k]);
      pt.erase(k);
      pc.erase(k);
      std::sort(affected.begin(), affected.end());
      affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
      for (uint32_t t : affected) {
        auto& toks = types[t].toks;
        bool has = false;
        for (size_t i = 0; i + 1 < toks.size() && !has; i++)
          has = toks[i] == top.left && toks[i + 1] == top.right;
        if (!has) continue;
        int64_t freq = int64_t(types[t].freq);
        for (size_t i = 0; i + 1 < toks.size(); i++) {
          auto it = pc.find(pair_key(toks[i], toks[i + 1]));
          if (it != pc.end()) it->second -= freq;
        }
        std::vector<uint32_t> next;
        next.reserve(toks.size());
        for (size_t i = 0; i < toks.size();) {
          if (i + 1 < toks.size() && toks[i] == top.left && toks[i + 1] == top.right) {
            next.push_back(res);
            i += 2;
          } else {
            next.push_back(toks[i++]);
          }
        }
        toks = std::move(next);
        for (size_t i = 0; i + 1 < toks.size(); i++) {
          uint64_t nk = pair_key(toks[i], toks[i + 1]);
          int64_t c = pc[nk] += freq;
          if (toks[i] == res || toks[i + 1] == res) reg(nk, t);
          if (c >= 2) heap.push({c, toks[i], toks[i + 1]});
        }
      }
      done++;
      if (done % cfg.batch_size == 0 || done == budget)
        emit({{"phase", "P1"}, {"batch", batch++}, {"phase_merges", done},
              {"pair_count", count}});
    }
    phase_merges[0] = done;
    if (done > 0 && done % cfg.batch_size != 0 && done != budget)
      emit({{"phase", "P1"}, {"batch", batch}, {"phase_merges", done}});
  }

  // ---- Phases 2 and 3: batched candidate mining over the unit stream ----

  UnitCorpus snapshot() const {
    UnitCorpus uc;
    for (uint32_t s = 0; s < types.size(); s++) uc.symbols.intern(syms.bytes(s));
    for (const auto& d : stream) uc.add_doc(d);
    return uc;
  }

  // Mints within-unit rules until the symbol's current reduction is a single
  // token. Returns that token, or nothing when the budget runs out.
  std::optional<uint32_t> fold_symbol(uint32_t s, Phase ph, int64_t& left) {
    std::vector<uint32_t> toks = apply_intra_rules(model, types[s].toks);
    while (toks.size() > 1) {
      if (left <= 0) return std::nullopt;
      model.add_merge(toks[0], toks[1], ph, false);
      left--;
      toks = apply_intra_rules(model, std::move(toks));
    }
    return toks[0];
  }

  // Cross-merge chain left to right; existing rules are reused for free.
  // Duplicate byte content across distinct cross results is refused so fused
  // stream symbols stay unambiguous.
  bool chain_candidate(const Candidate& cand, Phase ph, int64_t& left) {
    std::vector<uint32_t> singles;
    singles.reserve(cand.seq.size());
    for (uint32_t s : cand.seq) {
      auto tok = fold_symbol(s, ph, left);
      if (!tok) return false;
      singles.push_back(*tok);
    }
    uint32_t cur = singles[0];
    for (size_t i = 1; i < singles.size(); i++) {
      auto it = model.rule_rank.find(rule_key(cur, singles[i], true));
      if (it != model.rule_rank.end()) {
        cur = model.merges[it->second].result;
        continue;
      }
      if (left <= 0) return false;
      std::string bytes = model.tokens[cur] + model.tokens[singles[i]];
      if (!cross_bytes.insert(bytes).second) return true;  // drop the tail, keep going
      cur = model.add_merge(cur, singles[i], ph, true).result;
      left--;
    }
    return true;
  }

  // Reduce every type under the rules added this batch.
  void apply_intra_to_types() {
    for (auto& t : types)
      if (t.toks.size() > 1) t.toks = apply_intra_rules(model, std::move(t.toks));
  }

  uint32_t fused_symbol(uint32_t a, uint32_t b, uint32_t result_tok) {
    uint32_t f = syms.intern(syms.bytes(a) + syms.bytes(b));
    if (f == types.size()) types.push_back({{result_tok}, 0});
    return f;
  }

  struct XItem {
    uint32_t sym;
    int32_t prev, next;
    bool alive = true;
  };
  struct XEntry {
    uint32_t rank, pos;
    bool operator>(const XEntry& o) const {
      return rank != o.rank ? rank > o.rank : pos > o.pos;
    }
  };

  int64_t apply_cross_to_stream() {
    int64_t fusions = 0;
    auto single = [&](uint32_t s) { return types[s].toks.size() == 1; };
    auto tok = [&](uint32_t s) { return types[s].toks[0]; };
    std::vector<XItem> items;
    for (auto& doc : stream) {
      if (doc.size() < 2) continue;
      items.clear();
      items.reserve(doc.size());
      for (size_t i = 0; i < doc.size(); i++)
        items.push_back({doc[i], int32_t(i) - 1,
                         i + 1 < doc.size() ? int32_t(i) + 1 : -1, true});
      std::priority_queue<XEntry, std::vector<XEntry>, std::greater<XEntry>> heap;
      auto push_pair = [&](int32_t i) {
        if (i < 0) return;
        int32_t j = items[i].next;
        if (j < 0 || !single(items[i].sym) || !single(items[j].sym)) return;
        auto it = model.rule_rank.find(rule_key(tok(items[i].sym), tok(items[j].sym), true));
        if (it != model.rule_rank.end()) heap.push({it->second, uint32_t(i)});
      };
      for (size_t i = 0; i + 1 < items.size(); i++) push_pair(int32_t(i));
      if (heap.empty()) continue;
      while (!heap.empty()) {
        auto [rank, pos] = heap.top();
        heap.pop();
        XItem& a = items[pos];
        if (!a.alive || !single(a.sym) || a.next < 0) continue;
        XItem& b = items[a.next];
        if (!single(b.sym)) continue;
        auto it = model.rule_rank.find(rule_key(tok(a.sym), tok(b.sym), true));
        if (it == model.rule_rank.end() || it->second != rank) continue;
        a.sym = fused_symbol(a.sym, b.sym, model.merges[rank].result);
        b.alive = false;
        a.next = b.next;
        if (b.next >= 0) items[b.next].prev = int32_t(pos);
        fusions++;
        push_pair(a.prev);
        push_pair(int32_t(pos));
      }
      std::vector<uint32_t> next_doc;
      next_doc.reserve(doc.size());
      for (int32_t i = 0; i >= 0 && size_t(i) < items.size(); i = items[i].next)
        next_doc.push_back(items[i].sym);
      doc = std::move(next_doc);
    }
    return fusions;
  }

  void phase23(Phase ph) {
    const int idx = ph == Phase::P2 ? 1 : 2;
    const int64_t budget = budgets[idx];
    const uint32_t n_hi = ph == Phase::P2 ? 2 : uint32_t(cfg.n_max);
    int64_t used = 0;
    int64_t batch = 0;
    while (used < budget) {
      UnitCorpus uc = snapshot();
      NGramTable table =
          NGramTable::count(uc, n_hi, uint64_t(cfg.min_frequency), false);
      std::vector<Candidate> pool = gather_candidates(
          table, uc.symbols, cfg.pmi_threshold, uint64_t(cfg.min_frequency), cfg.add_k);
      json record = {{"phase", ph == Phase::P2 ? "P2" : "P3"},
                     {"batch", batch},
                     {"pool", pool.size()}};

      if (ph == Phase::P3 && !pool.empty()) {
        std::vector<std::vector<uint32_t>> seqs;
        seqs.reserve(pool.size());
        for (const auto& c : pool) seqs.push_back(c.seq);
        auto ctxs = collect_contexts(uc, table, seqs);

        std::vector<size_t> alive;
        for (size_t i = 0; i < pool.size(); i++)
          if (!ctxs[i].first.empty() && !ctxs[i].second.empty()) alive.push_back(i);
        record["after_context_gate"] = alive.size();

        std::vector<double> hls, hrs;
        for (size_t i : alive) {
          pool[i].h_left = map_entropy(ctxs[i].first);
          pool[i].h_right = map_entropy(ctxs[i].second);
          hls.push_back(pool[i].h_left);
          hrs.push_back(pool[i].h_right);
        }
        double thr_l = percentile_value(hls, cfg.p3_entropy_percentile);
        double thr_r = percentile_value(hrs, cfg.p3_entropy_percentile);
        std::vector<size_t> low_h;
        for (size_t i : alive)
          if (pool[i].h_left <= thr_l && pool[i].h_right <= thr_r) low_h.push_back(i);
        record["after_entropy_gate"] = low_h.size();

        std::vector<Candidate> kept;
        if (!low_h.empty()) {
          std::vector<std::vector<uint32_t>> pseqs;
          pseqs.reserve(low_h.size());
          for (size_t i : low_h) pseqs.push_back(pool[i].seq);
          NGramLM lm = NGramLM::fit_focused(
              uc, uint32_t(cfg.lm_order), predictability_contexts(pseqs, uint32_t(cfg.lm_order)));
          std::vector<Predictability> preds;
          std::vector<double> internals, externals;
          for (size_t i : low_h) {
            preds.push_back(predictability(pool[i].seq, pool[i].frequency, lm, ctxs[i].second));
            internals.push_back(preds.back().internal);
            externals.push_back(preds.back().external);
          }
          double floor_i = percentile_value(internals, cfg.p3_internal_percentile);
          double ceil_e = percentile_value(externals, cfg.p3_external_percentile);
          for (size_t k = 0; k < low_h.size(); k++)
            if (preds[k].internal >= floor_i && preds[k].external <= ceil_e)
              kept.push_back(std::move(pool[low_h[k]]));
        }
        record["after_predictability_gate"] = kept.size();
        pool = std::move(kept);
      }

      rank_and_diversify(pool, size_t(std::min<int64_t>(cfg.batch_size, budget - used)));
      record["selected"] = pool.size();

      size_t rules_before = model.merges.size();
      int64_t left = budget - used;
      for (const Candidate& cand : pool) {
        if (left <= 0) break;
        if (!chain_candidate(cand, ph, left)) break;
      }
      int64_t new_rules = int64_t(model.merges.size() - rules_before);
      used += new_rules;

      apply_intra_to_types();
      int64_t fusions = apply_cross_to_stream();
      record["new_rules"] = new_rules;
      record["stream_fusions"] = fusions;
      emit(std::move(record));
      batch++;
      if (new_rules == 0 && fusions == 0) {
        end_reason[idx] = pool.empty() ? "no_candidates" : "stalled";
        break;
      }
    }
    phase_merges[idx] = used;
  }

  void finalize_metadata() {
    auto& md = model.metadata;
    md["tool_version"] = kToolVersion;
    md["vocab_size"] = std::to_string(cfg.vocab_size);
    md["pmi_threshold"] = format_double(cfg.pmi_threshold);
    md["min_frequency"] = std::to_string(cfg.min_frequency);
    md["n_max"] = std::to_string(cfg.n_max);
    md["add_k"] = format_double(cfg.add_k);
    md["p3_entropy_percentile"] = format_double(cfg.p3_entropy_percentile);
    md["p3_internal_percentile"] = format_double(cfg.p3_internal_percentile);
    md["p3_external_percentile"] = format_double(cfg.p3_external_percentile);
    md["batch_size"] = std::to_string(cfg.batch_size);
    md["lm_order"] = std::to_string(cfg.lm_order);
    md["unigram_ratio"] = format_double(cfg.unigram_ratio);
    md["rng_seed"] = std::to_string(cfg.rng_seed);
    md["train_docs"] = std::to_string(docs.size());
    for (int i = 0; i < 3; i++) {
      std::string p = "phase" + std::to_string(i + 1);
      md[p + "_budget"] = std::to_string(budgets[i]);
      md[p + "_merges"] = std::to_string(phase_merges[i]);
      md[p + "_end_reason"] = end_reason[i];
    }
  }

  TokenizerModel run() {
    ingest();
    phase1();
    phase23(Phase::P2);
    phase23(Phase::P3);
    finalize_metadata();
    model.validate();
    return std::move(model);
  }
};

}  // namespace

TokenizerModel train(const std::vector<Document>& corpus, const TrainConfig& cfg,
                     const TelemetrySink& telemetry) {
  cfg.validate();
  Trainer t(corpus, cfg, telemetry);
  return t.run();
}

}  // namespace crosstok
