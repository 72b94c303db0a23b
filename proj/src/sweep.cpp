#include "crosstok/sweep.hpp"

#include <chrono>
#include <unordered_map>

#include <json.hpp>

#include "crosstok/codec.hpp"
#include "crosstok/errors.hpp"
#include "crosstok/trainer.hpp"

namespace crosstok {

// ---- Search space ----

void SearchSpace::validate() const {
  if (vocab_lo < 257 || vocab_lo > vocab_hi)
    throw Error(Errc::InvalidConfig, "vocab_size range must satisfy 257 <= lo <= hi");
  if (!(pmi_lo <= pmi_hi))
    throw Error(Errc::InvalidConfig, "pmi_threshold range inverted");
  if (min_freq_lo < 1 || min_freq_lo > min_freq_hi)
    throw Error(Errc::InvalidConfig, "min_frequency range must satisfy 1 <= lo <= hi");
  if (n_max_lo < 2 || n_max_lo > n_max_hi)
    throw Error(Errc::InvalidConfig, "n_max range must satisfy 2 <= lo <= hi");
  if (add_k_lo < 0 || !(add_k_lo <= add_k_hi))
    throw Error(Errc::InvalidConfig, "add_k range must satisfy 0 <= lo <= hi");
}

TrialPoint sample_point(const SearchSpace& space, Rng& rng) {
  TrialPoint p;
  p.vocab_size = rng.range_int(space.vocab_lo, space.vocab_hi);
  p.pmi_threshold = rng.range_real(space.pmi_lo, space.pmi_hi);
  p.min_frequency = rng.range_int(space.min_freq_lo, space.min_freq_hi);
  p.n_max = rng.range_int(space.n_max_lo, space.n_max_hi);
  p.add_k = rng.range_real(space.add_k_lo, space.add_k_hi);
  return p;
}

bool heldout_doc(const Document& d) { return fnv1a64(d.id) % 10 == 9; }

// ---- Trial records ----

std::string trial_to_json(const TrialRecord& r) {
  nlohmann::json j;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["ok"] = r.ok;
  j["error"] = r.error;
  j["point"] = {{"vocab_size", r.point.vocab_size},
                {"pmi_threshold", r.point.pmi_threshold},
                {"min_frequency", r.point.min_frequency},
                {"n_max", r.point.n_max},
                {"add_k", r.point.add_k}};
  j["metrics"] = {{"chars_per_token", r.metrics.chars_per_token},
                  {"vocab_utilization", r.metrics.vocab_utilization},
                  {"unigram_perplexity", r.metrics.unigram_perplexity},
                  {"encode_latency", r.metrics.encode_latency},
                  {"corpus_docs", r.metrics.corpus_docs},
                  {"corpus_scalars", r.metrics.corpus_scalars},
                  {"corpus_bytes", r.metrics.corpus_bytes}};
  j["score"] = r.score;
  j["wall_seconds"] = r.wall_seconds;
  return j.dump();
}

TrialRecord trial_from_json(const std::string& line) {
  TrialRecord r;
  try {
    auto j = nlohmann::json::parse(line);
    r.trial = j.at("trial").get<uint64_t>();
    r.seed = j.at("seed").get<uint64_t>();
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    const auto& p = j.at("point");
    r.point.vocab_size = p.at("vocab_size").get<int64_t>();
    r.point.pmi_threshold = p.at("pmi_threshold").get<double>();
    r.point.min_frequency = p.at("min_frequency").get<int64_t>();
    r.point.n_max = p.at("n_max").get<int64_t>();
    r.point.add_k = p.at("add_k").get<double>();
    const auto& m = j.at("metrics");
    r.metrics.chars_per_token = m.at("chars_per_token").get<double>();
    r.metrics.vocab_utilization = m.at("vocab_utilization").get<double>();
    r.metrics.unigram_perplexity = m.at("unigram_perplexity").get<double>();
    r.metrics.encode_latency = m.at("encode_latency").get<double>();
    r.metrics.corpus_docs = m.at("corpus_docs").get<uint64_t>();
    r.metrics.corpus_scalars = m.at("corpus_scalars").get<uint64_t>();
    r.metrics.corpus_bytes = m.at("corpus_bytes").get<uint64_t>();
    r.score = j.at("score").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptModel, std::string("bad trial record: ") + e.what());
  }
  return r;
}

// ---- Random search ----

namespace {

TrialRecord run_trial(uint64_t trial, uint64_t trial_seed, const SearchSpace& space,
                      const ScoreWeights& weights,
                      const std::vector<Document>& train_docs,
                      const std::vector<Document>& heldout_docs) {
  TrialRecord r;
  r.trial = trial;
  r.seed = trial_seed;
  Rng rng(trial_seed);
  r.point = sample_point(space, rng);
  auto t0 = std::chrono::steady_clock::now();
  try {
    TrainConfig cfg;
    cfg.vocab_size = r.point.vocab_size;
    cfg.pmi_threshold = r.point.pmi_threshold;
    cfg.min_frequency = r.point.min_frequency;
    cfg.n_max = r.point.n_max;
    cfg.add_k = r.point.add_k;
    cfg.force_thresholds = true;  // the space, not the soft bounds, is authoritative here
    if (heldout_docs.empty())
      throw Error(Errc::EmptyCorpus, "held-out split is empty");
    TokenizerModel model = train(train_docs, cfg);
    Codec codec(std::move(model));
    r.metrics = evaluate(codec, heldout_docs, 3);
    r.score = score(r.metrics, weights);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  r.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

bool better(const TrialRecord& a, const TrialRecord& b) {  // a beats b
  if (a.score != b.score) return a.score > b.score;
  if (a.point.vocab_size != b.point.vocab_size)
    return a.point.vocab_size < b.point.vocab_size;
  return a.trial < b.trial;
}

}  // namespace

SweepResult random_search(const SearchSpace& space, uint64_t trials,
                          const ScoreWeights& weights,
                          const std::vector<Document>& corpus, uint64_t seed,
                          const std::vector<TrialRecord>& completed,
                          const TrialSink& sink) {
  space.validate();
  weights.validate();
  if (trials < 1) throw Error(Errc::InvalidConfig, "need at least one trial");

  std::vector<Document> train_docs, heldout_docs;
  for (const auto& d : corpus)
    (heldout_doc(d) ? heldout_docs : train_docs).push_back(d);

  std::unordered_map<uint64_t, const TrialRecord*> done;
  for (const auto& r : completed)
    if (r.trial < trials) done[r.trial] = &r;

  SweepResult out;
  for (uint64_t t = 0; t < trials; t++) {
    TrialRecord r;
    if (auto it = done.find(t); it != done.end()) {
      r = *it->second;
    } else {
      r = run_trial(t, mix_seed(seed, t), space, weights, train_docs, heldout_docs);
      if (sink) sink(r);
    }
    out.log.push_back(std::move(r));
  }

  const TrialRecord* best = nullptr;
  for (const auto& r : out.log)
    if (r.ok && (!best || better(r, *best))) best = &r;
  if (!best) throw Error(Errc::AllTrialsFailed, "no trial completed");
  out.best = *best;
  return out;
}

}  // namespace crosstok
