// crosstok: filter / train / encode / decode / eval / sweep pipelines.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crosstok/codec.hpp"
#include "crosstok/corpus.hpp"
#include "crosstok/errors.hpp"
#include "crosstok/eval.hpp"
#include "crosstok/sweep.hpp"
#include "crosstok/trainer.hpp"
#include "crosstok/utf8.hpp"
#include "crosstok/util.hpp"

using namespace crosstok;
using nlohmann::json;

namespace {

// ---- Config file pre-pass ----

// --config supplies defaults for the chosen subcommand; explicit flags win.
// Keys mirror flag names with underscores. Unknown keys are rejected so a
// typo cannot silently fall back to a default.
json load_config_file(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; i++) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, "config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config file must hold one object");
  return j;
}

struct KeyRegistry {
  std::map<std::string, std::set<std::string>> known;  // subcommand -> keys

  template <class T>
  void wire(const json& cfg, const std::string& cmd, const char* key, T& var) {
    known[cmd].insert(key);
    if (!cfg.contains(key)) return;
    try {
      var = cfg.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, std::string("config key ") + key + ": " + e.what());
    }
  }

  void check(const json& cfg, const std::string& cmd) const {
    auto it = known.find(cmd);
    for (const auto& [key, value] : cfg.items())
      if (it == known.end() || !it->second.count(key))
        throw Error(Errc::InvalidConfig, "config key " + key + " not used by " + cmd);
  }
};

// ---- Manifest ----

struct Manifest {
  std::string command;
  uint64_t seed = 0;
  int workers_requested = 1;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at;

  void write_next_to(const std::string& primary_output) const {
    json m;
    m["command"] = command;
    m["tool_version"] = kToolVersion;
    m["seed"] = seed;
    m["workers_requested"] = workers_requested;
    m["workers_effective"] = 1;  // single hardware thread; sharding folds to one
    m["config"] = config;
    json in = json::object();
    for (const auto& p : inputs) in[p] = to_hex16(file_digest(p));
    m["inputs"] = in;
    m["outputs"] = outputs;
    m["started_at"] = started_at;
    m["finished_at"] = iso8601_utc_now();
    write_file(primary_output + ".manifest.json", m.dump(2) + "\n");
  }
};

std::vector<Document> load_corpus(const std::string& path) {
  auto reader = open_reader(path);
  auto docs = read_all(*reader);
  return docs;
}

// ---- filter ----

struct FilterArgs {
  std::vector<std::string> inputs;
  std::string output;
  CurationConfig cur;
  uint64_t seed = 0;
  int workers = 1;
};

int cmd_filter(const FilterArgs& a, const json& effective) {
  Manifest man{"filter", a.seed, a.workers, effective, a.inputs, {}, iso8601_utc_now()};
  std::ofstream out(a.output, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + a.output + " for writing");

  CurationStats stats;
  for (const auto& path : a.inputs) {
    auto reader = open_reader(path);
    CurationStats s = stream_filter(*reader, a.cur, [&](Document&& d) {
      json line;
      line["id"] = d.id;
      line["text"] = d.text;
      line["entropy_bits"] = d.entropy_bits;
      line["entropy_class"] = entropy_class_name(d.entropy_class);
      out << line.dump() << "\n";
    });
    stats.merge(s);
  }
  out.flush();
  if (!out) throw Error(Errc::IoError, "short write to " + a.output);

  json rep;
  rep["docs_seen"] = {{"low", stats.docs_seen[0]}, {"medium", stats.docs_seen[1]},
                      {"high", stats.docs_seen[2]}};
  rep["docs_kept"] = {{"low", stats.docs_kept[0]}, {"medium", stats.docs_kept[1]},
                      {"high", stats.docs_kept[2]}};
  rep["bytes_seen"] = stats.bytes_seen;
  rep["bytes_kept"] = stats.bytes_kept;
  rep["decode_failures"] = stats.decode_failures;
  rep["too_short"] = stats.too_short;
  double retention = stats.total_seen()
                         ? double(stats.total_kept()) / double(stats.total_seen())
                         : 0.0;
  rep["overall_doc_retention"] = retention;
  write_file(a.output + ".stats.json", rep.dump(2) + "\n");

  man.outputs = {a.output, a.output + ".stats.json"};
  man.write_next_to(a.output);
  std::printf("filter: kept %llu of %llu docs (%.1f%%), %llu of %llu bytes\n",
              (unsigned long long)stats.total_kept(), (unsigned long long)stats.total_seen(),
              100.0 * retention, (unsigned long long)stats.bytes_kept,
              (unsigned long long)stats.bytes_seen);
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string corpus;
  std::string output;
  std::string telemetry;  // empty: <output>.telemetry.ndjson
  std::string ablation = "none";
  TrainConfig cfg;
  int workers = 1;
};

json train_config_json(const TrainConfig& c, const std::string& ablation) {
  json j;
  j["vocab_size"] = c.vocab_size;
  j["phase1_budget"] = c.phase1_budget;
  j["phase2_budget"] = c.phase2_budget;
  j["phase3_budget"] = c.phase3_budget;
  j["pmi_threshold"] = c.pmi_threshold;
  j["min_frequency"] = c.min_frequency;
  j["n_max"] = c.n_max;
  j["add_k"] = c.add_k;
  j["p3_entropy_percentile"] = c.p3_entropy_percentile;
  j["p3_internal_percentile"] = c.p3_internal_percentile;
  j["p3_external_percentile"] = c.p3_external_percentile;
  j["batch_size"] = c.batch_size;
  j["lm_order"] = c.lm_order;
  j["unigram_ratio"] = c.unigram_ratio;
  j["force_thresholds"] = c.force_thresholds;
  j["ablation"] = ablation;
  return j;
}

int cmd_train(TrainArgs& a) {
  if (a.ablation == "no-cross") {
    a.cfg.phase1_budget = a.cfg.vocab_size - 256;
    a.cfg.phase2_budget = 0;
    a.cfg.phase3_budget = 0;
  } else if (a.ablation == "single-phase") {
    a.cfg.phase1_budget = 0;
    a.cfg.phase2_budget = 0;
    a.cfg.phase3_budget = a.cfg.vocab_size - 256;
  }
  Manifest man{"train", a.cfg.rng_seed, a.workers, train_config_json(a.cfg, a.ablation),
               {a.corpus}, {}, iso8601_utc_now()};

  auto docs = load_corpus(a.corpus);
  std::string tele_path = a.telemetry.empty() ? a.output + ".telemetry.ndjson" : a.telemetry;
  std::ofstream tele(tele_path, std::ios::binary);
  if (!tele) throw Error(Errc::IoError, "cannot open " + tele_path + " for writing");

  TokenizerModel model = train(docs, a.cfg, [&](const std::string& line) {
    tele << line << "\n";
  });
  tele.flush();
  save_model(model, a.output);
  TokenizerModel check = load_model(a.output);  // written and loadable or no exit 0
  (void)check;

  man.outputs = {a.output, tele_path};
  man.write_next_to(a.output);
  std::printf("train: %zu tokens (%zu merges) -> %s\n", model.tokens.size(),
              model.merges.size(), a.output.c_str());
  return 0;
}

// ---- encode / decode ----

struct StreamArgs {
  std::string model;
  std::string input = "-";
  std::string output = "-";
  bool offsets = false;
  int workers = 1;
  uint64_t seed = 0;
};

int cmd_encode(const StreamArgs& a) {
  Manifest man{"encode", a.seed, a.workers, json{{"offsets", a.offsets}},
               {a.model}, {}, iso8601_utc_now()};
  Codec codec(load_model(a.model));
  Encoder enc(codec);

  std::ifstream fin;
  if (a.input != "-") {
    fin.open(a.input, std::ios::binary);
    if (!fin) throw Error(Errc::IoError, "cannot read " + a.input);
    man.inputs.push_back(a.input);
  }
  std::istream& in = a.input == "-" ? std::cin : fin;
  std::ofstream fout;
  if (a.output != "-") {
    fout.open(a.output, std::ios::binary);
    if (!fout) throw Error(Errc::IoError, "cannot open " + a.output + " for writing");
  }
  std::ostream& out = a.output == "-" ? std::cout : fout;

  std::string line;
  EncodeResult res;
  while (std::getline(in, line)) {
    res.ids.clear();
    res.offsets.clear();
    enc.encode(line, res, a.offsets);
    for (size_t i = 0; i < res.ids.size(); i++) {
      if (i) out << ' ';
      out << res.ids[i];
      if (a.offsets) out << '@' << res.offsets[i].first << ':' << res.offsets[i].second;
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw Error(Errc::IoError, "short write");
  if (a.output != "-") {
    man.outputs = {a.output};
    man.write_next_to(a.output);
  }
  return 0;
}

int cmd_decode(const StreamArgs& a) {
  Manifest man{"decode", a.seed, a.workers, json::object(), {a.model}, {},
               iso8601_utc_now()};
  Codec codec(load_model(a.model));

  std::ifstream fin;
  if (a.input != "-") {
    fin.open(a.input, std::ios::binary);
    if (!fin) throw Error(Errc::IoError, "cannot read " + a.input);
    man.inputs.push_back(a.input);
  }
  std::istream& in = a.input == "-" ? std::cin : fin;
  std::ofstream fout;
  if (a.output != "-") {
    fout.open(a.output, std::ios::binary);
    if (!fout) throw Error(Errc::IoError, "cannot open " + a.output + " for writing");
  }
  std::ostream& out = a.output == "-" ? std::cout : fout;

  std::string line;
  std::vector<uint32_t> ids;
  while (std::getline(in, line)) {
    ids.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      size_t pos = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(tok, &pos);
      } catch (const std::exception&) {
        throw Error(Errc::IoError, "bad token id '" + tok + "'");
      }
      if (pos != tok.size()) throw Error(Errc::IoError, "bad token id '" + tok + "'");
      ids.push_back(uint32_t(v));
    }
    out << codec.decode(ids) << '\n';
  }
  out.flush();
  if (!out) throw Error(Errc::IoError, "short write");
  if (a.output != "-") {
    man.outputs = {a.output};
    man.write_next_to(a.output);
  }
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::vector<std::string> models;
  std::string corpus;
  std::string output = "eval_report.json";
  ScoreWeights weights;
  int repetitions = 3;
  int workers = 1;
  uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  json cfg;
  cfg["alpha"] = a.weights.alpha;
  cfg["beta"] = a.weights.beta;
  cfg["gamma"] = a.weights.gamma;
  cfg["repetitions"] = a.repetitions;
  Manifest man{"eval", a.seed, a.workers, cfg, {}, {}, iso8601_utc_now()};
  man.inputs = a.models;
  man.inputs.push_back(a.corpus);

  auto corpus = load_corpus(a.corpus);
  struct Row {
    std::string path, digest;
    EvalMetrics m;
    double score = 0.0;
  };
  std::vector<Row> rows;
  for (const auto& path : a.models) {
    Codec codec(load_model(path));
    Row r;
    r.path = path;
    r.digest = to_hex16(file_digest(path));
    r.m = evaluate(codec, corpus, a.repetitions);
    r.score = score(r.m, a.weights);
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return x.m.chars_per_token > y.m.chars_per_token;
  });

  json rep;
  rep["corpus"] = {{"path", a.corpus},
                   {"docs", rows.empty() ? 0 : rows[0].m.corpus_docs},
                   {"scalars", rows.empty() ? 0 : rows[0].m.corpus_scalars},
                   {"bytes", rows.empty() ? 0 : rows[0].m.corpus_bytes}};
  rep["weights"] = cfg;
  rep["perplexity_definition"] = "add-one unigram over the held-back half of the corpus";
  rep["models"] = json::array();
  for (const auto& r : rows) {
    rep["models"].push_back({{"path", r.path},
                             {"digest", r.digest},
                             {"chars_per_token", r.m.chars_per_token},
                             {"vocab_utilization", r.m.vocab_utilization},
                             {"unigram_perplexity", r.m.unigram_perplexity},
                             {"encode_latency", r.m.encode_latency},
                             {"score", r.score}});
  }
  write_file(a.output, rep.dump(2) + "\n");

  std::printf("%-32s %14s %12s %12s %14s %10s\n", "model", "chars/token", "utilization",
              "perplexity", "latency s/MB", "score");
  for (const auto& r : rows)
    std::printf("%-32s %14.4f %12.4f %12.3f %14.6f %10.4f\n", r.path.c_str(),
                r.m.chars_per_token, r.m.vocab_utilization, r.m.unigram_perplexity,
                r.m.encode_latency, r.score);

  man.outputs = {a.output};
  man.write_next_to(a.output);
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string corpus;
  std::string output = "best_model.json";
  std::string log;  // empty: <output>.trials.ndjson
  uint64_t trials = 10;
  uint64_t seed = 0;
  SearchSpace space;
  ScoreWeights weights;
  int workers = 1;
};

int cmd_sweep(const SweepArgs& a) {
  json cfg;
  cfg["trials"] = a.trials;
  cfg["vocab_min"] = a.space.vocab_lo;
  cfg["vocab_max"] = a.space.vocab_hi;
  cfg["pmi_min"] = a.space.pmi_lo;
  cfg["pmi_max"] = a.space.pmi_hi;
  cfg["min_freq_min"] = a.space.min_freq_lo;
  cfg["min_freq_max"] = a.space.min_freq_hi;
  cfg["n_max_min"] = a.space.n_max_lo;
  cfg["n_max_max"] = a.space.n_max_hi;
  cfg["add_k_min"] = a.space.add_k_lo;
  cfg["add_k_max"] = a.space.add_k_hi;
  cfg["alpha"] = a.weights.alpha;
  cfg["beta"] = a.weights.beta;
  cfg["gamma"] = a.weights.gamma;
  Manifest man{"sweep", a.seed, a.workers, cfg, {a.corpus}, {}, iso8601_utc_now()};

  auto corpus = load_corpus(a.corpus);
  std::string log_path = a.log.empty() ? a.output + ".trials.ndjson" : a.log;

  std::vector<TrialRecord> completed;
  {
    std::ifstream existing(log_path, std::ios::binary);
    std::string line;
    while (existing && std::getline(existing, line))
      if (!line.empty()) completed.push_back(trial_from_json(line));
  }
  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  if (!log) throw Error(Errc::IoError, "cannot open " + log_path + " for writing");

  SweepResult res = random_search(a.space, a.trials, a.weights, corpus, a.seed,
                                  completed, [&](const TrialRecord& r) {
                                    log << trial_to_json(r) << "\n";
                                    log.flush();
                                  });

  // The winning model is reproduced from its trial seed on the train split.
  std::vector<Document> train_docs;
  for (const auto& d : corpus)
    if (!heldout_doc(d)) train_docs.push_back(d);
  TrainConfig best_cfg;
  best_cfg.vocab_size = res.best.point.vocab_size;
  best_cfg.pmi_threshold = res.best.point.pmi_threshold;
  best_cfg.min_frequency = res.best.point.min_frequency;
  best_cfg.n_max = res.best.point.n_max;
  best_cfg.add_k = res.best.point.add_k;
  best_cfg.force_thresholds = true;
  TokenizerModel model = train(train_docs, best_cfg);
  save_model(model, a.output);
  (void)load_model(a.output);

  man.outputs = {a.output, log_path};
  man.write_next_to(a.output);
  std::printf("sweep: best trial %llu score %.6f vocab %lld -> %s\n",
              (unsigned long long)res.best.trial, res.best.score,
              (long long)res.best.point.vocab_size, a.output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    json cfgfile = load_config_file(argc, argv);
    KeyRegistry reg;

    CLI::App app{"cross-boundary subword tokenizer toolkit"};
    app.require_subcommand(1);
    std::string config_path;  // consumed by the pre-pass; registered for help/validation
    auto add_config_flag = [&](CLI::App* sub) {
      sub->add_option("--config", config_path, "JSON file with defaults; flags override");
    };

    FilterArgs fa;
    std::string f_preset;
    auto* filter = app.add_subcommand("filter", "entropy-classify and sample a corpus");
    add_config_flag(filter);
    filter->add_option("--input", fa.inputs, "input corpus path(s)")->required();
    filter->add_option("--output", fa.output, "filtered corpus (ndjson)")->required();
    filter->add_option("--low-cutoff", fa.cur.low_cutoff, "bits: low/medium boundary");
    filter->add_option("--high-cutoff", fa.cur.high_cutoff, "bits: medium/high boundary");
    filter->add_option("--retain-low", fa.cur.retain_low, "keep probability, low class");
    filter->add_option("--retain-medium", fa.cur.retain_medium, "keep probability, medium class");
    filter->add_option("--retain-high", fa.cur.retain_high, "keep probability, high class");
    filter->add_option("--seed", fa.seed, "rng seed");
    filter->add_option("--workers", fa.workers, "shard workers (clamped to 1)");
    filter->add_option("--preset", f_preset, "desk: no-op for filter")
        ->check(CLI::IsMember({"desk"}));
    reg.wire(cfgfile, "filter", "low_cutoff", fa.cur.low_cutoff);
    reg.wire(cfgfile, "filter", "high_cutoff", fa.cur.high_cutoff);
    reg.wire(cfgfile, "filter", "retain_low", fa.cur.retain_low);
    reg.wire(cfgfile, "filter", "retain_medium", fa.cur.retain_medium);
    reg.wire(cfgfile, "filter", "retain_high", fa.cur.retain_high);
    reg.wire(cfgfile, "filter", "seed", fa.seed);
    reg.wire(cfgfile, "filter", "workers", fa.workers);

    TrainArgs ta;
    std::string t_preset;
    auto* train_cmd = app.add_subcommand("train", "train a tokenizer model");
    add_config_flag(train_cmd);
    train_cmd->add_option("--corpus", ta.corpus, "training corpus")->required();
    train_cmd->add_option("--output", ta.output, "model file")->required();
    train_cmd->add_option("--telemetry", ta.telemetry, "telemetry ndjson path");
    auto* t_vocab = train_cmd->add_option("--vocab-size", ta.cfg.vocab_size, "total vocabulary");
    train_cmd->add_option("--phase1-budget", ta.cfg.phase1_budget, "-1: proportional share");
    train_cmd->add_option("--phase2-budget", ta.cfg.phase2_budget, "-1: proportional share");
    train_cmd->add_option("--phase3-budget", ta.cfg.phase3_budget, "-1: proportional share");
    train_cmd->add_option("--pmi-threshold", ta.cfg.pmi_threshold, "collocation gate");
    auto* t_minfreq =
        train_cmd->add_option("--min-frequency", ta.cfg.min_frequency, "candidate floor");
    train_cmd->add_option("--n-max", ta.cfg.n_max, "longest mined sequence");
    train_cmd->add_option("--add-k", ta.cfg.add_k, "count smoothing");
    train_cmd->add_option("--lm-order", ta.cfg.lm_order, "predictability model order");
    train_cmd->add_option("--batch-size", ta.cfg.batch_size, "merges per refresh");
    train_cmd->add_option("--unigram-ratio", ta.cfg.unigram_ratio, "recorded, inert");
    train_cmd->add_option("--p3-entropy-percentile", ta.cfg.p3_entropy_percentile,
                          "boundary entropy gate");
    train_cmd->add_option("--p3-internal-percentile", ta.cfg.p3_internal_percentile,
                          "internal predictability gate");
    train_cmd->add_option("--p3-external-percentile", ta.cfg.p3_external_percentile,
                          "external predictability gate");
    train_cmd->add_flag("--force-thresholds", ta.cfg.force_thresholds,
                        "waive soft range checks");
    train_cmd->add_option("--ablation", ta.ablation, "none|no-cross|single-phase")
        ->check(CLI::IsMember({"none", "no-cross", "single-phase"}));
    train_cmd->add_option("--seed", ta.cfg.rng_seed, "rng seed");
    train_cmd->add_option("--workers", ta.workers, "shard workers (clamped to 1)");
    train_cmd->add_option("--preset", t_preset, "desk: vocab 32768, min-frequency 10")
        ->check(CLI::IsMember({"desk"}));
    reg.wire(cfgfile, "train", "vocab_size", ta.cfg.vocab_size);
    reg.wire(cfgfile, "train", "phase1_budget", ta.cfg.phase1_budget);
    reg.wire(cfgfile, "train", "phase2_budget", ta.cfg.phase2_budget);
    reg.wire(cfgfile, "train", "phase3_budget", ta.cfg.phase3_budget);
    reg.wire(cfgfile, "train", "pmi_threshold", ta.cfg.pmi_threshold);
    reg.wire(cfgfile, "train", "min_frequency", ta.cfg.min_frequency);
    reg.wire(cfgfile, "train", "n_max", ta.cfg.n_max);
    reg.wire(cfgfile, "train", "add_k", ta.cfg.add_k);
    reg.wire(cfgfile, "train", "lm_order", ta.cfg.lm_order);
    reg.wire(cfgfile, "train", "batch_size", ta.cfg.batch_size);
    reg.wire(cfgfile, "train", "unigram_ratio", ta.cfg.unigram_ratio);
    reg.wire(cfgfile, "train", "p3_entropy_percentile", ta.cfg.p3_entropy_percentile);
    reg.wire(cfgfile, "train", "p3_internal_percentile", ta.cfg.p3_internal_percentile);
    reg.wire(cfgfile, "train", "p3_external_percentile", ta.cfg.p3_external_percentile);
    reg.wire(cfgfile, "train", "force_thresholds", ta.cfg.force_thresholds);
    reg.wire(cfgfile, "train", "ablation", ta.ablation);
    reg.wire(cfgfile, "train", "seed", ta.cfg.rng_seed);
    reg.wire(cfgfile, "train", "workers", ta.workers);
    reg.wire(cfgfile, "train", "preset", t_preset);

    StreamArgs ea, da;
    auto* encode = app.add_subcommand("encode", "text lines in, id lines out");
    add_config_flag(encode);
    encode->add_option("--model", ea.model, "model file")->required();
    encode->add_option("--input", ea.input, "input path or - for stdin");
    encode->add_option("--output", ea.output, "output path or - for stdout");
    encode->add_flag("--offsets", ea.offsets, "emit id@begin:end per token");
    encode->add_option("--workers", ea.workers, "shard workers (clamped to 1)");
    reg.wire(cfgfile, "encode", "workers", ea.workers);

    auto* decode = app.add_subcommand("decode", "id lines in, text lines out");
    add_config_flag(decode);
    decode->add_option("--model", da.model, "model file")->required();
    decode->add_option("--input", da.input, "input path or - for stdin");
    decode->add_option("--output", da.output, "output path or - for stdout");
    decode->add_option("--workers", da.workers, "shard workers (clamped to 1)");
    reg.wire(cfgfile, "decode", "workers", da.workers);

    EvalArgs va;
    auto* eval_cmd = app.add_subcommand("eval", "score models on a corpus");
    add_config_flag(eval_cmd);
    eval_cmd->add_option("--model", va.models, "model file(s)")->required();
    eval_cmd->add_option("--corpus", va.corpus, "evaluation corpus")->required();
    eval_cmd->add_option("--output", va.output, "json report path");
    eval_cmd->add_option("--alpha", va.weights.alpha, "chars/token weight");
    eval_cmd->add_option("--beta", va.weights.beta, "log-perplexity weight");
    eval_cmd->add_option("--gamma", va.weights.gamma, "latency weight");
    eval_cmd->add_option("--repetitions", va.repetitions, "latency repetitions (>= 3)");
    eval_cmd->add_option("--seed", va.seed, "recorded in the manifest");
    eval_cmd->add_option("--workers", va.workers, "shard workers (clamped to 1)");
    reg.wire(cfgfile, "eval", "alpha", va.weights.alpha);
    reg.wire(cfgfile, "eval", "beta", va.weights.beta);
    reg.wire(cfgfile, "eval", "gamma", va.weights.gamma);
    reg.wire(cfgfile, "eval", "repetitions", va.repetitions);
    reg.wire(cfgfile, "eval", "seed", va.seed);
    reg.wire(cfgfile, "eval", "workers", va.workers);

    SweepArgs sa;
    std::string s_preset;
    auto* sweep_cmd = app.add_subcommand("sweep", "random search over the space");
    add_config_flag(sweep_cmd);
    sweep_cmd->add_option("--corpus", sa.corpus, "corpus; 90/10 split by id hash")->required();
    sweep_cmd->add_option("--output", sa.output, "best model path");
    sweep_cmd->add_option("--log", sa.log, "trial log; existing lines resume the run");
    sweep_cmd->add_option("--trials", sa.trials, "trial count");
    sweep_cmd->add_option("--seed", sa.seed, "rng seed");
    auto* s_vlo = sweep_cmd->add_option("--vocab-min", sa.space.vocab_lo, "vocab lower bound");
    auto* s_vhi = sweep_cmd->add_option("--vocab-max", sa.space.vocab_hi, "vocab upper bound");
    sweep_cmd->add_option("--pmi-min", sa.space.pmi_lo, "pmi lower bound");
    sweep_cmd->add_option("--pmi-max", sa.space.pmi_hi, "pmi upper bound");
    sweep_cmd->add_option("--min-freq-min", sa.space.min_freq_lo, "frequency lower bound");
    sweep_cmd->add_option("--min-freq-max", sa.space.min_freq_hi, "frequency upper bound");
    sweep_cmd->add_option("--n-max-min", sa.space.n_max_lo, "n-gram length lower bound");
    sweep_cmd->add_option("--n-max-max", sa.space.n_max_hi, "n-gram length upper bound");
    sweep_cmd->add_option("--add-k-min", sa.space.add_k_lo, "smoothing lower bound");
    sweep_cmd->add_option("--add-k-max", sa.space.add_k_hi, "smoothing upper bound");
    sweep_cmd->add_option("--alpha", sa.weights.alpha, "chars/token weight");
    sweep_cmd->add_option("--beta", sa.weights.beta, "log-perplexity weight");
    sweep_cmd->add_option("--gamma", sa.weights.gamma, "latency weight");
    sweep_cmd->add_option("--workers", sa.workers, "trial workers (clamped to 1)");
    sweep_cmd->add_option("--preset", s_preset, "desk: vocab range [8192, 65536]")
        ->check(CLI::IsMember({"desk"}));
    reg.wire(cfgfile, "sweep", "trials", sa.trials);
    reg.wire(cfgfile, "sweep", "seed", sa.seed);
    reg.wire(cfgfile, "sweep", "vocab_min", sa.space.vocab_lo);
    reg.wire(cfgfile, "sweep", "vocab_max", sa.space.vocab_hi);
    reg.wire(cfgfile, "sweep", "pmi_min", sa.space.pmi_lo);
    reg.wire(cfgfile, "sweep", "pmi_max", sa.space.pmi_hi);
    reg.wire(cfgfile, "sweep", "min_freq_min", sa.space.min_freq_lo);
    reg.wire(cfgfile, "sweep", "min_freq_max", sa.space.min_freq_hi);
    reg.wire(cfgfile, "sweep", "n_max_min", sa.space.n_max_lo);
    reg.wire(cfgfile, "sweep", "n_max_max", sa.space.n_max_hi);
    reg.wire(cfgfile, "sweep", "add_k_min", sa.space.add_k_lo);
    reg.wire(cfgfile, "sweep", "add_k_max", sa.space.add_k_hi);
    reg.wire(cfgfile, "sweep", "alpha", sa.weights.alpha);
    reg.wire(cfgfile, "sweep", "beta", sa.weights.beta);
    reg.wire(cfgfile, "sweep", "gamma", sa.weights.gamma);
    reg.wire(cfgfile, "sweep", "workers", sa.workers);
    reg.wire(cfgfile, "sweep", "preset", s_preset);

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }

    if (*filter) {
      reg.check(cfgfile, "filter");
      return cmd_filter(fa, json{{"low_cutoff", fa.cur.low_cutoff},
                                 {"high_cutoff", fa.cur.high_cutoff},
                                 {"retain_low", fa.cur.retain_low},
                                 {"retain_medium", fa.cur.retain_medium},
                                 {"retain_high", fa.cur.retain_high}});
    }
    if (*train_cmd) {
      reg.check(cfgfile, "train");
      if (t_preset == "desk") {
        if (t_vocab->count() == 0 && !cfgfile.contains("vocab_size"))
          ta.cfg.vocab_size = 32768;
        if (t_minfreq->count() == 0 && !cfgfile.contains("min_frequency"))
          ta.cfg.min_frequency = 10;
      }
      return cmd_train(ta);
    }
    if (*encode) {
      reg.check(cfgfile, "encode");
      return cmd_encode(ea);
    }
    if (*decode) {
      reg.check(cfgfile, "decode");
      return cmd_decode(da);
    }
    if (*eval_cmd) {
      reg.check(cfgfile, "eval");
      return cmd_eval(va);
    }
    if (*sweep_cmd) {
      reg.check(cfgfile, "sweep");
      if (s_preset == "desk") {
        if (s_vlo->count() == 0 && !cfgfile.contains("vocab_min")) sa.space.vocab_lo = 8192;
        if (s_vhi->count() == 0 && !cfgfile.contains("vocab_max")) sa.space.vocab_hi = 65536;
      }
      return cmd_sweep(sa);
    }
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
