#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "crosstok/codec.hpp"
#include "crosstok/errors.hpp"
#include "crosstok/trainer.hpp"
#include "crosstok/utf8.hpp"
#include "crosstok/util.hpp"
#include "support/textgen.hpp"

using namespace crosstok;
using namespace crosstok::testgen;

namespace {

std::vector<Document> make_docs(const std::vector<std::string>& texts) {
  std::vector<Document> out;
  for (size_t i = 0; i < texts.size(); i++)
    out.push_back({"d" + std::to_string(i), texts[i], 0.0, EntropyClass::Medium});
  return out;
}

Errc config_error(const TrainConfig& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;  // sentinel for "did not throw"
}

// Docs saturated with "in the" next to varied neighbors; P1 has enough budget
// to finish the function words, P2 enough for a handful of chains.
std::vector<Document> in_the_corpus() {
  std::vector<std::string> texts;
  const char* tails[] = {"park", "room", "dark", "city", "house", "garden",
                         "car",  "attic", "yard", "shed", "field", "barn"};
  for (int i = 0; i < 36; i++) {
    std::string t;
    for (int k = 0; k < 4; k++) {
      t += "walks in the ";
      t += tails[(i + k * 5) % 12];
      t += " ";
      t += tails[(i * 7 + k) % 12];
      t += " ";
    }
    if (i == 0) t += "rare pair";  // one occurrence: stays below min_frequency
    texts.push_back(t);
  }
  return make_docs(texts);
}

uint64_t count_phase(const TokenizerModel& m, Phase p) {
  uint64_t n = 0;
  for (const auto& r : m.merges) n += r.phase == p;
  return n;
}

bool has_token(const TokenizerModel& m, std::string_view bytes) {
  for (size_t id = kByteVocab; id < m.tokens.size(); id++)
    if (m.tokens[id] == bytes) return true;
  return false;
}

bool has_token_containing(const TokenizerModel& m, std::string_view needle) {
  for (size_t id = kByteVocab; id < m.tokens.size(); id++)
    if (m.tokens[id].find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("default budgets split 100:100:56") {
    TrainConfig cfg;
    auto b = cfg.resolved_budgets();
    CHECK(b[0] == 99900);
    CHECK(b[1] == 99900);
    CHECK(b[2] == 55944);
    CHECK(b[0] + b[1] + b[2] == cfg.vocab_size - 256);

    cfg.vocab_size = 32768;
    b = cfg.resolved_budgets();
    CHECK(b[0] == 12700);
    CHECK(b[1] == 12700);
    CHECK(b[2] == 7112);
    CHECK(b[0] + b[1] + b[2] == 32512);
  }

  TEST_CASE("explicit budgets and remainders") {
    TrainConfig cfg;
    cfg.vocab_size = 1256;
    cfg.phase3_budget = 0;
    auto b = cfg.resolved_budgets();
    CHECK(b == std::array<int64_t, 3>{500, 500, 0});

    cfg.vocab_size = 259;  // 3 to split; floors 1,1,0 then the first open slot tops up
    cfg.phase3_budget = -1;
    b = cfg.resolved_budgets();
    CHECK(b[0] + b[1] + b[2] == 3);
    CHECK(b == std::array<int64_t, 3>{2, 1, 0});

    cfg = TrainConfig{};
    cfg.vocab_size = 512;
    cfg.phase1_budget = 100;
    cfg.phase2_budget = 100;
    cfg.phase3_budget = 56;
    CHECK_NOTHROW(cfg.validate());

    cfg.phase3_budget = 57;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.vocab_size = 300;
    cfg.phase1_budget = 300;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.vocab_size = 255;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.phase2_budget = -7;
    CHECK(config_error(cfg) == Errc::InvalidConfig);
  }

  TEST_CASE("threshold ranges enforced unless forced") {
    TrainConfig cfg;
    cfg.pmi_threshold = 1.0;
    CHECK(config_error(cfg) == Errc::InvalidConfig);
    cfg.force_thresholds = true;
    CHECK_NOTHROW(cfg.validate());

    cfg = TrainConfig{};
    cfg.min_frequency = 50;
    CHECK(config_error(cfg) == Errc::InvalidConfig);
    cfg.min_frequency = 7;
    CHECK_NOTHROW(cfg.validate());
    cfg.min_frequency = 100;
    CHECK_NOTHROW(cfg.validate());
    cfg.min_frequency = 0;
    cfg.force_thresholds = true;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.n_max = 6;
    CHECK(config_error(cfg) == Errc::InvalidConfig);
    cfg.n_max = 1;
    cfg.force_thresholds = true;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.add_k = 1.5;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.unigram_ratio = 0.5;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.p3_entropy_percentile = 1.2;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK(config_error(cfg) == Errc::InvalidConfig);

    cfg = TrainConfig{};
    cfg.lm_order = 1;
    CHECK(config_error(cfg) == Errc::InvalidConfig);
  }

  TEST_CASE("empty corpus rejected") {
    TrainConfig cfg;
    cfg.vocab_size = 300;
    CHECK_THROWS_AS((void)train({}, cfg), Error);
    auto docs = make_docs({"", ""});
    try {
      (void)train(docs, cfg);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyCorpus);
    }
  }

  TEST_CASE("zero budgets give the byte model") {
    TrainConfig cfg;
    cfg.vocab_size = 256;
    cfg.phase1_budget = cfg.phase2_budget = cfg.phase3_budget = 0;
    TokenizerModel m = train(make_docs({"some text here"}), cfg);
    CHECK(m.tokens.size() == 256);
    CHECK(m.merges.empty());
    CHECK(m.metadata.at("phase1_merges") == "0");
    CHECK(m.metadata.at("vocab_size") == "256");
  }

  TEST_CASE("bpe on ab ab ab builds ab then space-ab") {
    TrainConfig cfg;
    cfg.vocab_size = 258;
    cfg.phase1_budget = 2;
    cfg.phase2_budget = cfg.phase3_budget = 0;
    TokenizerModel m = train(make_docs({"ab ab ab"}), cfg);
    REQUIRE(m.tokens.size() == 258);
    CHECK(m.tokens[256] == "ab");
    CHECK(m.tokens[257] == " ab");
    CHECK(m.merges[0].left == 'a');
    CHECK(m.merges[0].right == 'b');
    CHECK(m.merges[1].left == ' ');
    CHECK(m.merges[1].right == 256);
    CHECK(m.metadata.at("phase1_end_reason") == "budget");
  }

  TEST_CASE("equal counts break by merged byte content") {
    TrainConfig cfg;
    cfg.vocab_size = 257;
    cfg.phase1_budget = 1;
    cfg.phase2_budget = cfg.phase3_budget = 0;
    // "the the the": both ("t","h") and ("h","e") appear 3 times; "he" < "th".
    TokenizerModel m = train(make_docs({"the the the"}), cfg);
    REQUIRE(m.merges.size() == 1);
    CHECK(m.merges[0].left == 'h');
    CHECK(m.merges[0].right == 'e');
  }

  TEST_CASE("phase 1 stops when no pair repeats") {
    TrainConfig cfg;
    cfg.vocab_size = 300;
    cfg.phase2_budget = cfg.phase3_budget = 0;
    cfg.phase1_budget = 44;
    cfg.min_frequency = 3;
    TokenizerModel m = train(make_docs({"a b c d e f g h"}), cfg);
    CHECK(m.merges.empty());
    CHECK(m.metadata.at("phase1_end_reason") == "no_pair_above_1");
    CHECK(m.metadata.at("phase2_end_reason") == "budget");
  }

  TEST_CASE("phase 2 ends early when nothing passes the gates") {
    TrainConfig cfg;
    cfg.vocab_size = 300;
    cfg.phase1_budget = 0;
    cfg.phase2_budget = 44;
    cfg.phase3_budget = 0;
    cfg.min_frequency = 3;
    TokenizerModel m = train(make_docs({"a b c d e f g h"}), cfg);
    CHECK(m.merges.empty());
    CHECK(m.metadata.at("phase2_merges") == "0");
    CHECK(m.metadata.at("phase2_end_reason") == "no_candidates");
  }

  TEST_CASE("phase 2 learns a token containing in-the") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 60 + 24;
    cfg.phase1_budget = 60;
    cfg.phase2_budget = 24;
    cfg.phase3_budget = 0;
    cfg.min_frequency = 3;
    std::vector<std::string> lines;
    TokenizerModel m = train(in_the_corpus(), cfg, [&](const std::string& l) {
      lines.push_back(l);
    });
    CHECK(has_token_containing(m, "in the"));
    CHECK(count_phase(m, Phase::P2) > 0);
    bool cross_space = false;
    for (const auto& r : m.merges)
      if (r.crosses_boundary && m.tokens[r.result].find(' ') != std::string::npos)
        cross_space = true;
    CHECK(cross_space);
    // Bigrams below min_frequency never become tokens.
    CHECK_FALSE(has_token_containing(m, "rare pair"));
    CHECK_NOTHROW(m.validate());

    REQUIRE(!lines.empty());
    for (const auto& l : lines) {
      auto j = nlohmann::json::parse(l);
      CHECK(j.contains("phase"));
      CHECK(j.contains("batch"));
      CHECK(j.contains("merges_total"));
      CHECK(j.contains("chars_per_token"));
      if (j["phase"] == "P2") {
        CHECK(j.contains("pool"));
        CHECK(j.contains("selected"));
        CHECK(j.contains("new_rules"));
        CHECK(j.contains("stream_fusions"));
      }
    }
  }

  TEST_CASE("trained stream state matches codec encode") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 60 + 24 + 16;
    cfg.phase1_budget = 60;
    cfg.phase2_budget = 24;
    cfg.phase3_budget = 16;
    cfg.min_frequency = 3;
    cfg.p3_entropy_percentile = 1.0;  // neutral gates: structure is under test
    cfg.p3_internal_percentile = 0.0;
    cfg.p3_external_percentile = 1.0;
    auto docs = in_the_corpus();
    std::vector<std::string> lines;
    TokenizerModel m = train(docs, cfg, [&](const std::string& l) { lines.push_back(l); });
    REQUIRE(!lines.empty());
    double trainer_cpt = nlohmann::json::parse(lines.back())["chars_per_token"].get<double>();

    Codec codec(m);
    Encoder enc(codec);
    uint64_t scalars = 0, toks = 0;
    for (const auto& d : docs) {
      scalars += scalar_count(d.text);
      auto ids = enc.encode_ids(d.text);
      toks += ids.size();
      CHECK(codec.decode(ids) == d.text);
    }
    CHECK(trainer_cpt == doctest::Approx(double(scalars) / double(toks)).epsilon(1e-12));
  }

  TEST_CASE("deterministic byte-identical model files") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 40 + 12 + 8;
    cfg.phase1_budget = 40;
    cfg.phase2_budget = 12;
    cfg.phase3_budget = 8;
    cfg.min_frequency = 3;
    auto docs = in_the_corpus();
    TokenizerModel a = train(docs, cfg);
    TokenizerModel b = train(docs, cfg);
    save_model(a, "tmp_train_a.json");
    save_model(b, "tmp_train_b.json");
    CHECK(read_file("tmp_train_a.json") == read_file("tmp_train_b.json"));
    std::remove("tmp_train_a.json");
    std::remove("tmp_train_b.json");
  }

  TEST_CASE("phase ordering and per-phase counts line up") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 50 + 20 + 10;
    cfg.phase1_budget = 50;
    cfg.phase2_budget = 20;
    cfg.phase3_budget = 10;
    cfg.min_frequency = 3;
    cfg.p3_entropy_percentile = 1.0;
    cfg.p3_internal_percentile = 0.0;
    cfg.p3_external_percentile = 1.0;
    TokenizerModel m = train(in_the_corpus(), cfg);
    CHECK(count_phase(m, Phase::P1) == std::stoull(m.metadata.at("phase1_merges")));
    CHECK(count_phase(m, Phase::P2) == std::stoull(m.metadata.at("phase2_merges")));
    CHECK(count_phase(m, Phase::P3) == std::stoull(m.metadata.at("phase3_merges")));
    CHECK(count_phase(m, Phase::P1) <= 50);
    CHECK(count_phase(m, Phase::P2) <= 20);
    CHECK(count_phase(m, Phase::P3) <= 10);
    CHECK(m.merges.size() == m.tokens.size() - 256);
    CHECK_NOTHROW(m.validate());
  }

  TEST_CASE("phase-1-only ablation never crosses boundaries") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 80;
    cfg.phase1_budget = 80;
    cfg.phase2_budget = cfg.phase3_budget = 0;
    cfg.min_frequency = 3;
    TokenizerModel m = train(in_the_corpus(), cfg);
    for (const auto& r : m.merges) {
      CHECK(r.phase == Phase::P1);
      CHECK_FALSE(r.crosses_boundary);
    }
    CHECK_FALSE(has_token_containing(m, "in the"));
  }

  TEST_CASE("phase-3-only training still produces a valid model") {
    TrainConfig cfg;
    cfg.vocab_size = 256 + 30;
    cfg.phase1_budget = cfg.phase2_budget = 0;
    cfg.phase3_budget = 30;
    cfg.min_frequency = 3;
    cfg.p3_entropy_percentile = 1.0;
    cfg.p3_internal_percentile = 0.0;
    cfg.p3_external_percentile = 1.0;
    TokenizerModel m = train(in_the_corpus(), cfg);
    CHECK(m.merges.size() > 0);
    for (const auto& r : m.merges) CHECK(r.phase == Phase::P3);
    CHECK_NOTHROW(m.validate());
  }

  TEST_CASE("unigram_ratio is recorded but changes nothing") {
    TrainConfig a;
    a.vocab_size = 256 + 30 + 10 + 0;
    a.phase1_budget = 30;
    a.phase2_budget = 10;
    a.phase3_budget = 0;
    a.min_frequency = 3;
    TrainConfig b = a;
    b.unigram_ratio = 0.8;
    auto docs = in_the_corpus();
    TokenizerModel ma = train(docs, a);
    TokenizerModel mb = train(docs, b);
    CHECK(ma.tokens == mb.tokens);
    CHECK(ma.metadata.at("unigram_ratio") == "1");
    CHECK(mb.metadata.at("unigram_ratio") == "0.8");
  }

  TEST_CASE("entropy gate rejects high-branching candidates in phase 3") {
    // Candidate A "qq ww" always sits between fixed neighbors; candidate
    // B "ee rr" is flanked by ever-changing ones. Both are frequent and
    // high-PMI, so only the boundary-entropy gate separates them.
    std::vector<std::string> texts;
    const char* var1[] = {"ka", "kb", "kc", "kd", "ke", "kf", "kg", "kh"};
    const char* var2[] = {"ma", "mb", "mc", "md", "me", "mf", "mg", "mh"};
    for (int i = 0; i < 16; i++) {
      std::string t = "zz qq ww yy ";
      t += var1[i % 8];
      t += " ee rr ";
      t += var2[(i * 3) % 8];
      texts.push_back(t);
    }
    TrainConfig cfg;
    // Budget 2: the gate is relative to the current pool, so once the
    // low-entropy candidates are used up a lone survivor passes trivially.
    cfg.vocab_size = 256 + 40 + 0 + 2;
    cfg.phase1_budget = 40;
    cfg.phase2_budget = 0;
    cfg.phase3_budget = 2;
    cfg.min_frequency = 3;
    cfg.n_max = 2;
    cfg.p3_entropy_percentile = 0.5;
    cfg.p3_internal_percentile = 0.0;  // isolate the entropy gate
    cfg.p3_external_percentile = 1.0;
    std::vector<std::string> lines;
    TokenizerModel m = train(make_docs(texts), cfg,
                             [&](const std::string& l) { lines.push_back(l); });
    CHECK(has_token_containing(m, "qq ww"));
    CHECK_FALSE(has_token_containing(m, "ee rr"));
    bool saw_entropy_reject = false;
    for (const auto& l : lines) {
      auto j = nlohmann::json::parse(l);
      if (j.value("phase", "") == "P3" && j.contains("after_entropy_gate") &&
          j["after_entropy_gate"].get<int64_t>() < j["after_context_gate"].get<int64_t>())
        saw_entropy_reject = true;
    }
    CHECK(saw_entropy_reject);
  }

  TEST_CASE("cross merges keep compressing after byte pairs saturate") {
    // 96 is past the point where every word type is a single token, so the
    // baseline stalls while the curriculum keeps going across boundaries.
    auto docs = in_the_corpus();
    TrainConfig base;
    base.vocab_size = 256 + 96;
    base.phase1_budget = 96;
    base.phase2_budget = 0;
    base.phase3_budget = 0;
    base.min_frequency = 3;
    TrainConfig full = base;
    full.vocab_size = 256 + 96 + 16 + 8;
    full.phase2_budget = 16;
    full.phase3_budget = 8;
    full.p3_entropy_percentile = 1.0;
    full.p3_internal_percentile = 0.0;
    full.p3_external_percentile = 1.0;

    auto cpt = [&](const TokenizerModel& m) {
      Codec codec(m);
      Encoder enc(codec);
      uint64_t scalars = 0, toks = 0;
      for (const auto& d : docs) {
        scalars += scalar_count(d.text);
        toks += enc.encode_ids(d.text).size();
      }
      return double(scalars) / double(toks);
    };
    TokenizerModel mb = train(docs, base);
    TokenizerModel mf = train(docs, full);
    CHECK(mb.metadata.at("phase1_end_reason") != "budget");
    // Identical corpus and budgetary headroom give the same P1 prefix.
    for (size_t i = 0; i < mb.merges.size(); i++) {
      CHECK(mf.merges[i].left == mb.merges[i].left);
      CHECK(mf.merges[i].right == mb.merges[i].right);
    }
    CHECK(cpt(mf) > cpt(mb));
  }
}
