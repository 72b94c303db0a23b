#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "crosstok/errors.hpp"
#include "crosstok/sweep.hpp"
#include "crosstok/util.hpp"

using namespace crosstok;

namespace {

Document doc(std::string id, std::string text) {
  return {std::move(id), std::move(text), 0.0, EntropyClass::Medium};
}

// Both split sides populated; REQUIRE guards the id hashing assumption.
std::vector<Document> balanced_corpus() {
  const char* tails[] = {"park", "room", "dark", "city", "house", "shed"};
  std::vector<Document> out;
  size_t held = 0;
  for (int i = 0; out.size() < 40 && i < 500; i++) {
    std::string t;
    for (int k = 0; k < 3; k++) {
      t += "walks in the ";
      t += tails[(i + k) % 6];
      t += " ";
    }
    Document d = doc("doc" + std::to_string(i), t);
    held += heldout_doc(d);
    out.push_back(std::move(d));
  }
  REQUIRE(held >= 2);
  REQUIRE(held <= 20);
  return out;
}

// No learnable structure: every trial collapses to the byte model.
std::vector<Document> flat_corpus() {
  std::vector<Document> out;
  for (int i = 0; i < 26; i++)
    out.push_back(doc("flat" + std::to_string(i), std::string(1, char('a' + i))));
  size_t held = 0;
  for (const auto& d : out) held += heldout_doc(d);
  REQUIRE(held >= 1);
  REQUIRE(held < out.size());
  return out;
}

SearchSpace desk_space() {
  SearchSpace s;
  s.vocab_lo = 8192;
  s.vocab_hi = 65536;
  return s;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("sampled points stay inside the declared ranges") {
    SearchSpace s = desk_space();
    Rng rng(123);
    for (int i = 0; i < 200; i++) {
      TrialPoint p = sample_point(s, rng);
      CHECK(p.vocab_size >= s.vocab_lo);
      CHECK(p.vocab_size <= s.vocab_hi);
      CHECK(p.pmi_threshold >= s.pmi_lo);
      CHECK(p.pmi_threshold <= s.pmi_hi);
      CHECK(p.min_frequency >= s.min_freq_lo);
      CHECK(p.min_frequency <= s.min_freq_hi);
      CHECK(p.n_max >= s.n_max_lo);
      CHECK(p.n_max <= s.n_max_hi);
      CHECK(p.add_k >= s.add_k_lo);
      CHECK(p.add_k <= s.add_k_hi);
    }
    Rng a(9), b(9);
    TrialPoint pa = sample_point(s, a), pb = sample_point(s, b);
    CHECK(pa.vocab_size == pb.vocab_size);
    CHECK(pa.pmi_threshold == pb.pmi_threshold);
    CHECK(pa.add_k == pb.add_k);
  }

  TEST_CASE("search space validation") {
    SearchSpace s = desk_space();
    CHECK_NOTHROW(s.validate());
    s.vocab_lo = 256;
    CHECK_THROWS_AS(s.validate(), Error);
    s = desk_space();
    s.pmi_lo = 3.5;
    CHECK_THROWS_AS(s.validate(), Error);
    s = desk_space();
    s.min_freq_lo = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = desk_space();
    s.n_max_hi = 1;
    CHECK_THROWS_AS(s.validate(), Error);
    s = desk_space();
    s.add_k_lo = -0.1;
    CHECK_THROWS_AS(s.validate(), Error);
    SearchSpace full;  // documented full-scale baseline is itself valid
    CHECK_NOTHROW(full.validate());
    CHECK(full.vocab_lo == 160000);
    CHECK(full.vocab_hi == 320000);
  }

  TEST_CASE("identical inputs reproduce the trial log") {
    auto corpus = balanced_corpus();
    ScoreWeights w{1.0, 0.1, 0.0};  // latency is the one statistical metric
    auto a = random_search(desk_space(), 4, w, corpus, 2026);
    auto b = random_search(desk_space(), 4, w, corpus, 2026);
    REQUIRE(a.log.size() == 4);
    REQUIRE(b.log.size() == 4);
    for (size_t i = 0; i < 4; i++) {
      CHECK(a.log[i].ok);
      CHECK(a.log[i].point.vocab_size == b.log[i].point.vocab_size);
      CHECK(a.log[i].point.pmi_threshold == b.log[i].point.pmi_threshold);
      CHECK(a.log[i].point.min_frequency == b.log[i].point.min_frequency);
      CHECK(a.log[i].point.n_max == b.log[i].point.n_max);
      CHECK(a.log[i].point.add_k == b.log[i].point.add_k);
      CHECK(a.log[i].metrics.chars_per_token == b.log[i].metrics.chars_per_token);
      CHECK(a.log[i].metrics.unigram_perplexity == b.log[i].metrics.unigram_perplexity);
      CHECK(a.log[i].metrics.vocab_utilization == b.log[i].metrics.vocab_utilization);
      CHECK(a.log[i].score == b.log[i].score);
      CHECK(a.log[i].seed == b.log[i].seed);
    }
    CHECK(a.best.trial == b.best.trial);

    // A different seed explores different points.
    auto c = random_search(desk_space(), 4, w, corpus, 2027);
    bool any_diff = false;
    for (size_t i = 0; i < 4; i++)
      any_diff |= c.log[i].point.vocab_size != a.log[i].point.vocab_size;
    CHECK(any_diff);
  }

  TEST_CASE("best is the argmax over the log") {
    auto corpus = balanced_corpus();
    ScoreWeights w{1.0, 0.1, 0.0};
    auto res = random_search(desk_space(), 6, w, corpus, 99);
    double best_seen = -1e300;
    for (const auto& r : res.log) {
      CHECK(r.trial < 6);
      if (r.ok) best_seen = std::max(best_seen, r.score);
    }
    CHECK(res.best.score == best_seen);
    CHECK(res.best.ok);
    CHECK(res.best.score == score(res.best.metrics, w));
  }

  TEST_CASE("score ties fall to the smaller vocabulary") {
    auto corpus = flat_corpus();
    ScoreWeights w{1.0, 0.1, 0.0};
    auto res = random_search(desk_space(), 6, w, corpus, 7);
    int64_t min_vocab = res.log[0].point.vocab_size;
    double first_score = res.log[0].score;
    for (const auto& r : res.log) {
      REQUIRE(r.ok);
      CHECK(r.score == first_score);  // byte model every time
      min_vocab = std::min(min_vocab, r.point.vocab_size);
    }
    CHECK(res.best.point.vocab_size == min_vocab);
  }

  TEST_CASE("full ties fall to the earliest trial") {
    auto corpus = flat_corpus();
    SearchSpace s = desk_space();
    s.vocab_lo = s.vocab_hi = 9000;
    ScoreWeights w{1.0, 0.1, 0.0};
    auto res = random_search(s, 4, w, corpus, 11);
    for (const auto& r : res.log) REQUIRE(r.ok);
    CHECK(res.best.trial == 0);
  }

  TEST_CASE("failures are recorded per trial and only total failure throws") {
    std::vector<Document> no_holdout;
    for (int i = 0; no_holdout.size() < 10 && i < 300; i++) {
      Document d = doc("nh" + std::to_string(i), "walks in the park ");
      if (!heldout_doc(d)) no_holdout.push_back(std::move(d));
    }
    REQUIRE(no_holdout.size() == 10);
    std::vector<TrialRecord> seen;
    try {
      (void)random_search(desk_space(), 3, {1.0, 0.1, 0.0}, no_holdout, 5, {},
                          [&](const TrialRecord& r) { seen.push_back(r); });
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::AllTrialsFailed);
    }
    REQUIRE(seen.size() == 3);
    for (const auto& r : seen) {
      CHECK_FALSE(r.ok);
      CHECK(r.error.find("held-out") != std::string::npos);
    }
  }

  TEST_CASE("completed trials are reused on resume") {
    auto corpus = balanced_corpus();
    ScoreWeights w{1.0, 0.1, 0.0};
    size_t full_runs = 0;
    auto full = random_search(desk_space(), 5, w, corpus, 321, {},
                              [&](const TrialRecord&) { full_runs++; });
    CHECK(full_runs == 5);

    std::vector<TrialRecord> completed(full.log.begin(), full.log.begin() + 3);
    for (auto& r : completed) r.wall_seconds = 42.0;  // sentinel proves reuse
    size_t resumed_runs = 0;
    auto res = random_search(desk_space(), 5, w, corpus, 321, completed,
                             [&](const TrialRecord&) { resumed_runs++; });
    CHECK(resumed_runs == 2);
    REQUIRE(res.log.size() == 5);
    for (size_t i = 0; i < 3; i++) CHECK(res.log[i].wall_seconds == 42.0);
    for (size_t i = 0; i < 5; i++) {
      CHECK(res.log[i].trial == i);
      CHECK(res.log[i].point.vocab_size == full.log[i].point.vocab_size);
      CHECK(res.log[i].score == full.log[i].score);
    }
    CHECK(res.best.trial == full.best.trial);
  }

  TEST_CASE("trial records survive the json roundtrip") {
    TrialRecord r;
    r.trial = 17;
    r.seed = 0xdeadbeefcafeULL;
    r.point = {12345, 0.1 + 0.2, 7, 4, 1e-300};
    r.ok = true;
    r.metrics.chars_per_token = 3.333333333333333;
    r.metrics.vocab_utilization = 0.0625;
    r.metrics.unigram_perplexity = 17.25;
    r.metrics.encode_latency = 0.001953125;
    r.metrics.corpus_docs = 4;
    r.metrics.corpus_scalars = 9999;
    r.metrics.corpus_bytes = 10001;
    r.score = 3.0321;
    r.wall_seconds = 1.75;
    TrialRecord back = trial_from_json(trial_to_json(r));
    CHECK(back.trial == r.trial);
    CHECK(back.seed == r.seed);
    CHECK(back.ok == r.ok);
    CHECK(back.point.vocab_size == r.point.vocab_size);
    CHECK(back.point.pmi_threshold == r.point.pmi_threshold);
    CHECK(back.point.add_k == r.point.add_k);
    CHECK(back.metrics.chars_per_token == r.metrics.chars_per_token);
    CHECK(back.metrics.encode_latency == r.metrics.encode_latency);
    CHECK(back.score == r.score);
    CHECK(back.wall_seconds == r.wall_seconds);

    CHECK_THROWS_AS((void)trial_from_json("{\"trial\": true}"), Error);
    CHECK_THROWS_AS((void)trial_from_json("not json"), Error);
  }

  TEST_CASE("zero trials are rejected") {
    auto corpus = flat_corpus();
    CHECK_THROWS_AS(
        (void)random_search(desk_space(), 0, {1.0, 0.0, 0.0}, corpus, 1), Error);
  }
}
