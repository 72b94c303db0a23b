#include "crosstok/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "crosstok/errors.hpp"
#include "crosstok/utf8.hpp"

namespace crosstok {

const char* entropy_class_name(EntropyClass c) {
  switch (c) {
    case EntropyClass::Low: return "low";
    case EntropyClass::Medium: return "medium";
    case EntropyClass::High: return "high";
  }
  return "?";
}

void CurationConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(retain_low) || !prob(retain_medium) || !prob(retain_high))
    throw Error(Errc::InvalidConfig, "retention probabilities must lie in [0, 1]");
  if (!(low_cutoff < high_cutoff))
    throw Error(Errc::InvalidConfig, "low_cutoff must be < high_cutoff");
}

double CurationConfig::retention(EntropyClass c) const {
  switch (c) {
    case EntropyClass::Low: return retain_low;
    case EntropyClass::Medium: return retain_medium;
    case EntropyClass::High: return retain_high;
  }
  return 0.0;
}

void CurationStats::merge(const CurationStats& other) {
  for (int i = 0; i < 3; i++) {
    docs_seen[i] += other.docs_seen[i];
    docs_kept[i] += other.docs_kept[i];
  }
  bytes_seen += other.bytes_seen;
  bytes_kept += other.bytes_kept;
  decode_failures += other.decode_failures;
  too_short += other.too_short;
}

// ---- Entropy classification ----

double doc_entropy(std::string_view text) {
  // Bigrams are over Unicode scalar values, not bytes, so multi-byte
  // characters do not skew the distribution.
  uint64_t prev = 0;
  bool have_prev = false;
  std::unordered_map<uint64_t, uint64_t> bigrams;
  uint64_t total = 0;
  for (size_t i = 0; i < text.size();) {
    DecodedScalar d = utf8_next(text, i);
    i += d.len;
    uint64_t cur = d.valid ? d.cp : (0x110000ull + (d.cp & 0xff));
    if (have_prev) {
      bigrams[(prev << 21) | cur]++;
      total++;
    }
    prev = cur;
    have_prev = true;
  }
  if (total == 0) throw Error(Errc::TooShort, "doc_entropy needs at least 2 scalar values");
  double h = 0.0;
  for (const auto& [key, count] : bigrams) {
    (void)key;
    double p = double(count) / double(total);
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

EntropyClass classify_entropy(double h, const CurationConfig& cfg) {
  if (h < cfg.low_cutoff) return EntropyClass::Low;
  if (h > cfg.high_cutoff) return EntropyClass::High;
  return EntropyClass::Medium;  // cutoffs themselves are medium
}

bool sample_decision(EntropyClass cls, const CurationConfig& cfg, Rng& rng) {
  return rng.next_double() < cfg.retention(cls);
}

// ---- Readers ----

namespace {

class PlainReader final : public DocumentReader {
 public:
  explicit PlainReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(Errc::IoError, "cannot open " + path);
  }

  std::optional<RawDoc> next() override {
    std::string line, text;
    bool any = false;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) {
        if (any) break;
        continue;  // leading blank lines
      }
      if (any) text.push_back('\n');
      text += line;
      any = true;
    }
    if (!any) return std::nullopt;
    RawDoc d;
    d.id = to_hex16(fnv1a64(text));
    d.text = std::move(text);
    return d;
  }

 private:
  std::ifstream in_;
};

class NdjsonReader final : public DocumentReader {
 public:
  explicit NdjsonReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(Errc::IoError, "cannot open " + path);
  }

  std::optional<RawDoc> next() override {
    std::string line;
    while (std::getline(in_, line)) {
      line_no_++;
      if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string())
        throw Error(Errc::IoError,
                    path_ + ":" + std::to_string(line_no_) + ": expected {\"text\": ...}");
      RawDoc d;
      d.text = j["text"].get<std::string>();
      if (j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty())
        d.id = j["id"].get<std::string>();
      else
        d.id = to_hex16(fnv1a64(d.text));
      return d;
    }
    return std::nullopt;
  }

 private:
  std::ifstream in_;
  std::string path_;
  uint64_t line_no_ = 0;
};

class VectorReader final : public DocumentReader {
 public:
  explicit VectorReader(std::vector<RawDoc> docs) : docs_(std::move(docs)) {}

  std::optional<RawDoc> next() override {
    if (pos_ >= docs_.size()) return std::nullopt;
    return std::move(docs_[pos_++]);
  }

 private:
  std::vector<RawDoc> docs_;
  size_t pos_ = 0;
};

bool has_suffix(const std::string& s, const char* suffix) {
  std::string_view sv(suffix);
  return s.size() >= sv.size() && std::string_view(s).substr(s.size() - sv.size()) == sv;
}

}  // namespace

std::unique_ptr<DocumentReader> open_plain_reader(const std::string& path) {
  return std::make_unique<PlainReader>(path);
}

std::unique_ptr<DocumentReader> open_ndjson_reader(const std::string& path) {
  return std::make_unique<NdjsonReader>(path);
}

std::unique_ptr<DocumentReader> open_reader(const std::string& path) {
  if (has_suffix(path, ".ndjson") || has_suffix(path, ".jsonl")) return open_ndjson_reader(path);
  return open_plain_reader(path);
}

std::unique_ptr<DocumentReader> make_vector_reader(std::vector<RawDoc> docs) {
  return std::make_unique<VectorReader>(std::move(docs));
}

// ---- Filtering and sampling ----

CurationStats stream_filter(DocumentReader& reader, const CurationConfig& cfg,
                            const std::function<void(Document&&)>& sink) {
  cfg.validate();
  CurationStats stats;
  while (auto raw = reader.next()) {
    stats.bytes_seen += raw->text.size();
    if (!utf8_valid(raw->text)) {
      stats.decode_failures++;
      continue;
    }
    double h;
    try {
      h = doc_entropy(raw->text);
    } catch (const Error& e) {
      if (e.code() == Errc::TooShort) {
        stats.too_short++;
        continue;
      }
      throw;
    }
    EntropyClass cls = classify_entropy(h, cfg);
    stats.docs_seen[size_t(cls)]++;
    Rng rng = doc_rng(cfg, raw->id);
    if (!sample_decision(cls, cfg, rng)) continue;
    stats.docs_kept[size_t(cls)]++;
    stats.bytes_kept += raw->text.size();
    Document doc;
    doc.id = std::move(raw->id);
    doc.text = std::move(raw->text);
    doc.entropy_bits = h;
    doc.entropy_class = cls;
    sink(std::move(doc));
  }
  return stats;
}

namespace {

template <typename T, typename Next>
std::vector<T> reservoir_impl(Next&& next, size_t k, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x7265737672ULL));
  std::vector<T> sample;
  std::vector<uint64_t> arrival;
  sample.reserve(k);
  uint64_t index = 0;
  while (auto item = next()) {
    if (k == 0) break;
    if (sample.size() < k) {
      sample.push_back(std::move(*item));
      arrival.push_back(index);
    } else {
      uint64_t j = rng.below(index + 1);
      if (j < k) {
        sample[j] = std::move(*item);
        arrival[j] = index;
      }
    }
    index++;
  }
  std::vector<size_t> order(sample.size());
  for (size_t i = 0; i < order.size(); i++) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return arrival[a] < arrival[b]; });
  std::vector<T> out;
  out.reserve(sample.size());
  for (size_t i : order) out.push_back(std::move(sample[i]));
  return out;
}

}  // namespace

std::vector<Document> reservoir_sample(DocumentReader& reader, size_t k, uint64_t rng_seed) {
  auto next = [&]() -> std::optional<Document> {
    auto raw = reader.next();
    if (!raw) return std::nullopt;
    Document d;
    d.id = std::move(raw->id);
    d.text = std::move(raw->text);
    return d;
  };
  return reservoir_impl<Document>(next, k, rng_seed);
}

std::vector<Document> reservoir_sample(std::vector<Document> docs, size_t k, uint64_t rng_seed) {
  size_t pos = 0;
  auto next = [&]() -> std::optional<Document> {
    if (pos >= docs.size()) return std::nullopt;
    return std::move(docs[pos++]);
  };
  return reservoir_impl<Document>(next, k, rng_seed);
}

std::vector<Document> read_all(DocumentReader& reader) {
  std::vector<Document> out;
  while (auto raw = reader.next()) {
    Document d;
    d.id = std::move(raw->id);
    d.text = std::move(raw->text);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace crosstok
