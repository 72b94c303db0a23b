#include "crosstok/codec.hpp"

#include <algorithm>
#include <queue>

#include <json.hpp>

#include "crosstok/errors.hpp"
#include "crosstok/util.hpp"

namespace crosstok {

using nlohmann::json;

// ---- Merge application ----

std::vector<uint32_t> apply_intra_rules(const TokenizerModel& model,
                                        std::vector<uint32_t> toks) {
  while (toks.size() >= 2) {
    uint32_t best_rank = UINT32_MAX;
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < toks.size(); i++) {
      auto it = model.rule_rank.find(rule_key(toks[i], toks[i + 1], false));
      if (it != model.rule_rank.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank == UINT32_MAX) break;
    toks[best_pos] = model.merges[best_rank].result;
    toks.erase(toks.begin() + best_pos + 1);
  }
  return toks;
}

std::vector<uint32_t> apply_intra_rules(const TokenizerModel& model, std::string_view bytes) {
  std::vector<uint32_t> toks(bytes.size());
  for (size_t i = 0; i < bytes.size(); i++) toks[i] = uint8_t(bytes[i]);
  return apply_intra_rules(model, std::move(toks));
}

Codec::Codec(TokenizerModel model) : model_(std::move(model)) {
  model_.rebuild_rule_rank();
  model_.validate();
}

namespace {

struct StreamItem {
  uint32_t tok = 0;        // valid when single
  uint32_t span = 0;       // index into spans (start span after merges)
  uint32_t begin = 0, end = 0;  // byte range covered
  int32_t prev = -1, next = -1;
  bool single = false;
  bool alive = true;
};

struct HeapEntry {
  uint32_t rank;
  uint32_t pos;
  bool operator>(const HeapEntry& o) const {
    return rank != o.rank ? rank > o.rank : pos > o.pos;
  }
};

}  // namespace

void Codec::encode_into(std::string_view text,
                        std::unordered_map<std::string, std::vector<uint32_t>>& cache,
                        EncodeResult& out, bool want_offsets) const {
  out.ids.clear();
  out.offsets.clear();
  std::vector<UnitSpan> spans;
  segment(text, model_.script, spans);
  if (spans.empty()) return;

  std::vector<const std::vector<uint32_t>*> unit_toks(spans.size());
  for (size_t s = 0; s < spans.size(); s++) {
    std::string_view unit = materialized_bytes(text, spans[s]);
    auto it = cache.find(std::string(unit));
    if (it == cache.end())
      it = cache.emplace(std::string(unit), apply_intra_rules(model_, unit)).first;
    unit_toks[s] = &it->second;
  }

  std::vector<StreamItem> items(spans.size());
  for (size_t s = 0; s < spans.size(); s++) {
    items[s].span = uint32_t(s);
    items[s].begin = spans[s].begin;
    items[s].end = spans[s].end;
    items[s].prev = int32_t(s) - 1;
    items[s].next = s + 1 < spans.size() ? int32_t(s) + 1 : -1;
    items[s].single = unit_toks[s]->size() == 1;
    if (items[s].single) items[s].tok = (*unit_toks[s])[0];
  }

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  auto push_pair = [&](int32_t i) {
    if (i < 0) return;
    int32_t j = items[i].next;
    if (j < 0 || !items[i].single || !items[j].single) return;
    auto it = model_.rule_rank.find(rule_key(items[i].tok, items[j].tok, true));
    if (it != model_.rule_rank.end()) heap.push({it->second, uint32_t(i)});
  };
  for (size_t s = 0; s + 1 < spans.size(); s++) push_pair(int32_t(s));

  while (!heap.empty()) {
    auto [rank, pos] = heap.top();
    heap.pop();
    StreamItem& a = items[pos];
    if (!a.alive || !a.single || a.next < 0) continue;
    StreamItem& b = items[a.next];
    if (!b.single) continue;
    auto it = model_.rule_rank.find(rule_key(a.tok, b.tok, true));
    if (it == model_.rule_rank.end() || it->second != rank) continue;  // stale
    a.tok = model_.merges[rank].result;
    a.end = b.end;
    b.alive = false;
    a.next = b.next;
    if (b.next >= 0) items[b.next].prev = int32_t(pos);
    push_pair(a.prev);
    push_pair(int32_t(pos));
  }

  for (int32_t i = 0; i >= 0 && size_t(i) < items.size(); i = items[i].next) {
    const StreamItem& item = items[i];
    if (item.single) {
      out.ids.push_back(item.tok);
      if (want_offsets) out.offsets.push_back({item.begin, item.end});
    } else {
      uint32_t cursor = item.begin;
      for (uint32_t tok : *unit_toks[item.span]) {
        out.ids.push_back(tok);
        if (want_offsets) {
          uint32_t len = uint32_t(model_.tokens[tok].size());
          out.offsets.push_back({cursor, cursor + len});
          cursor += len;
        }
      }
    }
  }
}

EncodeResult Codec::encode(std::string_view text) const {
  std::unordered_map<std::string, std::vector<uint32_t>> cache;
  EncodeResult out;
  encode_into(text, cache, out, true);
  return out;
}

std::vector<uint32_t> Codec::encode_ids(std::string_view text) const {
  std::unordered_map<std::string, std::vector<uint32_t>> cache;
  EncodeResult out;
  encode_into(text, cache, out, false);
  return std::move(out.ids);
}

std::string Codec::decode(std::span<const uint32_t> ids) const {
  std::string out;
  for (uint32_t id : ids) {
    if (id >= model_.tokens.size())
      throw Error(Errc::UnknownToken, "token id " + std::to_string(id) + " out of range");
    out += model_.tokens[id];
  }
  return out;
}

void Encoder::encode(std::string_view text, EncodeResult& out, bool want_offsets) {
  codec_.encode_into(text, cache_, out, want_offsets);
}

std::vector<uint32_t> Encoder::encode_ids(std::string_view text) {
  EncodeResult out;
  codec_.encode_into(text, cache_, out, false);
  return std::move(out.ids);
}

// ---- Model file ----

void save_model(const TokenizerModel& model, const std::string& path) {
  json j;
  j["format_version"] = kModelFormatVersion;
  json merges = json::array();
  for (const auto& r : model.merges)
    merges.push_back(json::array(
        {r.left, r.right, r.result, phase_name(r.phase), r.crosses_boundary}));
  j["merges"] = std::move(merges);
  json tokens = json::array();
  for (size_t id = kByteVocab; id < model.tokens.size(); id++)
    tokens.push_back({{"id", id}, {"bytes_b64", base64_encode(model.tokens[id])}});
  j["tokens"] = std::move(tokens);
  json ranges = json::array();
  for (const auto& [lo, hi] : model.script.char_level_ranges)
    ranges.push_back(json::array({lo, hi}));
  j["script_config"] = {{"char_level_ranges", std::move(ranges)}};
  j["metadata"] = model.metadata;
  write_file(path, j.dump() + "\n");
}

TokenizerModel load_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptModel, std::string("model file is not valid json: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::CorruptModel, "model file is not a json object");
  static const char* known[] = {"format_version", "merges", "tokens", "script_config",
                                "metadata"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(Errc::CorruptModel, "unknown top-level field \"" + key + "\"");
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw Error(Errc::CorruptModel, "missing format_version");
  int version = j["format_version"].get<int>();
  if (version != kModelFormatVersion)
    throw Error(Errc::SchemaVersionMismatch,
                "model file has format_version " + std::to_string(version) +
                    ", this tool supports " + std::to_string(kModelFormatVersion));

  TokenizerModel model = TokenizerModel::byte_model();
  try {
    for (const auto& entry : j.value("merges", json::array())) {
      if (!entry.is_array() || entry.size() != 5)
        throw Error(Errc::CorruptModel, "merge entry is not a 5-element array");
      uint32_t left = entry[0].get<uint32_t>();
      uint32_t right = entry[1].get<uint32_t>();
      uint32_t result = entry[2].get<uint32_t>();
      std::string phase = entry[3].get<std::string>();
      bool cross = entry[4].get<bool>();
      Phase p;
      if (phase == "P1") {
        p = Phase::P1;
      } else if (phase == "P2") {
        p = Phase::P2;
      } else if (phase == "P3") {
        p = Phase::P3;
      } else {
        throw Error(Errc::CorruptModel, "unknown phase \"" + phase + "\"");
      }
      if (left >= model.tokens.size() || right >= model.tokens.size())
        throw Error(Errc::CorruptModel, "merge references undefined token");
      const MergeRule& added = model.add_merge(left, right, p, cross);
      if (added.result != result)
        throw Error(Errc::CorruptModel, "merge result ids are not dense");
    }
    json tokens = j.value("tokens", json::array());
    if (tokens.size() != model.merges.size())
      throw Error(Errc::CorruptModel, "token list does not cover the merges");
    for (const auto& entry : tokens) {
      uint32_t id = entry.at("id").get<uint32_t>();
      std::string bytes = base64_decode(entry.at("bytes_b64").get<std::string>());
      if (id < kByteVocab || id >= model.tokens.size())
        throw Error(Errc::CorruptModel, "token id " + std::to_string(id) + " out of range");
      if (model.tokens[id] != bytes)
        throw Error(Errc::CorruptModel,
                    "token " + std::to_string(id) + " bytes do not match its merge");
    }
    if (j.contains("script_config")) {
      const json& sc = j["script_config"];
      model.script.char_level_ranges.clear();
      for (const auto& r : sc.at("char_level_ranges"))
        model.script.char_level_ranges.push_back({r.at(0).get<uint32_t>(), r.at(1).get<uint32_t>()});
      try {
        model.script.normalize();
      } catch (const Error& e) {
        throw Error(Errc::CorruptModel, std::string("bad script ranges: ") + e.what());
      }
    }
    if (j.contains("metadata")) {
      for (const auto& [key, value] : j["metadata"].items()) {
        if (!value.is_string())
          throw Error(Errc::CorruptModel, "metadata value for \"" + key + "\" is not a string");
        model.metadata[key] = value.get<std::string>();
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::CorruptModel, std::string("malformed model file: ") + e.what());
  }
  model.validate();
  return model;
}

}  // namespace crosstok
