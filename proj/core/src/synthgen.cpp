// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "tcts/error.hpp"
#include "tcts/random.hpp"

namespace tcts::synth {

using data::DatasetRecord;
using data::Split;

// ---------------------------------------------------------------------------
// Grammar

const Grammar& Grammar::standard() {
  static const Grammar g = [] {
    Grammar g;
    g.nouns = {
        {"dog", {"dog", "puppy"}},   {"cat", {"cat", "kitten"}}, {"bird", {"bird"}},
        {"horse", {"horse", "pony"}}, {"man", {"man", "guy"}},    {"woman", {"woman", "lady"}},
        {"child", {"child", "kid"}}, {"car", {"car"}},           {"bike", {"bike", "bicycle"}},
        {"boat", {"boat"}},
    };
    g.modifiers = {
        {"small", {"small", "little", "tiny"}}, {"big", {"big", "large"}}, {"brown", {"brown"}},
        {"black", {"black"}}, {"white", {"white"}}, {"red", {"red"}}, {"old", {"old"}},
        {"young", {"young"}},
    };
    g.relations = {
        {"sitting", {"sitting", "resting"}}, {"standing", {"standing"}},
        {"running", {"running"}},            {"sleeping", {"sleeping", "napping"}},
        {"playing", {"playing"}},            {"waiting", {"waiting"}},
    };
    g.preferred_relation = {
        {"dog", "running"},  {"cat", "sleeping"}, {"bird", "sitting"}, {"horse", "standing"},
        {"man", "waiting"},  {"woman", "standing"}, {"child", "playing"}, {"car", "waiting"},
        {"bike", "standing"}, {"boat", "sitting"},
    };
    g.stopwords = {"a", "alone", "and", "are", "is", "there", "together"};
    return g;
  }();
  return g;
}

std::size_t Grammar::max_caption_length(std::size_t max_objects) const {
  // "there are" + k * "a M N" + "and" + relation
  return 2 + 3 * max_objects + (max_objects > 1 ? 1 : 0) + 1;
}

namespace {

std::optional<std::string> concept_of(const std::map<std::string, std::vector<std::string>>& table,
                                      const std::string& surface) {
  for (const auto& [concept_name, surfaces] : table)
    if (std::find(surfaces.begin(), surfaces.end(), surface) != surfaces.end()) return concept_name;
  return std::nullopt;
}

std::pair<std::string, std::string> split_object(const std::string& object) {
  const auto space = object.find(' ');
  if (space == std::string::npos) return {"", object};
  return {object.substr(0, space), object.substr(space + 1)};
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.index(items.size())];
}

std::string realize(const std::vector<std::string>& objects, const std::string& relation,
                    const Grammar& g, Rng& rng) {
  std::vector<std::string> order = objects;
  if (rng.bernoulli(0.5)) rng.shuffle(order);

  std::vector<std::string> list;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i + 1 == order.size() && order.size() > 1) list.push_back("and");
    const auto [mod, noun] = split_object(order[i]);
    list.push_back("a");
    if (!mod.empty() && rng.bernoulli(0.8)) list.push_back(pick(g.modifiers.at(mod), rng));
    list.push_back(pick(g.nouns.at(noun), rng));
  }
  const std::string verb = pick(g.relations.at(relation), rng);
  const bool plural = objects.size() > 1;

  std::vector<std::string> words;
  switch (rng.index(4)) {
    case 0:
      words = list;
      words.push_back(verb);
      break;
    case 1:
      words = {"there", plural ? "are" : "is"};
      words.insert(words.end(), list.begin(), list.end());
      words.push_back(verb);
      break;
    case 2:
      words = list;
      words.push_back(plural ? "are" : "is");
      words.push_back(verb);
      break;
    default:
      words = list;
      words.push_back(verb);
      words.push_back(plural ? "together" : "alone");
      break;
  }
  return text::join(words);
}

}  // namespace

ParsedCaption parse_caption(const text::Tokens& tokens, const Grammar& g) {
  ParsedCaption parsed;
  std::optional<std::string> pending_mod;
  for (const auto& tok : tokens) {
    if (auto mod = concept_of(g.modifiers, tok)) {
      pending_mod = mod;
    } else if (auto noun = concept_of(g.nouns, tok)) {
      parsed.objects.emplace_back(pending_mod, *noun);
      pending_mod.reset();
    } else if (auto rel = concept_of(g.relations, tok)) {
      parsed.relation = rel;
    }
  }
  return parsed;
}

bool caption_matches_scene(const text::Tokens& tokens, const DatasetRecord& record,
                           const Grammar& g) {
  const auto parsed = parse_caption(tokens, g);
  if (parsed.relation != record.relation) return false;
  std::map<std::string, std::string> scene;  // noun -> modifier
  for (const auto& obj : record.objects) {
    auto [mod, noun] = split_object(obj);
    scene[noun] = mod;
  }
  std::set<std::string> seen;
  for (const auto& [mod, noun] : parsed.objects) {
    auto it = scene.find(noun);
    if (it == scene.end() || !seen.insert(noun).second) return false;
    if (mod && *mod != it->second) return false;
  }
  return seen.size() == scene.size();
}

double keyword_precision(const text::Tokens& tokens, const DatasetRecord& record,
                         const Grammar& g) {
  std::set<std::string> nouns, mods;
  for (const auto& obj : record.objects) {
    auto [mod, noun] = split_object(obj);
    nouns.insert(noun);
    mods.insert(mod);
  }
  std::size_t content = 0, correct = 0;
  for (const auto& tok : tokens) {
    if (auto c = concept_of(g.nouns, tok)) {
      ++content;
      correct += nouns.count(*c);
    } else if (auto m = concept_of(g.modifiers, tok)) {
      ++content;
      correct += mods.count(*m);
    } else if (auto r = concept_of(g.relations, tok)) {
      ++content;
      correct += *r == record.relation ? 1 : 0;
    }
  }
  return content == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(content);
}

// ---------------------------------------------------------------------------
// Attributes

std::vector<std::string> build_attr_vocab(std::span<const DatasetRecord> records, std::size_t size,
                                          const Grammar& g) {
  const std::set<std::string> stop(g.stopwords.begin(), g.stopwords.end());
  std::map<std::string, std::size_t> freq;
  for (const auto& r : records) {
    if (r.split != Split::kTrain) continue;
    for (const auto& ref : r.refs)
      for (const auto& tok : text::tokenize(ref))
        if (stop.count(tok) == 0) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < size; ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<std::string> extract_attributes(std::span<const text::Tokens> refs,
                                            std::span<const std::string> attr_vocab,
                                            const Grammar& g) {
  const std::set<std::string> stop(g.stopwords.begin(), g.stopwords.end());
  std::set<std::string> present;
  for (const auto& ref : refs) present.insert(ref.begin(), ref.end());
  std::vector<std::string> out;
  for (const auto& a : attr_vocab)
    if (present.count(a) != 0 && stop.count(a) == 0) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<DatasetRecord> gen_dataset(const GenConfig& config) {
  if (config.num_records == 0) fail(ErrorCode::kConfig, "num_records must be >= 1");
  if (config.max_objects == 0 || config.max_objects > 4)
    fail(ErrorCode::kConfig, "max_objects must be in 1..4");
  const Grammar& g = Grammar::standard();
  Rng rng(config.seed);

  std::vector<std::string> noun_names, mod_names, rel_names;
  for (const auto& [k, v] : g.nouns) noun_names.push_back(k);
  for (const auto& [k, v] : g.modifiers) mod_names.push_back(k);
  for (const auto& [k, v] : g.relations) rel_names.push_back(k);

  static constexpr double kObjectCountWeights[] = {0.30, 0.35, 0.20, 0.15};

  std::vector<DatasetRecord> records;
  records.reserve(config.num_records);
  for (std::size_t i = 0; i < config.num_records; ++i) {
    DatasetRecord rec;
    rec.id = static_cast<std::int64_t>(i);
    rec.split = i % 10 < 8 ? Split::kTrain : (i % 10 == 8 ? Split::kVal : Split::kTest);

    double total = 0.0;
    for (std::size_t k = 0; k < config.max_objects; ++k) total += kObjectCountWeights[k];
    double u = rng.uniform() * total;
    std::size_t count = 1;
    for (std::size_t k = 0; k < config.max_objects; ++k) {
      if (u < kObjectCountWeights[k]) {
        count = k + 1;
        break;
      }
      u -= kObjectCountWeights[k];
      count = k + 1;
    }

    std::vector<std::string> nouns = noun_names;
    rng.shuffle(nouns);
    for (std::size_t k = 0; k < count; ++k)
      rec.objects.push_back(pick(mod_names, rng) + " " + nouns[k]);

    rec.relation = rng.bernoulli(0.6) ? g.preferred_relation.at(nouns[0]) : pick(rel_names, rng);

    std::set<std::string> distinct;
    for (std::size_t attempt = 0; rec.refs.size() < config.refs_per_record; ++attempt) {
      std::string caption = realize(rec.objects, rec.relation, g, rng);
      if (!caption_matches_scene(text::tokenize(caption), rec, g))
        fail(ErrorCode::kDataContract, "grammar produced an unparseable caption: " + caption);
      if (distinct.insert(caption).second || attempt > 200) rec.refs.push_back(std::move(caption));
    }
    records.push_back(std::move(rec));
  }

  const auto attr_vocab = build_attr_vocab(records, config.attr_vocab_size, g);
  for (auto& rec : records) {
    std::vector<text::Tokens> refs;
    for (const auto& r : rec.refs) refs.push_back(text::tokenize(r));
    rec.attributes = extract_attributes(refs, attr_vocab, g);
    if (rec.attributes.empty())
      fail(ErrorCode::kDataContract, "record " + std::to_string(rec.id) + " has no attributes");
  }
  return records;
}

// ---------------------------------------------------------------------------
// Misalignment

bool is_misaligned(const DatasetRecord& record) {
  std::map<text::Tokens, std::set<std::string>> next;
  for (const auto& ref : record.refs) {
    const auto toks = text::tokenize(ref);
    text::Tokens prefix;
    for (std::size_t t = 0; t <= toks.size(); ++t) {
      next[prefix].insert(t < toks.size() ? toks[t] : std::string("</s>"));
      if (t < toks.size()) prefix.push_back(toks[t]);
    }
  }
  return std::any_of(next.begin(), next.end(), [](const auto& kv) { return kv.second.size() >= 2; });
}

double measure_misalignment(std::span<const DatasetRecord> records) {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (r.refs.size() < 2)
      fail(ErrorCode::kDataContract, "misalignment needs at least two references per record");
    hits += is_misaligned(r) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// JSONL

void write_jsonl(std::ostream& out, std::span<const DatasetRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["objects"] = r.objects;
    j["relation"] = r.relation;
    j["attributes"] = r.attributes;
    j["refs"] = r.refs;
    j["split"] = std::string(data::to_string(r.split));
    out << j.dump() << '\n';
  }
}

std::string to_jsonl(std::span<const DatasetRecord> records) {
  std::ostringstream os;
  write_jsonl(os, records);
  return os.str();
}

std::vector<DatasetRecord> read_jsonl(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DatasetRecord r;
      r.id = j.at("id").get<std::int64_t>();
      r.objects = j.at("objects").get<std::vector<std::string>>();
      r.relation = j.at("relation").get<std::string>();
      r.attributes = j.at("attributes").get<std::vector<std::string>>();
      r.refs = j.at("refs").get<std::vector<std::string>>();
      r.split = data::parse_split(j.at("split").get<std::string>());
      if (r.refs.empty()) fail(ErrorCode::kDataContract, "record without references");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kDataContract, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::string& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  write_jsonl(out, records);
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  return read_jsonl(in);
}

}  // namespace tcts::synth
