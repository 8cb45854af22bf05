// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/dataset.hpp"

#include <set>

#include "tcts/error.hpp"
#include "tcts/synthgen.hpp"

namespace tcts::data {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  fail(ErrorCode::kDataContract, "unknown split '" + std::string(name) + "'");
}

Inventory::Inventory(std::vector<std::string> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i], i).second)
      fail(ErrorCode::kDataContract, "duplicate inventory item '" + items_[i] + "'");
  }
}

std::optional<std::size_t> Inventory::find(std::string_view item) const {
  auto it = index_.find(std::string(item));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Inventory::hash() const {
  return text::Vocab::from_tokens(items_).hash();
}

std::uint64_t Lexicon::hash() const {
  std::uint64_t h = words.hash();
  h = h * 1099511628211ull ^ objects.hash();
  h = h * 1099511628211ull ^ attributes.hash();
  return h;
}

Lexicon build_lexicon(std::span<const DatasetRecord> records, int min_count,
                      std::size_t attr_vocab_size) {
  const auto train = filter_split(records, Split::kTrain);
  if (train.empty()) fail(ErrorCode::kDataContract, "no training records");
  std::vector<text::Tokens> corpus;
  std::set<std::string> objects;
  for (const auto& r : train) {
    for (const auto& ref : r.refs) corpus.push_back(text::tokenize(ref));
    objects.insert(r.objects.begin(), r.objects.end());
  }
  // Every concept the standard grammar can place in a scene, so held-out
  // splits never meet an unseen object.
  const auto& g = synth::Grammar::standard();
  for (const auto& [mod, words] : g.modifiers)
    for (const auto& [noun, nwords] : g.nouns) objects.insert(mod + " " + noun);
  Lexicon lex;
  lex.words = text::Vocab::build(corpus, min_count);
  lex.objects = Inventory({objects.begin(), objects.end()});
  lex.attributes =
      Inventory(synth::build_attr_vocab(train, attr_vocab_size, synth::Grammar::standard()));
  return lex;
}

std::vector<DatasetRecord> filter_split(std::span<const DatasetRecord> records, Split split) {
  std::vector<DatasetRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

std::vector<text::Caption> encode_refs(const DatasetRecord& record, const text::Vocab& vocab,
                                       std::size_t max_len) {
  std::vector<text::Caption> out;
  out.reserve(record.refs.size());
  for (const auto& ref : record.refs) out.push_back(text::encode(text::tokenize(ref), vocab, max_len));
  return out;
}

}  // namespace tcts::data
