// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tcts/textcore.hpp"

namespace tcts::data {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

/// One synthetic scene: its visible objects, the latent relation, the
/// ground-truth attribute set and five reference captions.
struct DatasetRecord {
  std::int64_t id = 0;
  std::vector<std::string> objects;  // "<modifier> <noun>" concept pairs
  std::string relation;
  std::vector<std::string> attributes;
  std::vector<std::string> refs;
  Split split = Split::kTrain;

  bool operator==(const DatasetRecord&) const = default;
};

/// Ordered string inventory with dense indices.
class Inventory {
 public:
  Inventory() = default;
  explicit Inventory(std::vector<std::string> items);

  std::optional<std::size_t> find(std::string_view item) const;
  const std::string& at(std::size_t i) const { return items_.at(i); }
  std::size_t size() const { return items_.size(); }
  std::span<const std::string> items() const { return items_; }
  std::uint64_t hash() const;

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Everything the model needs to turn records into ids: the caption
/// vocabulary, the visible object inventory and the attribute vocabulary.
/// Built from the training split only.
struct Lexicon {
  text::Vocab words;
  Inventory objects;
  Inventory attributes;

  std::uint64_t hash() const;
};

Lexicon build_lexicon(std::span<const DatasetRecord> records, int min_count,
                      std::size_t attr_vocab_size);

std::vector<DatasetRecord> filter_split(std::span<const DatasetRecord> records, Split split);

/// Tokenized and encoded references of a record.
std::vector<text::Caption> encode_refs(const DatasetRecord& record, const text::Vocab& vocab,
                                       std::size_t max_len);

}  // namespace tcts::data
