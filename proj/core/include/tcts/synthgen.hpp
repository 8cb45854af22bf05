// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic scene-captioning corpus. A scene is 1-4 objects
// (modifier + noun concepts) and one latent relation; each scene gets five
// reference captions drawn from a small invertible grammar with synonym and
// word-order variation, so references for one scene routinely share a
// prefix and then diverge.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcts/dataset.hpp"
#include "tcts/textcore.hpp"

namespace tcts::synth {

struct GenConfig {
  std::size_t num_records = 2000;
  std::uint64_t seed = 1;
  int min_count = 5;
  std::size_t attr_vocab_size = 50;
  std::size_t refs_per_record = 5;
  std::size_t max_objects = 4;
};

/// Concept inventories with their surface synonyms and the fixed template
/// vocabulary.
struct Grammar {
  std::map<std::string, std::vector<std::string>> nouns;
  std::map<std::string, std::vector<std::string>> modifiers;
  std::map<std::string, std::vector<std::string>> relations;
  std::map<std::string, std::string> preferred_relation;  // noun -> relation
  std::vector<std::string> stopwords;

  static const Grammar& standard();

  /// Longest caption the templates can produce for `max_objects` objects.
  std::size_t max_caption_length(std::size_t max_objects) const;
};

/// Scene recovered from a caption by inverting the grammar.
struct ParsedCaption {
  std::vector<std::pair<std::optional<std::string>, std::string>> objects;  // (modifier, noun)
  std::optional<std::string> relation;
};

ParsedCaption parse_caption(const text::Tokens& tokens, const Grammar& grammar);

/// True when the caption names exactly the scene's nouns, only the scene's
/// modifiers for them, and the scene's relation.
bool caption_matches_scene(const text::Tokens& tokens, const data::DatasetRecord& record,
                           const Grammar& grammar);

/// Fraction of content words in the caption (nouns, modifiers, relation
/// words) that are correct for the scene. 0 when there are no content words.
double keyword_precision(const text::Tokens& tokens, const data::DatasetRecord& record,
                         const Grammar& grammar);

/// Top-A most frequent non-stopword tokens of the training references,
/// ties broken lexicographically.
std::vector<std::string> build_attr_vocab(std::span<const data::DatasetRecord> records,
                                          std::size_t size, const Grammar& grammar);

/// Tokens present in at least one reference and in `attr_vocab`, minus
/// stopwords, in attr_vocab order.
std::vector<std::string> extract_attributes(std::span<const text::Tokens> refs,
                                            std::span<const std::string> attr_vocab,
                                            const Grammar& grammar);

/// Records split 80/10/10 by index (i % 10 < 8 train, == 8 val, == 9 test).
std::vector<data::DatasetRecord> gen_dataset(const GenConfig& config);

/// Fraction of records having a shared proper prefix (the empty prefix,
/// i.e. BOS, included) followed by at least two distinct next tokens, EOS
/// counting as a token.
double measure_misalignment(std::span<const data::DatasetRecord> records);
bool is_misaligned(const data::DatasetRecord& record);

void write_jsonl(std::ostream& out, std::span<const data::DatasetRecord> records);
std::string to_jsonl(std::span<const data::DatasetRecord> records);
std::vector<data::DatasetRecord> read_jsonl(std::istream& in);

void save_dataset(const std::string& path, std::span<const data::DatasetRecord> records);
std::vector<data::DatasetRecord> load_dataset(const std::string& path);

}  // namespace tcts::synth
