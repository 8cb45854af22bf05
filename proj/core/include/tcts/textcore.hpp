// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text substrate shared by metrics, losses and rewards: tokenization,
// vocabularies, captions with BOS/EOS sentinels, n-gram multisets and the
// longest-common-subsequence partition used to split sampled captions into
// appropriate and inaccurate words.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tcts::text {

using TokenId = std::int32_t;
using Tokens = std::vector<std::string>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kNumSpecials = 4;

/// Lowercases, strips punctuation and splits on whitespace. Throws
/// ErrorCode::kEmptyText when nothing survives cleaning.
Tokens tokenize(std::string_view text);

class Vocab {
 public:
  Vocab();

  /// Keeps tokens seen at least `min_count` times. Ids are assigned by
  /// descending frequency, ties broken lexicographically.
  static Vocab build(std::span<const Tokens> corpus, int min_count);

  /// Restores a vocabulary from its non-special tokens in id order.
  static Vocab from_tokens(std::span<const std::string> words);

  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return id_to_token_.size(); }
  std::size_t num_words() const { return id_to_token_.size() - kNumSpecials; }

  /// Non-special tokens in id order.
  std::span<const std::string> words() const;

  /// FNV-1a over the token list; identifies a vocabulary in checkpoints.
  std::uint64_t hash() const;

 private:
  void add(const std::string& token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// BOS + interior ids + EOS. `truncated` records that the interior was cut
/// at max_len during encoding or decoding.
struct Caption {
  std::vector<TokenId> ids;
  bool truncated = false;

  /// Interior length T (sentinels excluded).
  std::size_t length() const { return ids.size() >= 2 ? ids.size() - 2 : 0; }
  std::span<const TokenId> interior() const;

  /// Wraps interior ids with sentinels.
  static Caption from_interior(std::span<const TokenId> interior);

  bool operator==(const Caption& other) const { return ids == other.ids; }
};

/// Throws kDataContract if the caption is not BOS ... EOS with T >= 1 and
/// no interior sentinel.
void validate(const Caption& caption, std::size_t max_len);

Caption encode(const Tokens& tokens, const Vocab& vocab, std::size_t max_len);
Tokens decode(const Caption& caption, const Vocab& vocab);
std::string join(const Tokens& tokens);

/// Up to four token ids packed into one ordered key.
class NGram {
 public:
  NGram() = default;
  explicit NGram(std::span<const TokenId> ids);

  int order() const { return static_cast<int>(key_ >> 60); }
  std::vector<TokenId> tokens() const;
  std::uint64_t key() const { return key_; }

  auto operator<=>(const NGram&) const = default;

 private:
  std::uint64_t key_ = 0;
};

/// Sorted multiset of n-grams of a single order.
class NGramCounts {
 public:
  NGramCounts() = default;
  explicit NGramCounts(std::vector<std::pair<NGram, int>> sorted_entries);

  int count(const NGram& gram) const;
  std::size_t distinct() const { return entries_.size(); }
  std::size_t total() const;
  std::span<const std::pair<NGram, int>> entries() const { return entries_; }

 private:
  std::vector<std::pair<NGram, int>> entries_;
};

/// All contiguous n-grams of `ids`, 1 <= n <= 4.
NGramCounts ngrams(std::span<const TokenId> ids, int n);

struct LcsPartition {
  std::vector<bool> in_lcs;  // one entry per student interior position
  std::size_t n = 0;         // appropriate words
  std::size_t m = 0;         // inaccurate words
};

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);

/// LCS between the interiors of the two captions. The backtrace starts at
/// the bottom-right corner of the DP table and prefers a diagonal move on a
/// match, then a move along the student axis on ties. n and m do not depend
/// on which maximal subsequence is marked.
LcsPartition lcs_partition(const Caption& student, const Caption& teacher);
LcsPartition lcs_partition(std::span<const TokenId> student,
                           std::span<const TokenId> teacher);

}  // namespace tcts::text
