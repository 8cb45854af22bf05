// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/textcore.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "tcts/error.hpp"

namespace tcts::text {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  if (out.empty()) fail(ErrorCode::kEmptyText, "no tokens in '" + std::string(text) + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(s);
}

void Vocab::add(const std::string& token) {
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

Vocab Vocab::build(std::span<const Tokens> corpus, int min_count) {
  std::map<std::string, int> freq;
  for (const auto& sentence : corpus)
    for (const auto& tok : sentence) ++freq[tok];

  std::vector<std::pair<std::string, int>> kept;
  for (auto& [tok, count] : freq)
    if (count >= min_count) kept.emplace_back(tok, count);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab vocab;
  for (const auto& [tok, count] : kept) vocab.add(tok);
  return vocab;
}

Vocab Vocab::from_tokens(std::span<const std::string> words) {
  Vocab vocab;
  for (const auto& w : words) {
    if (vocab.token_to_id_.count(w) != 0)
      fail(ErrorCode::kDataContract, "duplicate vocabulary token '" + w + "'");
    vocab.add(w);
  }
  return vocab;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() || it->second < kNumSpecials ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return id(token) != kUnk; }

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    fail(ErrorCode::kDataContract, "token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::span<const std::string> Vocab::words() const {
  return std::span<const std::string>(id_to_token_).subspan(kNumSpecials);
}

std::uint64_t Vocab::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& tok : id_to_token_) {
    for (char c : tok) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Caption

std::span<const TokenId> Caption::interior() const {
  if (ids.size() < 2) return {};
  return std::span<const TokenId>(ids).subspan(1, ids.size() - 2);
}

Caption Caption::from_interior(std::span<const TokenId> interior) {
  Caption c;
  c.ids.reserve(interior.size() + 2);
  c.ids.push_back(kBos);
  c.ids.insert(c.ids.end(), interior.begin(), interior.end());
  c.ids.push_back(kEos);
  return c;
}

void validate(const Caption& caption, std::size_t max_len) {
  const auto& ids = caption.ids;
  if (ids.size() < 3 || ids.front() != kBos || ids.back() != kEos)
    fail(ErrorCode::kDataContract, "caption must be BOS w1..wT EOS with T >= 1");
  for (TokenId id : caption.interior())
    if (id == kBos || id == kEos || id == kPad)
      fail(ErrorCode::kDataContract, "sentinel inside caption interior");
  if (caption.length() > max_len)
    fail(ErrorCode::kDataContract, "caption longer than max_len");
}

Caption encode(const Tokens& tokens, const Vocab& vocab, std::size_t max_len) {
  if (tokens.empty()) fail(ErrorCode::kEmptyText, "cannot encode an empty token sequence");
  std::vector<TokenId> interior;
  interior.reserve(std::min(tokens.size(), max_len));
  for (const auto& tok : tokens) {
    if (interior.size() == max_len) break;
    interior.push_back(vocab.id(tok));
  }
  Caption c = Caption::from_interior(interior);
  c.truncated = tokens.size() > max_len;
  return c;
}

Tokens decode(const Caption& caption, const Vocab& vocab) {
  Tokens out;
  for (TokenId id : caption.interior()) out.push_back(vocab.token(id));
  return out;
}

std::string join(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// N-grams

namespace {
constexpr int kBitsPerToken = 15;
constexpr std::uint64_t kTokenMask = (1ull << kBitsPerToken) - 1;
}  // namespace

NGram::NGram(std::span<const TokenId> ids) {
  if (ids.empty() || ids.size() > 4)
    fail(ErrorCode::kShapeMismatch, "n-gram order must be in 1..4");
  key_ = static_cast<std::uint64_t>(ids.size()) << 60;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::uint64_t>(ids[i]) > kTokenMask)
      fail(ErrorCode::kShapeMismatch, "token id does not fit an n-gram key");
    key_ |= static_cast<std::uint64_t>(ids[i]) << (kBitsPerToken * (3 - i));
  }
}

std::vector<TokenId> NGram::tokens() const {
  std::vector<TokenId> out(static_cast<std::size_t>(order()));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<TokenId>((key_ >> (kBitsPerToken * (3 - i))) & kTokenMask);
  return out;
}

NGramCounts::NGramCounts(std::vector<std::pair<NGram, int>> sorted_entries)
    : entries_(std::move(sorted_entries)) {}

int NGramCounts::count(const NGram& gram) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), gram,
                             [](const auto& e, const NGram& g) { return e.first < g; });
  return it != entries_.end() && it->first == gram ? it->second : 0;
}

std::size_t NGramCounts::total() const {
  std::size_t sum = 0;
  for (const auto& e : entries_) sum += static_cast<std::size_t>(e.second);
  return sum;
}

NGramCounts ngrams(std::span<const TokenId> ids, int n) {
  if (n < 1 || n > 4) fail(ErrorCode::kShapeMismatch, "n-gram order must be in 1..4");
  const auto order = static_cast<std::size_t>(n);
  std::vector<NGram> grams;
  if (ids.size() >= order) {
    grams.reserve(ids.size() - order + 1);
    for (std::size_t i = 0; i + order <= ids.size(); ++i) grams.emplace_back(ids.subspan(i, order));
  }
  std::sort(grams.begin(), grams.end());
  std::vector<std::pair<NGram, int>> entries;
  for (const auto& g : grams) {
    if (!entries.empty() && entries.back().first == g) {
      ++entries.back().second;
    } else {
      entries.emplace_back(g, 1);
    }
  }
  return NGramCounts(std::move(entries));
}

// ---------------------------------------------------------------------------
// Longest common subsequence

namespace {

std::vector<std::size_t> lcs_table(std::span<const TokenId> a, std::span<const TokenId> b) {
  const std::size_t cols = b.size() + 1;
  std::vector<std::size_t> dp((a.size() + 1) * cols, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i * cols + j] = a[i - 1] == b[j - 1]
                             ? dp[(i - 1) * cols + j - 1] + 1
                             : std::max(dp[(i - 1) * cols + j], dp[i * cols + j - 1]);
    }
  }
  return dp;
}

}  // namespace

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  return lcs_table(a, b).back();
}

LcsPartition lcs_partition(std::span<const TokenId> student, std::span<const TokenId> teacher) {
  const auto dp = lcs_table(student, teacher);
  const std::size_t cols = teacher.size() + 1;

  LcsPartition part;
  part.in_lcs.assign(student.size(), false);
  std::size_t i = student.size();
  std::size_t j = teacher.size();
  while (i > 0 && j > 0) {
    if (student[i - 1] == teacher[j - 1]) {
      part.in_lcs[i - 1] = true;
      --i;
      --j;
    } else if (dp[(i - 1) * cols + j] >= dp[i * cols + j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  part.n = dp.back();
  part.m = student.size() - part.n;
  return part;
}

LcsPartition lcs_partition(const Caption& student, const Caption& teacher) {
  return lcs_partition(student.interior(), teacher.interior());
}

}  // namespace tcts::text
