// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "oracles.hpp"
#include "support.hpp"
#include "tcts/error.hpp"
#include "tcts/textcore.hpp"

using namespace tcts;
using namespace tcts::text;
using tcts::testing::cap;
using tcts::testing::random_ids;

namespace {

bool is_subsequence(const std::vector<TokenId>& sub, std::span<const TokenId> seq) {
  std::size_t j = 0;
  for (TokenId t : seq)
    if (j < sub.size() && sub[j] == t) ++j;
  return j == sub.size();
}

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("A small dog.") == Tokens{"a", "small", "dog"});
  CHECK(tokenize("dog dog") == Tokens{"dog", "dog"});
  CHECK(tokenize("  Two\tcats,  sleeping!\n") == Tokens{"two", "cats", "sleeping"});
}

TEST_CASE("tokenize rejects text that is empty after cleaning") {
  for (const char* s : {"  ", "", "...", "\t\n"}) {
    try {
      tokenize(s);
      FAIL("expected EmptyText for '" << s << "'");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyText);
    }
  }
}

TEST_CASE("vocab frequency threshold") {
  const std::vector<Tokens> corpus = {{"a", "dog"}, {"a", "cat"}};
  const auto v = Vocab::build(corpus, 2);
  CHECK(v.num_words() == 1);
  CHECK(v.contains("a"));
  CHECK_FALSE(v.contains("dog"));
  CHECK(v.id("dog") == kUnk);

  const std::vector<Tokens> single = {{"a"}};
  const auto v1 = Vocab::build(single, 1);
  REQUIRE(v1.num_words() == 1);
  CHECK(v1.token(kNumSpecials) == "a");
}

TEST_CASE("vocab order is descending frequency then lexicographic") {
  const std::vector<Tokens> corpus = {{"b", "c", "a"}, {"c", "b"}, {"c", "d"}};
  const auto v = Vocab::build(corpus, 1);
  REQUIRE(v.num_words() == 4);
  CHECK(v.token(4) == "c");
  CHECK(v.token(5) == "b");
  CHECK(v.token(6) == "a");
  CHECK(v.token(7) == "d");
  CHECK(v.token(kPad) != v.token(kBos));
  CHECK(v.id(v.token(kEos)) == kUnk);  // special strings never map back to sentinels
}

TEST_CASE("vocab may hold only specials") {
  const std::vector<Tokens> corpus = {{"x"}};
  const auto v = Vocab::build(corpus, 3);
  CHECK(v.num_words() == 0);
  CHECK(v.size() == static_cast<std::size_t>(kNumSpecials));
}

TEST_CASE("encode and decode") {
  const std::vector<Tokens> corpus = {{"a", "dog"}};
  const auto v = Vocab::build(corpus, 1);
  const auto c = encode({"a", "dog"}, v, 16);
  CHECK(c.ids == std::vector<TokenId>{kBos, v.id("a"), v.id("dog"), kEos});
  CHECK_FALSE(c.truncated);
  CHECK(decode(c, v) == Tokens{"a", "dog"});

  const auto oov = encode({"a", "zzz"}, v, 16);
  CHECK(oov.ids == std::vector<TokenId>{kBos, v.id("a"), kUnk, kEos});
}

TEST_CASE("encode flags truncation") {
  const std::vector<Tokens> corpus = {{"a", "b", "c"}};
  const auto v = Vocab::build(corpus, 1);
  const auto c = encode({"a", "b", "c", "a"}, v, 2);
  CHECK(c.truncated);
  CHECK(c.length() == 2);
  CHECK(c.ids.back() == kEos);
  CHECK_NOTHROW(validate(c, 2));
}

TEST_CASE("caption validation") {
  CHECK_NOTHROW(validate(cap({4, 5}), 4));
  CHECK_THROWS_AS(validate(cap({}), 4), Error);
  CHECK_THROWS_AS(validate(cap({4, 5, 6}), 2), Error);
  Caption interior_eos{{kBos, 4, kEos, 5, kEos}};
  CHECK_THROWS_AS(validate(interior_eos, 8), Error);
  Caption no_bos{{4, 5, kEos}};
  CHECK_THROWS_AS(validate(no_bos, 8), Error);
}

TEST_CASE("ngram multisets") {
  const std::vector<TokenId> aba = {4, 5, 4};
  const auto uni = ngrams(aba, 1);
  CHECK(uni.distinct() == 2);
  CHECK(uni.count(NGram(std::vector<TokenId>{4})) == 2);
  CHECK(uni.count(NGram(std::vector<TokenId>{5})) == 1);

  const auto bi = ngrams(aba, 2);
  CHECK(bi.distinct() == 2);
  CHECK(bi.count(NGram(std::vector<TokenId>{4, 5})) == 1);
  CHECK(bi.count(NGram(std::vector<TokenId>{5, 4})) == 1);

  const std::vector<TokenId> a = {4};
  CHECK(ngrams(a, 2).total() == 0);
}

TEST_CASE("ngram keys round-trip and keep order distinct") {
  const std::vector<TokenId> g = {7, 4, 30000};
  const NGram n(g);
  CHECK(n.order() == 3);
  CHECK(n.tokens() == g);
  CHECK(NGram(std::vector<TokenId>{4}) != NGram(std::vector<TokenId>{4, 0}));
}

TEST_CASE("ngram cardinality property") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ids = random_ids(rng, 12, 5);
    for (int n = 1; n <= 4; ++n) {
      const auto expected = ids.size() >= static_cast<std::size_t>(n) ? ids.size() - n + 1 : 0;
      REQUIRE(ngrams(ids, n).total() == expected);
    }
  }
}

TEST_CASE("lcs partition worked example") {
  // a cat is on mat / a cat sat on the mat
  const auto student = cap({4, 5, 6, 7, 8});
  const auto teacher = cap({4, 5, 9, 7, 10, 8});
  const auto p = lcs_partition(student, teacher);
  CHECK(p.n == 4);
  CHECK(p.m == 1);
  CHECK(p.in_lcs == std::vector<bool>{true, true, false, true, true});
  CHECK(oracle::lcs({4, 5, 6, 7, 8}, {4, 5, 9, 7, 10, 8}) == 4);
}

TEST_CASE("lcs partition degenerate cases") {
  const auto s = cap({4, 5, 6});
  const auto same = lcs_partition(s, s);
  CHECK(same.n == 3);
  CHECK(same.m == 0);
  CHECK(std::all_of(same.in_lcs.begin(), same.in_lcs.end(), [](bool b) { return b; }));

  const auto disjoint = lcs_partition(s, cap({7, 8}));
  CHECK(disjoint.n == 0);
  CHECK(disjoint.m == 3);
}

TEST_CASE("lcs tie-break prefers the diagonal then the student axis") {
  // student [a b], teacher [b a]: both single-token LCS are maximal; the
  // mismatch at the corner steps along the student axis first.
  const auto p = lcs_partition(cap({4, 5}), cap({5, 4}));
  CHECK(p.n == 1);
  CHECK(p.in_lcs == std::vector<bool>{true, false});
  // Repeated token: the later student occurrence pairs with the single match.
  const auto q = lcs_partition(cap({4, 4}), cap({4}));
  CHECK(q.in_lcs == std::vector<bool>{false, true});
}

TEST_CASE("lcs properties on random pairs") {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_ids(rng, 10, 6);
    const auto b = random_ids(rng, 10, 6);
    const auto p = lcs_partition(std::span<const TokenId>(a), std::span<const TokenId>(b));
    REQUIRE(p.n == oracle::lcs({a.begin(), a.end()}, {b.begin(), b.end()}));
    REQUIRE(p.n + p.m == a.size());
    REQUIRE(lcs_length(b, a) == p.n);

    std::vector<TokenId> marked;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (p.in_lcs[i]) marked.push_back(a[i]);
    REQUIRE(marked.size() == p.n);
    REQUIRE(is_subsequence(marked, b));
  }
}
