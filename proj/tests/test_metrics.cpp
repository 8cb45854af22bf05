// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "tcts/error.hpp"
#include "tcts/metrics.hpp"

using namespace tcts;
using namespace tcts::metrics;
using Catch::Approx;
using tcts::testing::cap;
using tcts::testing::random_ids;
using text::Caption;
using text::NGram;
using text::TokenId;

namespace {

oracle::Seq seq(const Caption& c) { return {c.interior().begin(), c.interior().end()}; }

std::vector<std::vector<oracle::Seq>> as_seqs(const std::vector<RefSet>& corpus) {
  std::vector<std::vector<oracle::Seq>> out;
  for (const auto& set : corpus) {
    out.emplace_back();
    for (const auto& c : set) out.back().push_back(seq(c));
  }
  return out;
}

NGram gram(std::initializer_list<TokenId> ids) { return NGram(std::vector<TokenId>(ids)); }

}  // namespace

TEST_CASE("document frequency and idf") {
  const std::vector<RefSet> corpus = {{cap({4, 5})}, {cap({4, 6}), cap({4, 7})}};
  const auto idf = IdfTable::build(corpus);
  CHECK(idf.num_images() == 2);
  CHECK(idf.document_frequency(gram({4})) == 2);
  CHECK(idf.idf(gram({4})) == 0.0);
  CHECK(idf.document_frequency(gram({5})) == 1);
  CHECK(idf.idf(gram({5})) == Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(idf.document_frequency(gram({9})) == 0);
}

TEST_CASE("idf build rejects empty reference sets") {
  const std::vector<RefSet> none;
  CHECK_THROWS_AS(IdfTable::build(none), Error);
  const std::vector<RefSet> hole = {{cap({4})}, {}};
  try {
    IdfTable::build(hole);
    FAIL("expected MissingReferences");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingReferences);
  }
}

TEST_CASE("cider of an exact match with informative n-grams is 10") {
  const std::vector<RefSet> corpus = {{cap({4, 5, 6, 7})}, {cap({8, 9, 10, 11})}};
  const auto idf = IdfTable::build(corpus);
  const double c = cider(cap({4, 5, 6, 7}), corpus[0], idf);
  CHECK(c == Approx(10.0).epsilon(1e-12));
  CHECK(c == Approx(oracle::cider({4, 5, 6, 7}, as_seqs(corpus)[0], as_seqs(corpus))).epsilon(1e-12));
}

TEST_CASE("cider is zero without shared n-grams") {
  const std::vector<RefSet> corpus = {{cap({4, 5, 6, 7})}, {cap({8, 9, 10, 11})}};
  const auto idf = IdfTable::build(corpus);
  CHECK(cider(cap({12, 13, 14}), corpus[0], idf) == 0.0);
}

TEST_CASE("cider is zero when every n-gram is ubiquitous") {
  const std::vector<RefSet> corpus = {{cap({4, 5, 6})}, {cap({4, 5, 6})}};
  const auto idf = IdfTable::build(corpus);
  const double c = cider(cap({4, 5, 6}), corpus[0], idf);
  CHECK(c == 0.0);
  CHECK(std::isfinite(c));
  CHECK(oracle::cider({4, 5, 6}, as_seqs(corpus)[0], as_seqs(corpus)) == 0.0);
}

TEST_CASE("cider length penalty") {
  // Shared prefix, different lengths: a closed form for the unigram term.
  const std::vector<RefSet> corpus = {{cap({4, 5, 6, 7, 8, 9, 10, 11})}, {cap({12})}};
  const auto idf = IdfTable::build(corpus);
  const auto cand = cap({4, 5});
  const double expected = oracle::cider({4, 5}, as_seqs(corpus)[0], as_seqs(corpus));
  CHECK(cider(cand, corpus[0], idf) == Approx(expected).epsilon(1e-12));
  // unigram: 2/8 overlap of equal weights, cos = 2 / (sqrt(2) sqrt(8)) = 0.5
  // bigram: 1 shared of 7 -> 1 / sqrt(7); delta = 6
  const double pen = std::exp(-36.0 / 72.0);
  CHECK(expected == Approx((0.5 + 1.0 / std::sqrt(7.0)) * pen / 4.0 * 10.0).epsilon(1e-12));
}

TEST_CASE("cider requires references") {
  const std::vector<RefSet> corpus = {{cap({4})}};
  const auto idf = IdfTable::build(corpus);
  const RefSet empty;
  CHECK_THROWS_AS(cider(cap({4}), empty, idf), Error);
  CHECK_THROWS_AS(bleu(cap({4}), empty), Error);
  CHECK_THROWS_AS(rouge_l(cap({4}), empty), Error);
}

TEST_CASE("cider scorer matches the free function") {
  Rng rng(5);
  std::vector<RefSet> corpus;
  for (int i = 0; i < 6; ++i) {
    RefSet set;
    for (int r = 0; r < 3; ++r) set.push_back(Caption::from_interior(random_ids(rng, 6, 5, 1)));
    corpus.push_back(set);
  }
  const auto idf = IdfTable::build(corpus);
  for (const auto& set : corpus) {
    const CiderScorer scorer(set, idf);
    for (int k = 0; k < 20; ++k) {
      const auto c = Caption::from_interior(random_ids(rng, 6, 5, 1));
      REQUIRE(scorer.score(c) == cider(c, set, idf));
    }
  }
}

TEST_CASE("cider matches the brute-force oracle on random corpora") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t images = 1 + rng.index(5);
    std::vector<RefSet> corpus;
    for (std::size_t i = 0; i < images; ++i) {
      RefSet set;
      const std::size_t nrefs = 1 + rng.index(3);
      for (std::size_t r = 0; r < nrefs; ++r)
        set.push_back(Caption::from_interior(random_ids(rng, 6, 4, 1)));
      corpus.push_back(set);
    }
    const auto idf = IdfTable::build(corpus);
    const auto seqs = as_seqs(corpus);
    for (std::size_t i = 0; i < images; ++i) {
      const auto cand = Caption::from_interior(random_ids(rng, 6, 4, 1));
      const double got = cider(cand, corpus[i], idf);
      const double want = oracle::cider(seq(cand), seqs[i], seqs);
      REQUIRE(std::abs(got - want) < 1e-9);
    }
  }
}

TEST_CASE("metric invariants on random inputs") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RefSet> corpus;
    for (int i = 0; i < 4; ++i) {
      RefSet set;
      const std::size_t nrefs = 1 + rng.index(4);
      for (std::size_t r = 0; r < nrefs; ++r)
        set.push_back(Caption::from_interior(random_ids(rng, 7, 5, 1)));
      corpus.push_back(set);
    }
    const auto idf = IdfTable::build(corpus);
    const auto cand = Caption::from_interior(random_ids(rng, 7, 5, 1));
    const auto& refs = corpus[0];
    const auto rep = score(cand, refs, idf);
    REQUIRE(rep.cider >= 0.0);
    for (double b : rep.bleu) REQUIRE((b >= 0.0 && b <= 1.0));
    REQUIRE((rep.rouge_l >= 0.0 && rep.rouge_l <= 1.0));

    // permutation of the reference list
    RefSet reversed(refs.rbegin(), refs.rend());
    REQUIRE(cider(cand, reversed, idf) == Approx(rep.cider).epsilon(1e-12).margin(1e-12));
    REQUIRE(bleu(cand, reversed) == rep.bleu);
    REQUIRE(rouge_l(cand, reversed) == rep.rouge_l);

    // duplicating every reference inside the image changes nothing
    RefSet doubled = refs;
    doubled.insert(doubled.end(), refs.begin(), refs.end());
    std::vector<RefSet> corpus2 = corpus;
    corpus2[0] = doubled;
    const auto idf2 = IdfTable::build(corpus2);
    REQUIRE(cider(cand, doubled, idf2) == Approx(rep.cider).epsilon(1e-12).margin(1e-12));
  }
}

TEST_CASE("bleu examples") {
  const RefSet refs = {cap({4, 5, 6})};
  const auto same = bleu(cap({4, 5, 6}), refs);
  for (double b : same) CHECK(b == Approx(1.0).epsilon(1e-15));

  const auto none = bleu(cap({7, 8}), refs);
  for (double b : none) CHECK(b == 0.0);

  // [the cat] vs [the cat sat]: p1 = 1, BP = exp(1 - 3/2)
  const auto short_cand = bleu(cap({4, 5}), refs);
  CHECK(short_cand[0] == Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(short_cand[0] == Approx(0.6065).margin(5e-5));
}

TEST_CASE("bleu smoothing for empty higher orders") {
  // p1 = 2/2, p2 = 0 of 1 bigram -> 1/(1+1); no trigram -> 1/(0+1)
  const RefSet refs = {cap({4, 9, 5})};
  const auto b = bleu(cap({4, 5}), refs);
  const double bp = std::exp(1.0 - 3.0 / 2.0);
  CHECK(b[0] == Approx(bp).epsilon(1e-12));
  CHECK(b[1] == Approx(bp * std::sqrt(0.5)).epsilon(1e-12));
  CHECK(b[2] == Approx(bp * std::cbrt(0.5)).epsilon(1e-12));
  CHECK(b[3] == Approx(bp * std::pow(0.5, 0.25)).epsilon(1e-12));
}

TEST_CASE("bleu clips counts and picks the closest reference length") {
  // candidate [a a a a] vs [a b c d]: clipped p1 = 1/4, no brevity penalty
  const RefSet refs = {cap({4, 5, 6, 7}), cap({4, 5, 6, 7, 8, 9, 10, 11, 12})};
  const auto b = bleu(cap({4, 4, 4, 4}), refs);
  CHECK(b[0] == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("rouge-l examples") {
  CHECK(rouge_l(cap({4, 5, 6}), RefSet{cap({4, 5, 6})}) == Approx(1.0).epsilon(1e-15));
  CHECK(rouge_l(cap({4, 5}), RefSet{cap({6, 7})}) == 0.0);
  CHECK(rouge_l(cap({4, 5}), RefSet{cap({4, 6})}) == Approx(0.5).epsilon(1e-12));
  // P = 1, R = 1/2, beta = 1.2
  const double beta2 = 1.44;
  const double f = (1 + beta2) * 1.0 * 0.5 / (0.5 + beta2 * 1.0);
  CHECK(rouge_l(cap({4}), RefSet{cap({4, 5})}) == Approx(f).epsilon(1e-12));
  // best reference wins
  CHECK(rouge_l(cap({4, 5}), RefSet{cap({6, 7}), cap({4, 5})}) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("metric report mean is arithmetic") {
  std::vector<MetricReport> reps(3);
  for (int i = 0; i < 3; ++i) {
    reps[i].bleu = {0.1 * i, 0.2 * i, 0.3 * i, 0.4 * i};
    reps[i].rouge_l = 0.5 * i;
    reps[i].cider = 1.0 * i;
  }
  const auto m = mean(reps);
  CHECK(m.bleu[3] == Approx(0.4).epsilon(1e-12));
  CHECK(m.rouge_l == Approx(0.5).epsilon(1e-12));
  CHECK(m.cider == Approx(1.0).epsilon(1e-12));
}
