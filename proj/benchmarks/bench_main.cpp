// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "tcts/metrics.hpp"
#include "tcts/model.hpp"
#include "tcts/random.hpp"
#include "tcts/textcore.hpp"

using namespace tcts;

namespace {

std::vector<text::TokenId> random_ids(Rng& rng, std::size_t len, std::size_t alphabet) {
  std::vector<text::TokenId> out(len);
  for (auto& id : out) id = text::kNumSpecials + static_cast<text::TokenId>(rng.index(alphabet));
  return out;
}

void BM_LcsPartition(benchmark::State& state) {
  Rng rng(1);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto a = text::Caption::from_interior(random_ids(rng, len, 12));
  const auto b = text::Caption::from_interior(random_ids(rng, len, 12));
  for (auto _ : state) benchmark::DoNotOptimize(text::lcs_partition(a, b));
}
BENCHMARK(BM_LcsPartition)->Arg(8)->Arg(16)->Arg(64);

void BM_Cider(benchmark::State& state) {
  Rng rng(2);
  std::vector<metrics::RefSet> corpus(200);
  for (auto& set : corpus)
    for (int r = 0; r < 5; ++r) set.push_back(text::Caption::from_interior(random_ids(rng, 10, 40)));
  const auto idf = metrics::IdfTable::build(corpus);
  const auto cand = text::Caption::from_interior(random_ids(rng, 10, 40));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::cider(cand, corpus[0], idf));
}
BENCHMARK(BM_Cider);

void BM_CiderScorer(benchmark::State& state) {
  Rng rng(2);
  std::vector<metrics::RefSet> corpus(200);
  for (auto& set : corpus)
    for (int r = 0; r < 5; ++r) set.push_back(text::Caption::from_interior(random_ids(rng, 10, 40)));
  const auto idf = metrics::IdfTable::build(corpus);
  const metrics::CiderScorer scorer(corpus[0], idf);
  const auto cand = text::Caption::from_interior(random_ids(rng, 10, 40));
  for (auto _ : state) benchmark::DoNotOptimize(scorer.score(cand));
}
BENCHMARK(BM_CiderScorer);

void BM_DecodeStep(benchmark::State& state) {
  const bool teacher = state.range(0) != 0;
  Rng rng(3);
  const model::ModelConfig cfg{.hidden = 64,
                               .vocab_size = 60,
                               .num_objects = 12,
                               .num_attributes = teacher ? std::size_t{50} : std::size_t{0},
                               .max_len = 16,
                               .uses_attributes = teacher};
  const auto params = model::ModelParams::init(cfg, rng);
  model::SceneInput in;
  in.objects = {0, 4, 7};
  if (teacher) in.attributes = {1, 5, 9, 13, 20};
  for (auto _ : state) {
    ad::Tape tape;
    const auto ctx = model::build_context(tape, params, in);
    auto st = model::initial_state(tape, params);
    benchmark::DoNotOptimize(model::decode_step(tape, params, ctx, st, text::kBos).probs);
  }
}
BENCHMARK(BM_DecodeStep)->Arg(0)->Arg(1);

void BM_GreedyDecode(benchmark::State& state) {
  Rng rng(4);
  const model::ModelConfig cfg{.hidden = 64, .vocab_size = 60, .num_objects = 12, .max_len = 16};
  const auto params = model::ModelParams::init(cfg, rng);
  model::SceneInput in;
  in.objects = {0, 4, 7};
  for (auto _ : state) benchmark::DoNotOptimize(model::greedy_decode(params, in, 16));
}
BENCHMARK(BM_GreedyDecode);

}  // namespace

BENCHMARK_MAIN();
