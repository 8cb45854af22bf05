// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small fixtures shared by the unit tests.

#pragma once

#include <initializer_list>
#include <vector>

#include "tcts/model.hpp"
#include "tcts/random.hpp"
#include "tcts/textcore.hpp"

namespace tcts::testing {

inline text::Caption cap(std::initializer_list<text::TokenId> interior) {
  const std::vector<text::TokenId> ids(interior);
  return text::Caption::from_interior(ids);
}

inline std::vector<text::TokenId> random_ids(Rng& rng, std::size_t max_len, std::size_t alphabet,
                                             std::size_t min_len = 0) {
  const std::size_t len = min_len + rng.index(max_len - min_len + 1);
  std::vector<text::TokenId> out(len);
  for (auto& id : out) id = text::kNumSpecials + static_cast<text::TokenId>(rng.index(alphabet));
  return out;
}

inline model::ModelConfig tiny_config(bool teacher, std::size_t hidden = 8,
                                      std::size_t vocab = 20) {
  return {.hidden = hidden,
          .vocab_size = vocab,
          .num_objects = 5,
          .num_attributes = teacher ? std::size_t{6} : std::size_t{0},
          .max_len = 8,
          .uses_attributes = teacher};
}

inline model::SceneInput tiny_input(bool teacher) {
  model::SceneInput in;
  in.objects = {0, 3, 1};
  if (teacher) in.attributes = {2, 5, 0, 4};
  return in;
}

}  // namespace tcts::testing
