// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint layout (all integers little-endian):
//
//   bytes 0..7    magic "TCTSCKPT"
//   bytes 8..15   u64 header length H
//   next H bytes  UTF-8 JSON header: format version, mode, model config,
//                 lexicon settings and hash, config hash, and the ordered
//                 tensor list [{"name", "shape": [rows, cols]}]
//   remainder     f64 payload, each tensor row-major in header order
//
// The payload length must equal 8 * sum(rows * cols) exactly.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcts/model.hpp"

namespace tcts::ckpt {

inline constexpr char kMagic[8] = {'T', 'C', 'T', 'S', 'C', 'K', 'P', 'T'};
inline constexpr int kFormatVersion = 1;

struct Checkpoint {
  std::string mode;  // teacher | xe | tcts-xe | scst | tcts-rl
  std::uint64_t config_hash = 0;
  std::uint64_t lexicon_hash = 0;
  int min_count = 5;
  std::size_t attr_vocab_size = 50;
  model::ModelParams params = model::ModelParams::zeros(
      {.hidden = 1, .vocab_size = 5, .num_objects = 1, .num_attributes = 0});
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

void save(const std::string& path, const Checkpoint& ckpt);
Checkpoint load(const std::string& path);

}  // namespace tcts::ckpt
