// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reward shaping for the reinforcement stage. The self-critical reward is
// the CIDEr gap between a sampled and the greedy caption. The teacher-
// critical adjustment splits the sampled words by their LCS with the
// teacher caption and moves reward from inaccurate to appropriate words
// without changing the per-caption total.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcts/autodiff.hpp"
#include "tcts/textcore.hpp"

namespace tcts::rl {

double scst_reward(double cider_sample, double cider_greedy);

struct TctsAdjustment {
  double eta = 0.0;
  double r_appr = 0.0;
  double r_inac = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

/// eta = (n - m) / (n + m) * C, r_appr = C - eta, r_inac = -C - eta.
/// Throws kDegenerateCaption when n + m == 0.
TctsAdjustment tcts_adjustment(std::size_t n, std::size_t m, double cider_teacher);

/// One reward per emitted token of the sampled caption: T words plus the
/// EOS slot. Words get scst + lambda2 * (r_appr or r_inac); EOS gets scst.
struct RewardVector {
  std::vector<double> rewards;

  double mean() const;
};

RewardVector tcts_reward_vector(const text::LcsPartition& partition, double scst,
                                const TctsAdjustment& adj, double lambda2);

/// Constant-reward vector of length `tokens` (plain self-critical training).
RewardVector scst_reward_vector(std::size_t tokens, double scst);

/// -sum_t rewards[t] * log_probs[t]; rewards enter as constants.
ad::NodeId pg_loss(ad::Tape& tape, std::span<const ad::NodeId> log_probs,
                   const RewardVector& rewards);

}  // namespace tcts::rl
