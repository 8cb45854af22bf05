// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/rl.hpp"

#include <numeric>
#include <string>

#include "tcts/error.hpp"

namespace tcts::rl {

double scst_reward(double cider_sample, double cider_greedy) { return cider_sample - cider_greedy; }

TctsAdjustment tcts_adjustment(std::size_t n, std::size_t m, double cider_teacher) {
  if (n + m == 0) fail(ErrorCode::kDegenerateCaption, "caption without words");
  TctsAdjustment adj;
  adj.n = n;
  adj.m = m;
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  adj.eta = (nd - md) / (nd + md) * cider_teacher;
  adj.r_appr = cider_teacher - adj.eta;
  adj.r_inac = -cider_teacher - adj.eta;
  return adj;
}

double RewardVector::mean() const {
  if (rewards.empty()) return 0.0;
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
}

RewardVector tcts_reward_vector(const text::LcsPartition& partition, double scst,
                                const TctsAdjustment& adj, double lambda2) {
  if (partition.in_lcs.empty()) fail(ErrorCode::kDegenerateCaption, "empty partition");
  if (lambda2 < 0.0) fail(ErrorCode::kConfig, "lambda2 must be >= 0");
  RewardVector out;
  out.rewards.reserve(partition.in_lcs.size() + 1);
  for (bool appropriate : partition.in_lcs)
    out.rewards.push_back(scst + lambda2 * (appropriate ? adj.r_appr : adj.r_inac));
  out.rewards.push_back(scst);  // EOS: no teacher adjustment
  return out;
}

RewardVector scst_reward_vector(std::size_t tokens, double scst) {
  return RewardVector{std::vector<double>(tokens, scst)};
}

ad::NodeId pg_loss(ad::Tape& tape, std::span<const ad::NodeId> log_probs,
                   const RewardVector& rewards) {
  if (log_probs.empty() || log_probs.size() != rewards.rewards.size())
    fail(ErrorCode::kShapeMismatch, "pg_loss: " + std::to_string(log_probs.size()) +
                                        " log-probs for " +
                                        std::to_string(rewards.rewards.size()) + " rewards");
  ad::NodeId total = tape.scale(log_probs[0], -rewards.rewards[0]);
  for (std::size_t t = 1; t < log_probs.size(); ++t)
    total = tape.add(total, tape.scale(log_probs[t], -rewards.rewards[t]));
  return total;
}

}  // namespace tcts::rl
