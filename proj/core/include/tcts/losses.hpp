// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Teacher-forced objectives: hard-label cross-entropy, KL divergence to the
// teacher's per-step distributions, and their weighted sum.

#pragma once

#include <span>
#include <vector>

#include "tcts/autodiff.hpp"
#include "tcts/model.hpp"
#include "tcts/textcore.hpp"

namespace tcts::loss {

using ad::NodeId;
using ad::Tape;

/// Teacher distributions q_t, one 1 x K row per target position. Constants
/// with respect to the student.
struct SoftTargets {
  std::vector<ad::Tensor> rows;
};

/// -(1/T) sum_t log p_t[y_t] over the T = ids.size() - 1 target positions
/// (interior words and EOS).
NodeId xe_loss(Tape& tape, std::span<const NodeId> dists, const text::Caption& targets);

/// (1/T) sum_t KL(q_t || p_t).
NodeId kl_loss(Tape& tape, std::span<const NodeId> dists, const SoftTargets& targets);

NodeId combined_xe_tcts(Tape& tape, NodeId xe, NodeId kl, double lambda1);
double combined_xe_tcts(double xe, double kl, double lambda1);

/// Teacher-forced teacher pass over the ground-truth caption on a private
/// tape; row t depends only on the record and the prefix y_<t.
SoftTargets soft_targets_from_teacher(const model::ModelParams& teacher,
                                      const model::SceneInput& input,
                                      const text::Caption& gt_caption, double temperature = 1.0);

}  // namespace tcts::loss
