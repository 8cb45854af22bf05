// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcts/error.hpp"

namespace tcts::loss {

using ad::Tensor;

namespace {

NodeId mean_of(Tape& tape, std::span<const NodeId> terms) {
  NodeId total = terms.front();
  for (std::size_t t = 1; t < terms.size(); ++t) total = tape.add(total, terms[t]);
  return tape.scale(total, 1.0 / static_cast<double>(terms.size()));
}

}  // namespace

NodeId xe_loss(Tape& tape, std::span<const NodeId> dists, const text::Caption& targets) {
  if (targets.ids.size() < 2 || dists.size() != targets.ids.size() - 1)
    fail(ErrorCode::kShapeMismatch, "xe_loss: " + std::to_string(dists.size()) +
                                        " distributions for " +
                                        std::to_string(targets.ids.size()) + " caption ids");
  std::vector<NodeId> terms;
  terms.reserve(dists.size());
  for (std::size_t t = 0; t < dists.size(); ++t) {
    const Tensor& p = tape.value(dists[t]);
    const auto y = static_cast<std::size_t>(targets.ids[t + 1]);
    if (p.rows() != 1 || y >= p.cols()) fail(ErrorCode::kShapeMismatch, "xe_loss target id");
    Tensor delta(1, p.cols());
    delta[y] = -1.0;
    terms.push_back(tape.sum(tape.mul(tape.log(dists[t]), tape.constant(std::move(delta)))));
  }
  return mean_of(tape, terms);
}

NodeId kl_loss(Tape& tape, std::span<const NodeId> dists, const SoftTargets& targets) {
  if (dists.empty() || dists.size() != targets.rows.size())
    fail(ErrorCode::kShapeMismatch, "kl_loss: " + std::to_string(dists.size()) +
                                        " distributions for " +
                                        std::to_string(targets.rows.size()) + " soft targets");
  std::vector<NodeId> terms;
  terms.reserve(dists.size());
  for (std::size_t t = 0; t < dists.size(); ++t) {
    const Tensor& q = targets.rows[t];
    const Tensor& p = tape.value(dists[t]);
    if (q.rows() != p.rows() || q.cols() != p.cols())
      fail(ErrorCode::kShapeMismatch, "kl_loss row shape");
    // sum_i q log q is constant for the student; the cross term carries the gradient.
    double neg_entropy = 0.0;
    Tensor neg_q = q;
    for (std::size_t i = 0; i < q.size(); ++i) {
      neg_entropy += q[i] * std::log(std::max(q[i], ad::kLogFloor));
      neg_q[i] = -q[i];
    }
    const NodeId cross = tape.sum(tape.mul(tape.log(dists[t]), tape.constant(std::move(neg_q))));
    terms.push_back(tape.add(cross, tape.constant(Tensor::scalar(neg_entropy))));
  }
  return mean_of(tape, terms);
}

NodeId combined_xe_tcts(Tape& tape, NodeId xe, NodeId kl, double lambda1) {
  if (lambda1 < 0.0) fail(ErrorCode::kConfig, "lambda1 must be >= 0");
  return tape.add(xe, tape.scale(kl, lambda1));
}

double combined_xe_tcts(double xe, double kl, double lambda1) {
  if (lambda1 < 0.0) fail(ErrorCode::kConfig, "lambda1 must be >= 0");
  return xe + lambda1 * kl;
}

SoftTargets soft_targets_from_teacher(const model::ModelParams& teacher,
                                      const model::SceneInput& input,
                                      const text::Caption& gt_caption, double temperature) {
  if (!teacher.uses_attributes())
    fail(ErrorCode::kModeViolation, "soft targets need an attribute-mode teacher");
  if (temperature <= 0.0) fail(ErrorCode::kConfig, "temperature must be > 0");
  Tape tape;
  const auto ctx = model::build_context(tape, teacher, input);
  SoftTargets out;
  model::DecoderState state = model::initial_state(tape, teacher);
  for (std::size_t t = 0; t + 1 < gt_caption.ids.size(); ++t) {
    const auto step = model::decode_step(tape, teacher, ctx, state, gt_caption.ids[t]);
    const NodeId q = temperature == 1.0 ? step.probs
                                        : tape.softmax(tape.scale(step.logits, 1.0 / temperature));
    out.rows.push_back(tape.value(q));
    state = step.state;
  }
  return out;
}

}  // namespace tcts::loss
