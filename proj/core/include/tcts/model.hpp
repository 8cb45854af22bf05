// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Attention encoder-decoder shared by the student and the attribute-
// privileged teacher. Per step:
//
//   h_t   = GRU([embed(w_{t-1}); mean(V)], h_{t-1})
//   v_t   = attend(h_t, V)                 a_t = attend(h_t, A)   (teacher)
//   alpha = sigmoid([h_t; v_t] W_v)        beta = sigmoid([h_t; a_t] W_a)
//   f_t   = alpha * v_t + beta * a_t       (student: f_t = v_t)
//   c_t   = GLU([h_t; f_t] W_glu)
//   p_t   = softmax(c_t W_p + b_p)

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tcts/autodiff.hpp"
#include "tcts/dataset.hpp"
#include "tcts/random.hpp"
#include "tcts/textcore.hpp"

namespace tcts::model {

using ad::NodeId;
using ad::Tape;
using text::Caption;
using text::TokenId;

struct ModelConfig {
  std::size_t hidden = 64;
  std::size_t vocab_size = 0;
  std::size_t num_objects = 0;
  std::size_t num_attributes = 0;
  std::size_t max_len = 16;
  bool uses_attributes = false;

  bool operator==(const ModelConfig&) const = default;
};

/// Trainable weights. Student parameter sets contain no attribute-stream or
/// fusion-gate tensors at all.
class ModelParams {
 public:
  static ModelParams init(const ModelConfig& config, Rng& rng);
  static ModelParams zeros(const ModelConfig& config);
  static ModelParams from_tensors(const ModelConfig& config, ad::ParamSet tensors);

  const ModelConfig& config() const { return config_; }
  bool uses_attributes() const { return config_.uses_attributes; }
  std::size_t hidden() const { return config_.hidden; }

  ad::ParamSet& tensors() { return tensors_; }
  const ad::ParamSet& tensors() const { return tensors_; }
  NodeId node(Tape& tape, const char* name) const;
  bool has(const char* name) const { return tensors_.contains(name); }

  /// Same weights under the student equations: attribute inputs and the
  /// fusion gates are ignored. Used for the code-path equivalence check.
  ModelParams as_student_path() const;

  bool operator==(const ModelParams& other) const;

 private:
  explicit ModelParams(ModelConfig config) : config_(config) {}
  static ModelParams build(const ModelConfig& config, Rng* rng);

  ModelConfig config_;
  ad::ParamSet tensors_;
};

/// Ids the model consumes for one record.
struct SceneInput {
  std::vector<std::size_t> objects;
  std::vector<std::size_t> attributes;
};

/// Throws kDataContract for objects outside the inventory. Attributes
/// outside the attribute vocabulary are dropped.
SceneInput make_input(const data::DatasetRecord& record, const data::Lexicon& lexicon);

/// N x d: one encoded vector per object.
NodeId encode_scene(Tape& tape, const ModelParams& params, std::span<const std::size_t> objects);
/// A x d; throws kModeViolation on student params.
NodeId encode_attributes(Tape& tape, const ModelParams& params,
                         std::span<const std::size_t> attributes);

/// Scaled dot-product attention of a 1 x d query over the rows of an
/// N x d feature matrix.
NodeId attend(Tape& tape, NodeId query, NodeId features, NodeId query_proj, NodeId key_proj);

/// Gated fusion. With `attended_attrs` absent the student bypass returns
/// `attended_visual`; a mismatch between mode and arguments throws
/// kModeViolation.
NodeId fuse(Tape& tape, const ModelParams& params, NodeId hidden, NodeId attended_visual,
            std::optional<NodeId> attended_attrs);

/// Per-record encoder outputs reused by every decoding step.
struct Context {
  NodeId features = 0;
  NodeId feature_mean = 0;
  std::optional<NodeId> attributes;
};

Context build_context(Tape& tape, const ModelParams& params, const SceneInput& input);

struct DecoderState {
  NodeId hidden = 0;
  std::size_t step = 0;
};

DecoderState initial_state(Tape& tape, const ModelParams& params);

struct StepOutput {
  NodeId logits = 0;
  NodeId probs = 0;
  DecoderState state;
};

StepOutput decode_step(Tape& tape, const ModelParams& params, const Context& ctx,
                       const DecoderState& state, TokenId prev_word);

/// Probability nodes for every target position of a teacher-forced pass:
/// inputs BOS w1..wT, targets w1..wT EOS, so T + 1 rows.
std::vector<NodeId> teacher_forced(Tape& tape, const ModelParams& params, const Context& ctx,
                                   const Caption& caption);

/// Index of the token emitted under greedy decoding: the most probable
/// word (lowest id on ties), replaced by EOS only when EOS is strictly more
/// probable and at least one word has been emitted.
TokenId greedy_choice(std::span<const double> probs, std::size_t step);

Caption greedy_decode(const ModelParams& params, const SceneInput& input, std::size_t max_len);

struct Sample {
  Caption caption;
  std::vector<NodeId> log_prob_nodes;  // one 1 x 1 node per emitted token, EOS included
  std::vector<double> log_probs;
};

/// Multinomial sampling over words and EOS (EOS masked at the first step);
/// log-probabilities are those of the renormalized sampling distribution.
/// When max_len words are emitted without EOS, EOS is forced and scored.
Sample sample_decode(Tape& tape, const ModelParams& params, const SceneInput& input,
                     std::size_t max_len, Rng& rng);

}  // namespace tcts::model
