// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/model.hpp"

#include <cmath>
#include <string>

#include "tcts/error.hpp"

namespace tcts::model {

using ad::Tensor;

namespace {

Tensor uniform(std::size_t rows, std::size_t cols, double bound, Rng* rng) {
  Tensor t(rows, cols);
  if (rng != nullptr)
    for (auto& v : t.data()) v = rng->uniform(-bound, bound);
  return t;
}

Tensor one_hot(std::size_t size, std::size_t index, double value = 1.0) {
  Tensor t(1, size);
  t[index] = value;
  return t;
}

bool is_emittable(std::size_t id, std::size_t step) {
  return id >= static_cast<std::size_t>(text::kNumSpecials) ||
         (id == static_cast<std::size_t>(text::kEos) && step > 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

ModelParams ModelParams::build(const ModelConfig& c, Rng* rng) {
  if (c.hidden == 0 || c.vocab_size <= static_cast<std::size_t>(text::kNumSpecials) ||
      c.num_objects == 0)
    fail(ErrorCode::kConfig, "model needs hidden > 0, at least one word and one object");
  if (c.uses_attributes && c.num_attributes == 0)
    fail(ErrorCode::kConfig, "teacher model needs a non-empty attribute vocabulary");

  const std::size_t d = c.hidden;
  const double sq = 1.0 / std::sqrt(static_cast<double>(d));
  const double sq2 = 1.0 / std::sqrt(static_cast<double>(2 * d));
  ModelParams p(c);
  auto& t = p.tensors_;
  t.add("word_embed", uniform(c.vocab_size, d, 0.5, rng));
  t.add("obj_embed", uniform(c.num_objects, d, 0.5, rng));
  t.add("scene_enc", uniform(d, d, sq, rng));
  for (const char* gate : {"z", "r", "n"}) {
    t.add(std::string("gru_w") + gate, uniform(2 * d, d, sq2, rng));
    t.add(std::string("gru_u") + gate, uniform(d, d, sq, rng));
    t.add(std::string("gru_b") + gate, Tensor(1, d));
  }
  t.add("att_vq", uniform(d, d, sq, rng));
  t.add("att_vk", uniform(d, d, sq, rng));
  if (c.uses_attributes) {
    t.add("attr_embed", uniform(c.num_attributes, d, 0.5, rng));
    t.add("attr_enc", uniform(d, d, sq, rng));
    t.add("att_aq", uniform(d, d, sq, rng));
    t.add("att_ak", uniform(d, d, sq, rng));
    t.add("w_v", uniform(2 * d, d, sq2, rng));
    t.add("w_a", uniform(2 * d, d, sq2, rng));
  }
  t.add("w_glu", uniform(2 * d, 2 * d, sq2, rng));
  t.add("w_p", uniform(d, c.vocab_size, sq, rng));
  t.add("b_p", Tensor(1, c.vocab_size));
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config, Rng& rng) { return build(config, &rng); }

ModelParams ModelParams::zeros(const ModelConfig& config) { return build(config, nullptr); }

ModelParams ModelParams::from_tensors(const ModelConfig& config, ad::ParamSet tensors) {
  ModelParams reference = zeros(config);
  const auto& want = reference.tensors_;
  if (want.size() != tensors.size())
    fail(ErrorCode::kIncompatibleCheckpoint, "parameter count does not match the model config");
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!tensors.contains(want.name(i)))
      fail(ErrorCode::kIncompatibleCheckpoint, "missing parameter " + want.name(i));
    const auto& got = tensors[tensors.index(want.name(i))];
    if (got.rows() != want[i].rows() || got.cols() != want[i].cols())
      fail(ErrorCode::kIncompatibleCheckpoint, "shape mismatch for " + want.name(i));
    if (!got.all_finite()) fail(ErrorCode::kNonFinite, "parameter " + want.name(i));
    reference.tensors_[i] = got;
  }
  return reference;
}

NodeId ModelParams::node(Tape& tape, const char* name) const {
  return tape.param(tensors_, tensors_.index(name));
}

ModelParams ModelParams::as_student_path() const {
  ModelParams copy = *this;
  copy.config_.uses_attributes = false;
  return copy;
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (!(config_ == other.config_) || tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_.name(i) != other.tensors_.name(i) || !(tensors_[i] == other.tensors_[i]))
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Encoders and attention

SceneInput make_input(const data::DatasetRecord& record, const data::Lexicon& lexicon) {
  SceneInput in;
  if (record.objects.empty())
    fail(ErrorCode::kDataContract, "record " + std::to_string(record.id) + " has no objects");
  for (const auto& obj : record.objects) {
    auto idx = lexicon.objects.find(obj);
    if (!idx) fail(ErrorCode::kDataContract, "object '" + obj + "' outside the object inventory");
    in.objects.push_back(*idx);
  }
  for (const auto& attr : record.attributes)
    if (auto idx = lexicon.attributes.find(attr)) in.attributes.push_back(*idx);
  return in;
}

NodeId encode_scene(Tape& tape, const ModelParams& params, std::span<const std::size_t> objects) {
  if (objects.empty()) fail(ErrorCode::kDataContract, "scene without objects");
  const NodeId emb = tape.gather_rows(params.node(tape, "obj_embed"),
                                      std::vector<std::size_t>(objects.begin(), objects.end()));
  return tape.matmul(emb, params.node(tape, "scene_enc"));
}

NodeId encode_attributes(Tape& tape, const ModelParams& params,
                         std::span<const std::size_t> attributes) {
  if (!params.uses_attributes())
    fail(ErrorCode::kModeViolation, "attribute encoder called on student parameters");
  if (attributes.empty()) fail(ErrorCode::kDataContract, "empty attribute set");
  const NodeId emb = tape.gather_rows(params.node(tape, "attr_embed"),
                                      std::vector<std::size_t>(attributes.begin(), attributes.end()));
  return tape.matmul(emb, params.node(tape, "attr_enc"));
}

NodeId attend(Tape& tape, NodeId query, NodeId features, NodeId query_proj, NodeId key_proj) {
  const double d = static_cast<double>(tape.value(features).cols());
  const NodeId q = tape.matmul(query, query_proj);
  const NodeId keys_t = tape.transpose(tape.matmul(features, key_proj));
  const NodeId scores = tape.scale(tape.matmul(q, keys_t), 1.0 / std::sqrt(d));
  return tape.matmul(tape.softmax(scores), features);
}

NodeId fuse(Tape& tape, const ModelParams& params, NodeId hidden, NodeId attended_visual,
            std::optional<NodeId> attended_attrs) {
  if (params.uses_attributes() != attended_attrs.has_value())
    fail(ErrorCode::kModeViolation, params.uses_attributes()
                                        ? "teacher fusion needs attended attributes"
                                        : "student fusion takes no attributes");
  if (!attended_attrs) return attended_visual;
  const NodeId alpha =
      tape.sigmoid(tape.matmul(tape.concat(hidden, attended_visual), params.node(tape, "w_v")));
  const NodeId beta =
      tape.sigmoid(tape.matmul(tape.concat(hidden, *attended_attrs), params.node(tape, "w_a")));
  return tape.add(tape.mul(alpha, attended_visual), tape.mul(beta, *attended_attrs));
}

Context build_context(Tape& tape, const ModelParams& params, const SceneInput& input) {
  Context ctx;
  ctx.features = encode_scene(tape, params, input.objects);
  const std::size_t n = input.objects.size();
  const NodeId avg = tape.constant(Tensor(1, n, 1.0 / static_cast<double>(n)));
  ctx.feature_mean = tape.matmul(avg, ctx.features);
  if (params.uses_attributes()) ctx.attributes = encode_attributes(tape, params, input.attributes);
  return ctx;
}

// ---------------------------------------------------------------------------
// Decoder

DecoderState initial_state(Tape& tape, const ModelParams& params) {
  return {tape.constant(Tensor(1, params.hidden())), 0};
}

StepOutput decode_step(Tape& tape, const ModelParams& params, const Context& ctx,
                       const DecoderState& state, TokenId prev_word) {
  if (prev_word < 0 || static_cast<std::size_t>(prev_word) >= params.config().vocab_size)
    fail(ErrorCode::kDataContract, "previous word id out of range");

  const NodeId embed = tape.gather_rows(params.node(tape, "word_embed"),
                                        {static_cast<std::size_t>(prev_word)});
  const NodeId x = tape.concat(embed, ctx.feature_mean);
  const NodeId h = state.hidden;

  auto gate_pre = [&](const char* w, const char* u) {
    return std::pair{tape.matmul(x, params.node(tape, w)), tape.matmul(h, params.node(tape, u))};
  };
  auto [xz, hz] = gate_pre("gru_wz", "gru_uz");
  const NodeId z = tape.sigmoid(tape.add(tape.add(xz, hz), params.node(tape, "gru_bz")));
  auto [xr, hr] = gate_pre("gru_wr", "gru_ur");
  const NodeId r = tape.sigmoid(tape.add(tape.add(xr, hr), params.node(tape, "gru_br")));
  auto [xn, hn] = gate_pre("gru_wn", "gru_un");
  const NodeId cand =
      tape.tanh(tape.add(tape.add(xn, tape.mul(r, hn)), params.node(tape, "gru_bn")));
  // h' = (1 - z) * cand + z * h
  const NodeId h_next = tape.add(cand, tape.mul(z, tape.add(h, tape.scale(cand, -1.0))));

  const NodeId v_hat =
      attend(tape, h_next, ctx.features, params.node(tape, "att_vq"), params.node(tape, "att_vk"));
  std::optional<NodeId> a_hat;
  if (params.uses_attributes()) {
    if (!ctx.attributes) fail(ErrorCode::kModeViolation, "teacher context lacks attributes");
    a_hat = attend(tape, h_next, *ctx.attributes, params.node(tape, "att_aq"),
                   params.node(tape, "att_ak"));
  }
  const NodeId fused = fuse(tape, params, h_next, v_hat, a_hat);
  const NodeId context =
      tape.glu(tape.matmul(tape.concat(h_next, fused), params.node(tape, "w_glu")));
  const NodeId logits =
      tape.add(tape.matmul(context, params.node(tape, "w_p")), params.node(tape, "b_p"));

  StepOutput out;
  out.logits = logits;
  out.probs = tape.softmax(logits);
  out.state = {h_next, state.step + 1};
  return out;
}

std::vector<NodeId> teacher_forced(Tape& tape, const ModelParams& params, const Context& ctx,
                                   const Caption& caption) {
  if (caption.ids.size() < 2) fail(ErrorCode::kDataContract, "caption without sentinels");
  std::vector<NodeId> probs;
  probs.reserve(caption.ids.size() - 1);
  DecoderState state = initial_state(tape, params);
  for (std::size_t t = 0; t + 1 < caption.ids.size(); ++t) {
    StepOutput step = decode_step(tape, params, ctx, state, caption.ids[t]);
    probs.push_back(step.probs);
    state = step.state;
  }
  return probs;
}

TokenId greedy_choice(std::span<const double> probs, std::size_t step) {
  std::size_t best = static_cast<std::size_t>(text::kNumSpecials);
  for (std::size_t i = best + 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  const auto eos = static_cast<std::size_t>(text::kEos);
  if (step > 0 && probs[eos] > probs[best]) best = eos;
  return static_cast<TokenId>(best);
}

Caption greedy_decode(const ModelParams& params, const SceneInput& input, std::size_t max_len) {
  Tape tape;
  const Context ctx = build_context(tape, params, input);
  DecoderState state = initial_state(tape, params);
  std::vector<TokenId> words;
  TokenId prev = text::kBos;
  bool truncated = true;
  for (std::size_t t = 0; t < max_len; ++t) {
    StepOutput step = decode_step(tape, params, ctx, state, prev);
    const TokenId next = greedy_choice(tape.value(step.probs).data(), t);
    if (next == text::kEos) {
      truncated = false;
      break;
    }
    words.push_back(next);
    prev = next;
    state = step.state;
  }
  Caption c = Caption::from_interior(words);
  c.truncated = truncated;
  return c;
}

Sample sample_decode(Tape& tape, const ModelParams& params, const SceneInput& input,
                     std::size_t max_len, Rng& rng) {
  const std::size_t vocab = params.config().vocab_size;
  const Context ctx = build_context(tape, params, input);
  DecoderState state = initial_state(tape, params);
  Sample out;
  std::vector<TokenId> words;
  TokenId prev = text::kBos;

  for (std::size_t t = 0;; ++t) {
    StepOutput step = decode_step(tape, params, ctx, state, prev);
    const auto probs = tape.value(step.probs).data();
    Tensor mask(1, vocab);
    for (std::size_t i = 0; i < vocab; ++i) mask[i] = is_emittable(i, t) ? 1.0 : 0.0;

    std::size_t next = static_cast<std::size_t>(text::kEos);
    if (t < max_len) {
      double mass = 0.0;
      for (std::size_t i = 0; i < vocab; ++i) mass += mask[i] * probs[i];
      const double target = rng.uniform() * mass;
      double acc = 0.0;
      std::size_t last = next;
      next = vocab;
      for (std::size_t i = 0; i < vocab; ++i) {
        if (mask[i] == 0.0) continue;
        last = i;
        acc += probs[i];
        if (target < acc) {
          next = i;
          break;
        }
      }
      if (next == vocab) next = last;  // rounding at the top of the range
    }

    // log p(w) - log sum_{allowed} p
    const NodeId picked = tape.sum(tape.mul(tape.log(step.probs), tape.constant(one_hot(vocab, next))));
    const NodeId mass = tape.log(tape.sum(tape.mul(step.probs, tape.constant(std::move(mask)))));
    const NodeId lp = tape.add(picked, tape.scale(mass, -1.0));
    out.log_prob_nodes.push_back(lp);
    out.log_probs.push_back(tape.value(lp)[0]);

    if (next == static_cast<std::size_t>(text::kEos)) {
      out.caption = Caption::from_interior(words);
      out.caption.truncated = t == max_len;
      return out;
    }
    words.push_back(static_cast<TokenId>(next));
    prev = static_cast<TokenId>(next);
    state = step.state;
  }
}

}  // namespace tcts::model
