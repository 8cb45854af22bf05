// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "tcts/error.hpp"
#include "tcts/losses.hpp"
#include "tcts/model.hpp"

using namespace tcts;
using namespace tcts::model;
using ad::Tape;
using ad::Tensor;
using Catch::Approx;
using tcts::testing::tiny_config;
using tcts::testing::tiny_input;

namespace {

void zero(ModelParams& p, const char* name) {
  auto& t = p.tensors()[p.tensors().index(name)];
  std::fill(t.data().begin(), t.data().end(), 0.0);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("student parameters carry no attribute weights") {
  Rng rng(1);
  const auto student = ModelParams::init(tiny_config(false), rng);
  for (const char* name : {"attr_embed", "attr_enc", "att_aq", "att_ak", "w_v", "w_a"})
    CHECK_FALSE(student.has(name));
  const auto teacher = ModelParams::init(tiny_config(true), rng);
  for (const char* name : {"attr_embed", "attr_enc", "att_aq", "att_ak", "w_v", "w_a", "w_glu", "w_p"})
    CHECK(teacher.has(name));
  const auto& wv = teacher.tensors()[teacher.tensors().index("w_v")];
  CHECK(wv.rows() == 16);
  CHECK(wv.cols() == 8);
  const auto& wglu = teacher.tensors()[teacher.tensors().index("w_glu")];
  CHECK(wglu.rows() == 16);
  CHECK(wglu.cols() == 16);
}

TEST_CASE("scene encoder shapes and determinism") {
  Rng rng(2);
  auto p = ModelParams::init(tiny_config(false), rng);
  Tape t;
  const std::vector<std::size_t> objs = {0, 2, 4};
  const auto f = encode_scene(t, p, objs);
  CHECK(t.value(f).rows() == 3);
  CHECK(t.value(f).cols() == 8);
  const auto again = encode_scene(t, p, objs);
  CHECK(t.value(again) == t.value(f));

  zero(p, "scene_enc");
  Tape u;
  for (double v : u.value(encode_scene(u, p, objs)).data()) CHECK(v == 0.0);
  CHECK(code_of([&] { Tape w; encode_scene(w, p, std::vector<std::size_t>{}); }) ==
        ErrorCode::kDataContract);
}

TEST_CASE("attribute encoder") {
  Rng rng(3);
  const auto teacher = ModelParams::init(tiny_config(true), rng);
  Tape t;
  const std::vector<std::size_t> ab = {1, 4}, ba = {4, 1};
  const auto& x = t.value(encode_attributes(t, teacher, ab));
  const auto& y = t.value(encode_attributes(t, teacher, ba));
  CHECK(x.rows() == 2);
  CHECK(x.row_view(0)[0] == y.row_view(1)[0]);
  CHECK(std::equal(x.row_view(1).begin(), x.row_view(1).end(), y.row_view(0).begin()));

  const auto student = ModelParams::init(tiny_config(false), rng);
  CHECK(code_of([&] { Tape u; encode_attributes(u, student, ab); }) == ErrorCode::kModeViolation);
}

TEST_CASE("attention examples") {
  Rng rng(4);
  Tape t;
  auto rnd = [&](std::size_t r, std::size_t c) {
    Tensor x(r, c);
    for (auto& v : x.data()) v = rng.uniform(-1, 1);
    return t.constant(x);
  };
  const auto q = rnd(1, 4);
  const auto wq = rnd(4, 4), wk = rnd(4, 4);

  const auto single = rnd(1, 4);
  const auto attended = attend(t, q, single, wq, wk);
  CHECK(t.value(attended) == t.value(single));

  Tensor same(3, 4);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) same(r, c) = 0.25 * static_cast<double>(c) - 0.3;
  const auto out = t.value(attend(t, q, t.constant(same), wq, wk));
  for (std::size_t c = 0; c < 4; ++c) CHECK(out[c] == Approx(same(0, c)).epsilon(1e-14));

  const auto feats = rnd(3, 4);
  const auto zq = t.constant(Tensor(4, 4));
  const auto mean = t.value(attend(t, q, feats, zq, wk));
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& f = t.value(feats);
    CHECK(mean[c] == Approx((f(0, c) + f(1, c) + f(2, c)) / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("fusion gates") {
  Rng rng(5);
  auto teacher = ModelParams::init(tiny_config(true), rng);
  Tape t;
  auto rnd = [&] {
    Tensor x(1, 8);
    for (auto& v : x.data()) v = rng.uniform(-1, 1);
    return t.constant(x);
  };
  const auto h = rnd(), v = rnd(), a = rnd();

  // per-element gates in (0, 1): f / v recovers alpha when a = 0
  const auto zero_a = t.constant(Tensor(1, 8));
  const auto gated = t.value(fuse(t, teacher, h, v, zero_a));
  for (std::size_t i = 0; i < 8; ++i) {
    const double alpha = gated[i] / t.value(v)[i];
    CHECK(alpha > 0.0);
    CHECK(alpha < 1.0);
  }

  zero(teacher, "w_v");
  zero(teacher, "w_a");
  const auto half = t.value(fuse(t, teacher, h, v, a));
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(half[i] == Approx(0.5 * (t.value(v)[i] + t.value(a)[i])).epsilon(1e-15));

  Rng rng2(6);
  const auto teacher2 = ModelParams::init(tiny_config(true), rng2);
  Tape t2;
  const auto fv = t2.value(fuse(t2, teacher2, t2.constant(t.value(h)), t2.constant(t.value(v)),
                                t2.constant(t.value(v))));
  Tape g;
  const auto hh = g.constant(t.value(h)), vv = g.constant(t.value(v));
  const auto alpha = g.sigmoid(g.matmul(g.concat(hh, vv), teacher2.node(g, "w_v")));
  const auto beta = g.sigmoid(g.matmul(g.concat(hh, vv), teacher2.node(g, "w_a")));
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(fv[i] == Approx((g.value(alpha)[i] + g.value(beta)[i]) * t.value(v)[i]).epsilon(1e-14));

  const auto student = ModelParams::init(tiny_config(false), rng);
  Tape t3;
  const auto sv = t3.constant(t.value(v));
  CHECK(t3.value(fuse(t3, student, t3.constant(t.value(h)), sv, std::nullopt)) == t.value(v));
  CHECK(code_of([&] { fuse(t3, student, sv, sv, sv); }) == ErrorCode::kModeViolation);
  CHECK(code_of([&] { fuse(t, teacher, h, v, std::nullopt); }) == ErrorCode::kModeViolation);
}

TEST_CASE("decode step distribution") {
  for (bool teacher : {false, true}) {
    const auto zeros = ModelParams::zeros(tiny_config(teacher));
    Tape t;
    const auto ctx = build_context(t, zeros, tiny_input(teacher));
    auto step = decode_step(t, zeros, ctx, initial_state(t, zeros), text::kBos);
    for (double p : t.value(step.probs).data()) CHECK(p == Approx(1.0 / 20.0).epsilon(1e-15));
    CHECK(step.state.step == 1);

    Rng rng(7);
    const auto params = ModelParams::init(tiny_config(teacher), rng);
    Tape u;
    DecoderState s = initial_state(u, params);
    const auto c = build_context(u, params, tiny_input(teacher));
    for (text::TokenId w : {text::kBos, 5, 9, 4}) {
      auto a = decode_step(u, params, c, s, w);
      auto b = decode_step(u, params, c, s, w);
      CHECK(u.value(a.probs) == u.value(b.probs));
      double sum = 0.0;
      for (double p : u.value(a.probs).data()) {
        CHECK(p > 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      s = a.state;
    }
  }
}

TEST_CASE("teacher with uses_attributes off is the student path") {
  Rng rng(8);
  const auto teacher = ModelParams::init(tiny_config(true), rng);
  const auto as_student = teacher.as_student_path();
  // Student params built from the shared tensors only.
  ad::ParamSet shared;
  for (std::size_t i = 0; i < teacher.tensors().size(); ++i) {
    const auto& name = teacher.tensors().name(i);
    if (name == "attr_embed" || name == "attr_enc" || name == "att_aq" || name == "att_ak" ||
        name == "w_v" || name == "w_a")
      continue;
    shared.add(name, teacher.tensors()[i]);
  }
  const auto student = ModelParams::from_tensors(tiny_config(false), shared);
  const auto in = tiny_input(false);
  CHECK(greedy_decode(as_student, in, 8) == greedy_decode(student, in, 8));
  Tape a, b;
  const auto pa = teacher_forced(a, as_student, build_context(a, as_student, in),
                                 tcts::testing::cap({5, 6, 7}));
  const auto pb = teacher_forced(b, student, build_context(b, student, in),
                                 tcts::testing::cap({5, 6, 7}));
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(a.value(pa[i]) == b.value(pb[i]));
}

TEST_CASE("greedy decoding") {
  const auto zeros = ModelParams::zeros(tiny_config(false));
  const auto c = greedy_decode(zeros, tiny_input(false), 6);
  CHECK(c.ids == std::vector<text::TokenId>{text::kBos, 4, 4, 4, 4, 4, 4, text::kEos});
  CHECK(c.truncated);
  CHECK_NOTHROW(text::validate(c, 6));

  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = ModelParams::init(tiny_config(trial % 2 == 0), rng);
    const auto in = tiny_input(trial % 2 == 0);
    const auto a = greedy_decode(p, in, 8);
    CHECK(a == greedy_decode(p, in, 8));
    CHECK_NOTHROW(text::validate(a, 8));
  }
}

TEST_CASE("greedy choice tie and EOS rules") {
  std::vector<double> probs(8, 0.1);
  CHECK(greedy_choice(probs, 0) == 4);
  probs[text::kEos] = 0.5;
  CHECK(greedy_choice(probs, 0) == 4);
  CHECK(greedy_choice(probs, 1) == text::kEos);
  probs[6] = 0.5;
  CHECK(greedy_choice(probs, 1) == 6);
}

TEST_CASE("sampling") {
  Rng init(10);
  const auto p = ModelParams::init(tiny_config(true), init);
  const auto in = tiny_input(true);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Tape t1, t2;
    Rng r1(seed), r2(seed);
    const auto a = sample_decode(t1, p, in, 8, r1);
    const auto b = sample_decode(t2, p, in, 8, r2);
    CHECK(a.caption == b.caption);
    CHECK(a.log_probs == b.log_probs);
    CHECK_NOTHROW(text::validate(a.caption, 8));
    CHECK(a.log_probs.size() == a.caption.length() + 1);
    for (double lp : a.log_probs) CHECK(lp <= 0.0);
  }
}

TEST_CASE("sampling a peaked model reproduces greedy") {
  Rng init(11);
  auto p = ModelParams::init(tiny_config(false), init);
  // A dominant output bias makes every step effectively one-hot.
  auto& bp = p.tensors()[p.tensors().index("b_p")];
  bp[7] = 60.0;
  const auto in = tiny_input(false);
  const auto greedy = greedy_decode(p, in, 8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Tape t;
    Rng r(seed);
    CHECK(sample_decode(t, p, in, 8, r).caption.ids == greedy.ids);
  }
}

TEST_CASE("forced EOS at max_len is scored") {
  const auto zeros = ModelParams::zeros(tiny_config(false));
  Tape t;
  Rng r(1);
  const auto s = sample_decode(t, zeros, tiny_input(false), 3, r);
  // uniform over 16 words + EOS after step 0; EOS masked at step 0
  CHECK(s.log_probs.size() == s.caption.length() + 1);
  CHECK(s.log_probs[0] == Approx(-std::log(16.0)).epsilon(1e-12));
  if (s.caption.truncated) CHECK(s.log_probs.back() == Approx(-std::log(17.0)).epsilon(1e-12));
}

TEST_CASE("end-to-end cross-entropy gradient matches finite differences") {
  for (bool teacher : {false, true}) {
    Rng rng(12);
    auto p = ModelParams::init(tiny_config(teacher), rng);
    const auto in = tiny_input(teacher);
    const auto gt = tcts::testing::cap({5, 9, 7, 11});
    const auto res = ad::grad_check(
        [&](Tape& t, const ad::ParamSet&) {
          const auto dists = teacher_forced(t, p, build_context(t, p, in), gt);
          return loss::xe_loss(t, dists, gt);
        },
        p.tensors(), 1e-5, 200);
    CHECK(res.coordinates == 200);
    CHECK(res.max_relative_error < 1e-4);
  }
}
