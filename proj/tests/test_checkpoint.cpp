// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>

#include "support.hpp"
#include "tcts/checkpoint.hpp"
#include "tcts/error.hpp"

using namespace tcts;
using namespace tcts::ckpt;

namespace {

Checkpoint sample_checkpoint(bool teacher) {
  Rng rng(teacher ? 2 : 1);
  Checkpoint c;
  c.mode = teacher ? "teacher" : "xe";
  c.config_hash = 0x0123456789abcdefull;
  c.lexicon_hash = 0xfedcba9876543210ull;
  c.min_count = 3;
  c.attr_vocab_size = 17;
  c.params = model::ModelParams::init(tcts::testing::tiny_config(teacher), rng);
  return c;
}

ErrorCode load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("checkpoint round-trip preserves every field") {
  for (bool teacher : {false, true}) {
    const auto c = sample_checkpoint(teacher);
    const auto bytes = serialize(c);
    REQUIRE(bytes.size() > 16);
    CHECK(std::memcmp(bytes.data(), kMagic, 8) == 0);
    const auto back = deserialize(bytes);
    CHECK(back.mode == c.mode);
    CHECK(back.config_hash == c.config_hash);
    CHECK(back.lexicon_hash == c.lexicon_hash);
    CHECK(back.min_count == 3);
    CHECK(back.attr_vocab_size == 17);
    CHECK(back.params == c.params);
    CHECK(serialize(back) == bytes);
  }
}

TEST_CASE("checkpoint payload is little-endian f64 after the header") {
  const auto c = sample_checkpoint(false);
  const auto bytes = serialize(c);
  std::uint64_t hlen = 0;
  for (int i = 7; i >= 0; --i) hlen = hlen << 8 | bytes[8 + i];
  const std::size_t payload = bytes.size() - 16 - hlen;
  CHECK(payload == 8 * c.params.tensors().num_scalars());
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 16 + hlen, 8);
  CHECK(first == c.params.tensors()[0][0]);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto bytes = serialize(sample_checkpoint(true));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(load_error(bad_magic) == ErrorCode::kIncompatibleCheckpoint);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(load_error(trailing) == ErrorCode::kIncompatibleCheckpoint);
  auto short_payload = bytes;
  short_payload.resize(bytes.size() - 8);
  CHECK(load_error(short_payload) == ErrorCode::kIncompatibleCheckpoint);
  CHECK(load_error({1, 2, 3}) == ErrorCode::kIncompatibleCheckpoint);
}

TEST_CASE("checkpoint files") {
  const auto dir = std::filesystem::temp_directory_path() / "tcts_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "a.ckpt").string();
  const auto c = sample_checkpoint(true);
  save(path, c);
  CHECK(load(path).params == c.params);
  try {
    load((dir / "missing.ckpt").string());
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("from_tensors validates names and shapes") {
  auto c = sample_checkpoint(false);
  ad::ParamSet wrong;
  wrong.add("word_embed", ad::Tensor(3, 3));
  CHECK_THROWS_AS(model::ModelParams::from_tensors(c.params.config(), wrong), Error);
}
