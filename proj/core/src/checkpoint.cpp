// Copyright (c) 2026, The tcts-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "tcts/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "tcts/error.hpp"

namespace tcts::ckpt {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::uint64_t unhex(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  const auto& cfg = ckpt.params.config();
  const auto& tensors = ckpt.params.tensors();
  nlohmann::ordered_json header;
  header["format"] = "tcts-checkpoint";
  header["version"] = kFormatVersion;
  header["mode"] = ckpt.mode;
  header["config_hash"] = hex(ckpt.config_hash);
  header["lexicon_hash"] = hex(ckpt.lexicon_hash);
  header["min_count"] = ckpt.min_count;
  header["attr_vocab_size"] = ckpt.attr_vocab_size;
  header["model"] = {{"hidden", cfg.hidden},
                     {"vocab_size", cfg.vocab_size},
                     {"num_objects", cfg.num_objects},
                     {"num_attributes", cfg.num_attributes},
                     {"max_len", cfg.max_len},
                     {"uses_attributes", cfg.uses_attributes}};
  auto list = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tensors.size(); ++i)
    list.push_back({{"name", tensors.name(i)}, {"shape", {tensors[i].rows(), tensors[i].cols()}}});
  header["tensors"] = list;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    for (double v : tensors[i].data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    fail(ErrorCode::kIncompatibleCheckpoint, "bad checkpoint magic");
  const std::uint64_t hlen = get_u64(bytes.data() + 8);
  if (hlen > bytes.size() - 16) fail(ErrorCode::kIncompatibleCheckpoint, "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(hlen));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIncompatibleCheckpoint, std::string("header: ") + e.what());
  }

  Checkpoint ckpt;
  model::ModelConfig cfg;
  ad::ParamSet tensors;
  try {
    if (header.at("format") != "tcts-checkpoint" || header.at("version") != kFormatVersion)
      fail(ErrorCode::kIncompatibleCheckpoint, "unsupported checkpoint format");
    ckpt.mode = header.at("mode").get<std::string>();
    ckpt.config_hash = unhex(header.at("config_hash").get<std::string>());
    ckpt.lexicon_hash = unhex(header.at("lexicon_hash").get<std::string>());
    ckpt.min_count = header.at("min_count").get<int>();
    ckpt.attr_vocab_size = header.at("attr_vocab_size").get<std::size_t>();
    const auto& m = header.at("model");
    cfg.hidden = m.at("hidden").get<std::size_t>();
    cfg.vocab_size = m.at("vocab_size").get<std::size_t>();
    cfg.num_objects = m.at("num_objects").get<std::size_t>();
    cfg.num_attributes = m.at("num_attributes").get<std::size_t>();
    cfg.max_len = m.at("max_len").get<std::size_t>();
    cfg.uses_attributes = m.at("uses_attributes").get<bool>();

    std::size_t offset = 16 + hlen;
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("shape").at(0).get<std::size_t>();
      const auto cols = t.at("shape").at(1).get<std::size_t>();
      if (offset + 8 * rows * cols > bytes.size())
        fail(ErrorCode::kIncompatibleCheckpoint, "payload shorter than the tensor list");
      std::vector<double> data(rows * cols);
      for (auto& v : data) {
        v = std::bit_cast<double>(get_u64(bytes.data() + offset));
        offset += 8;
      }
      tensors.add(t.at("name").get<std::string>(), ad::Tensor(rows, cols, std::move(data)));
    }
    if (offset != bytes.size()) fail(ErrorCode::kIncompatibleCheckpoint, "trailing payload bytes");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIncompatibleCheckpoint, std::string("header: ") + e.what());
  }
  ckpt.params = model::ModelParams::from_tensors(cfg, std::move(tensors));
  return ckpt;
}

void save(const std::string& path, const Checkpoint& ckpt) {
  const auto bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace tcts::ckpt
