/*
 * Copyright 2026 The CombNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cstdio>
#include <functional>
#include <filesystem>
#include <random>

#include <zlib.h>

#include "combnet/config.hpp"
#include "combnet/error.hpp"
#include "combnet/weights.hpp"

using namespace combnet;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("combnet_test_" + name)).string();
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void reseal(std::vector<std::uint8_t>& b) {
  const uLong crc = crc32(0L, b.data(), static_cast<uInt>(b.size() - 4));
  put_u32(b, b.size() - 4, static_cast<std::uint32_t>(crc));
}

}  // namespace

TEST_CASE("serialization roundtrip is bit exact for a random store") {
  std::mt19937_64 rng(1);
  WeightStore ws;
  for (int k = 0; k < 12; ++k) {
    std::vector<std::uint32_t> dims;
    std::size_t n = 1;
    for (int d = 0; d < 1 + k % 4; ++d) {
      dims.push_back(1 + static_cast<std::uint32_t>(rng() % 5));
      n *= dims.back();
    }
    std::vector<float> data(n);
    for (float& v : data) v = std::uniform_real_distribution<float>(-5, 5)(rng);
    ws.set("layer" + std::to_string(k) + ".weight", dims, data);
  }
  const auto bytes = serialize_weights(ws);
  CHECK(parse_weights(bytes) == ws);
  CHECK(serialize_weights(parse_weights(bytes)) == bytes);
  const std::string path = temp_path("roundtrip.cnwb");
  save_weights(ws, path);
  CHECK(load_weights(path) == ws);
  std::filesystem::remove(path);
}

TEST_CASE("header layout and trailing CRC") {
  WeightStore ws;
  ws.set("a", {2}, {1.0f, -2.0f});
  const auto b = serialize_weights(ws);
  CHECK(std::string(b.begin(), b.begin() + 4) == "CNWB");
  CHECK(b[4] == 1);
  CHECK(b[8] == 1);
  // 4 magic + 4 version + 4 count + 2 len + 1 name + 1 dtype + 1 ndim + 4 dim + 8 data + 4 crc
  CHECK(b.size() == 33);
  const uLong crc = crc32(0L, b.data(), static_cast<uInt>(b.size() - 4));
  const std::uint32_t stored = b[29] | (b[30] << 8) | (b[31] << 16) | (static_cast<std::uint32_t>(b[32]) << 24);
  CHECK(stored == static_cast<std::uint32_t>(crc));
}

TEST_CASE("loader reports distinct error codes") {
  WeightStore ws;
  ws.set("x.weight", {2, 2}, {1, 2, 3, 4});
  const auto good = serialize_weights(ws);

  auto bad = good;
  bad[bad.size() - 6] ^= 0x40;
  CHECK(code_of([&] { parse_weights(bad); }) == ErrorCode::Checksum);

  bad = good;
  bad[0] = 'X';
  CHECK(code_of([&] { parse_weights(bad); }) == ErrorCode::BadMagic);

  bad = good;
  put_u32(bad, 4, 2);
  reseal(bad);
  CHECK(code_of([&] { parse_weights(bad); }) == ErrorCode::BadVersion);

  bad = good;
  put_u32(bad, 8, 5);  // claims more layers than present
  reseal(bad);
  CHECK(code_of([&] { parse_weights(bad); }) == ErrorCode::Format);

  bad = std::vector<std::uint8_t>(good.begin(), good.begin() + 6);
  CHECK(code_of([&] { parse_weights(bad); }) == ErrorCode::Format);

  CHECK(code_of([&] { load_weights(temp_path("does_not_exist.cnwb")); }) ==
        ErrorCode::MissingInput);
}

TEST_CASE("check_weights catches shape mismatches and missing arrays") {
  const GraphSpec g = build_graph(NetConfig{});
  WeightStore ws = init_weights(g, 1);
  WeightStore missing;
  CHECK(code_of([&] { check_weights(g, missing); }) == ErrorCode::MissingWeights);
  ws.set("tier1.conv.weight", {16, 1, 3, 1}, std::vector<float>(48));
  CHECK(code_of([&] { check_weights(g, ws); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("reference weight file stays under 300 KB") {
  const GraphSpec g = build_graph(NetConfig{});
  const auto bytes = serialize_weights(init_weights(g, 1));
  CHECK(bytes.size() <= 300u * 1000u);
}

TEST_CASE("config text roundtrips and hashes stably") {
  const NetConfig d;
  const std::string text = config_to_text(d);
  const NetConfig back = parse_config(text);
  CHECK(config_to_text(back) == text);
  CHECK(config_hash(back) == config_hash(d));
  NetConfig other = d;
  other.lane_width = 8;
  CHECK(config_hash(other) != config_hash(d));
}

TEST_CASE("config parser accepts comments and resolution forms") {
  const NetConfig a = parse_config("# comment\nresolution = 64\n\n  lane_width=8  # trailing\n");
  CHECK(a.input_h == 64);
  CHECK(a.input_w == 64);
  CHECK(a.lane_width == 8);
  const NetConfig b = parse_config("resolution = 48x64\ndilations = 1, 2\nfingertips = 0,8\n");
  CHECK(b.input_h == 48);
  CHECK(b.input_w == 64);
  CHECK(b.dilations == std::vector<int>{1, 2});
  CHECK(b.fingertips == std::vector<int>{0, 8});
}

TEST_CASE("config parser rejects unknown keys and bad values") {
  CHECK(code_of([] { parse_config("bogus = 1\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_config("lane_width = four\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_config("resolution = 96x\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_config("no equals sign\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { load_config(temp_path("no_such.cfg")); }) == ErrorCode::MissingInput);
}

TEST_CASE("shipped reference config equals the defaults") {
  const NetConfig c = load_config(COMBNET_SOURCE_DIR "/configs/reference.cfg");
  CHECK(config_to_text(c) == config_to_text(NetConfig{}));
}
