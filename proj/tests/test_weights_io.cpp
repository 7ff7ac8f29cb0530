// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <cstring>
#include <string>
#include <vector>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/rng.hpp"
#include "imu2shoe/weights_io.hpp"
#include "test_util.hpp"

using namespace imu2shoe;
using imu2shoe::testing::TempDir;

namespace {

WeightBundle random_bundle(Rng& rng) {
  WeightBundle b;
  b.header.arch = rng.uniform01() < 0.5 ? "ae" : "unet";
  b.header.out_channels = rng.uniform01() < 0.5 ? 2 : 6;
  b.header.conv_kernel = 1 + 2 * rng.below(3);
  b.header.leaky_slope = rng.uniform(0.0, 0.5);
  b.header.input_scaling = ScalingSpec::imu_default();
  b.header.metadata["run"] = std::to_string(rng.next_u64());
  const auto n = rng.below(6);
  for (std::uint64_t i = 0; i < n; ++i) {
    BundleEntry e;
    e.name = "layer" + std::to_string(i) + "/weight";
    const auto rank = 1 + rng.below(3);
    for (std::uint64_t r = 0; r < rank; ++r) e.shape.push_back(static_cast<std::size_t>(rng.below(5)));
    e.data.resize(e.element_count());
    // Raw bit patterns cover subnormals, infinities and NaN payloads.
    for (auto& f : e.data) f = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
    b.entries.push_back(std::move(e));
  }
  return b;
}

bool bitwise_equal(const WeightBundle& a, const WeightBundle& b) {
  if (a.entries.size() != b.entries.size() || !(a.header == b.header)) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.name != y.name || x.shape != y.shape || x.data.size() != y.data.size()) return false;
    if (std::memcmp(x.data.data(), y.data.data(), x.data.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

TEST_CASE("byte layout of the preamble") {
  WeightBundle b;
  b.entries.push_back({"w", {2}, {1.0f, -2.0f}});
  const auto bytes = encode_bundle(b);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "IMU2SHOE");
  CHECK(read_u32(bytes, 8) == 1);
  const auto h = read_u32(bytes, 12);
  CHECK(bytes.size() == 16 + h + 8);
  CHECK(read_u32(bytes, 16 + h) == 0x3f800000u);
  CHECK(read_u32(bytes, 16 + h + 4) == 0xc0000000u);
  const std::string header(bytes.begin() + 16, bytes.begin() + 16 + h);
  CHECK(header.find("\"manifest\"") != std::string::npos);
  CHECK(header.find("\"f32\"") != std::string::npos);
}

TEST_CASE("property: random bundles roundtrip bitwise") {
  Rng rng(31);
  TempDir dir("bundles");
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_bundle(rng);
    const auto bytes = encode_bundle(b);
    CHECK(bytes.size() == kBundlePreambleBytes + read_u32(bytes, 12) + b.payload_bytes());
    CHECK(bitwise_equal(decode_bundle(bytes), b));
    const auto path = dir / ("b" + std::to_string(trial) + ".bundle");
    write_bundle(path, b);
    CHECK(bitwise_equal(read_bundle(path), b));
    CHECK(encode_bundle(read_bundle(path)) == bytes);
  }
}

TEST_CASE("empty model gives a valid file with no payload") {
  WeightBundle b;
  b.header = header_for(ModelSpec::identity(), ScalingSpec::imu_default(), ScalingSpec::imu_default());
  CHECK(b.payload_bytes() == 0);
  const auto bytes = encode_bundle(b);
  CHECK(bytes.size() == 16 + read_u32(bytes, 12));
  const auto back = decode_bundle(bytes);
  CHECK(back.entries.empty());
  CHECK(back.header.arch == "identity");
}

TEST_CASE("generator export and reload") {
  TempDir dir("gen");
  for (const auto kind : {ModelKind::kAutoencoder, ModelKind::kUNet}) {
    for (const std::size_t n : {2u, 6u}) {
      nn::Generator<float> g(ModelSpec::generator(kind, n), 17);
      const auto out_scaling = ScalingSpec::imu_default().select(target_channel_names(
          n == 2 ? TargetMode::kTwoChannel : TargetMode::kSixChannel));
      export_bundle(g, ScalingSpec::imu_default().select(imu_channel_names()), out_scaling, dir / "g.bundle");
      const auto bundle = read_bundle(dir / "g.bundle");
      CHECK(bundle.header.out_channels == n);
      CHECK(bundle.header.output_scaling == out_scaling);
      if (kind == ModelKind::kAutoencoder) CHECK(bundle.header.final_nonlinearity == "sigmoid");
      auto h = generator_from_bundle(bundle);
      const auto a = g.parameters();
      const auto b = h.parameters();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i]->name == b[i]->name);
        CHECK(std::memcmp(a[i]->value.data(), b[i]->value.data(), a[i]->value.size() * 4) == 0);
      }
    }
  }
}

TEST_CASE("corrupt bundles are rejected with byte offsets") {
  WeightBundle b;
  b.entries.push_back({"w", {3, 4}, std::vector<float>(12, 0.5f)});
  const auto good = encode_bundle(b);

  auto bad_magic = good;
  bad_magic[3] = 'X';
  CHECK_THROWS_WITH_AS((void)decode_bundle(bad_magic), doctest::Contains("offset 0"), FormatError);

  auto v2 = good;
  v2[8] = 2;
  CHECK_THROWS_AS((void)decode_bundle(v2), UnsupportedVersionError);

  const std::vector<std::uint8_t> stub(good.begin(), good.begin() + 10);
  CHECK_THROWS_WITH_AS((void)decode_bundle(stub), doctest::Contains("expected 16 bytes, found 10"), FormatError);

  const std::vector<std::uint8_t> no_header(good.begin(), good.begin() + 20);
  CHECK_THROWS_WITH_AS((void)decode_bundle(no_header), doctest::Contains("offset 16"), FormatError);

  const std::vector<std::uint8_t> short_payload(good.begin(), good.end() - 5);
  CHECK_THROWS_WITH_AS((void)decode_bundle(short_payload),
                       doctest::Contains("expected 48 bytes, found 43"), FormatError);

  auto garbled = good;
  garbled[16] = '!';
  CHECK_THROWS_AS((void)decode_bundle(garbled), FormatError);

  auto long_file = good;
  long_file.push_back(0);
  CHECK_THROWS_AS((void)decode_bundle(long_file), FormatError);
}

TEST_CASE("parameter loading checks names and shapes") {
  nn::Generator<float> g(ModelSpec::generator(ModelKind::kAutoencoder, 6), 1);
  auto bundle = make_bundle(g, ScalingSpec::imu_default(), ScalingSpec::imu_default());
  bundle.entries[0].shape.back() += 1;
  bundle.entries[0].data.resize(bundle.entries[0].element_count());
  CHECK_THROWS_AS((void)generator_from_bundle(bundle), FormatError);
  bundle.entries.pop_back();
  CHECK_THROWS_AS((void)generator_from_bundle(bundle), FormatError);

  nn::Discriminator<float> d(ModelSpec::discriminator(6, Regime::kGan), 1);
  CHECK_THROWS_AS((void)generator_from_bundle(make_bundle(d)), FormatError);

  BundleHeader odd;
  odd.arch = "transformer";
  CHECK_THROWS_AS((void)spec_from_header(odd), FormatError);
  CHECK_THROWS_AS((void)read_bundle("/nonexistent/x.bundle"), IoError);
}
