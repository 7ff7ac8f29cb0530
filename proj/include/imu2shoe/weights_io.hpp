// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "imu2shoe/nets.hpp"
#include "imu2shoe/signals.hpp"

namespace imu2shoe {

// Byte layout (all integers little-endian):
//   0   8 bytes  magic "IMU2SHOE"
//   8   u32      format version (1)
//   12  u32      header length H in bytes
//   16  H bytes  UTF-8 JSON header including the manifest
//   16+H         payload: f32 little-endian arrays, tightly packed in manifest order

inline constexpr char kBundleMagic[8] = {'I', 'M', 'U', '2', 'S', 'H', 'O', 'E'};
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::size_t kBundlePreambleBytes = 16;

struct BundleEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> data;

  [[nodiscard]] std::size_t element_count() const;
  friend bool operator==(const BundleEntry&, const BundleEntry&) = default;
};

/// Architecture description needed to rebuild the network without the trainer.
struct BundleHeader {
  std::string arch = "ae";  ///< ae | unet | identity | discriminator | adam-state
  std::size_t in_channels = 6;
  std::size_t out_channels = 6;
  std::size_t conv_kernel = 3;
  std::size_t transposed_kernel = 3;
  double leaky_slope = 0.2;
  std::string final_nonlinearity = "sigmoid";
  std::string upsampling = "nearest-pointwise";
  std::string unet_output = "unit-remap";
  ScalingSpec input_scaling;
  ScalingSpec output_scaling;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const BundleHeader&, const BundleHeader&) = default;
};

struct WeightBundle {
  BundleHeader header;
  std::vector<BundleEntry> entries;  ///< forward-pass order

  [[nodiscard]] std::size_t payload_bytes() const;
  [[nodiscard]] const BundleEntry& entry(std::string_view name) const;
  friend bool operator==(const WeightBundle&, const WeightBundle&) = default;
};

[[nodiscard]] std::vector<std::uint8_t> encode_bundle(const WeightBundle& bundle);
/// `source` names the file in error messages.
[[nodiscard]] WeightBundle decode_bundle(std::span<const std::uint8_t> bytes,
                                         const std::string& source = "bundle");

void write_bundle(const std::filesystem::path& path, const WeightBundle& bundle);
[[nodiscard]] WeightBundle read_bundle(const std::filesystem::path& path);

/// Header fields describing `spec`.
[[nodiscard]] BundleHeader header_for(const ModelSpec& spec, const ScalingSpec& input_scaling,
                                      const ScalingSpec& output_scaling);
/// ModelSpec recorded in a header; throws FormatError for unknown values.
[[nodiscard]] ModelSpec spec_from_header(const BundleHeader& header);

/// Snapshot of a generator (or discriminator) with its scaling.
[[nodiscard]] WeightBundle make_bundle(nn::Generator<float>& generator,
                                       const ScalingSpec& input_scaling,
                                       const ScalingSpec& output_scaling);
[[nodiscard]] WeightBundle make_bundle(nn::Discriminator<float>& discriminator);

void export_bundle(nn::Generator<float>& generator, const ScalingSpec& input_scaling,
                   const ScalingSpec& output_scaling, const std::filesystem::path& path);

/// Copies bundle arrays into `params`; names, order and shapes must match.
void load_parameters(const WeightBundle& bundle, std::span<nn::Parameter<float>* const> params);

/// Generator rebuilt from a bundle with its parameters loaded.
[[nodiscard]] nn::Generator<float> generator_from_bundle(const WeightBundle& bundle);

}  // namespace imu2shoe
