// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imu2shoe/signals.hpp"

namespace imu2shoe {

/// Wrist window paired with the shoe window recorded at the same time.
struct PairedExample {
  SignalWindow input;   ///< six wrist channels
  SignalWindow target;  ///< N shoe channels, N in {2, 6}
  std::string source_id;
};

struct DatasetSplit {
  std::vector<PairedExample> train;
  std::vector<PairedExample> validation;
  std::uint64_t seed = 0;
  double split_fraction = 0.9;
};

/// Diagnostics collected while loading; nothing here aborts the load.
struct LoadReport {
  std::size_t examples = 0;
  std::size_t clipped_samples = 0;
  std::vector<std::string> warnings;
};

/// Continuous multichannel recording in physical units, channel-major.
struct Recording {
  std::string id;
  std::vector<std::string> channel_names;
  std::size_t length = 0;
  std::vector<double> data;

  [[nodiscard]] std::span<const double> channel(std::size_t c) const {
    return {data.data() + c * length, length};
  }
};

/// Offsets 0, stride, 2*stride, ... with offset + window_len <= length.
[[nodiscard]] std::vector<std::size_t> window_offsets(std::size_t length, std::size_t window_len,
                                                      std::size_t stride);

/// Cuts a recording into physical-unit windows of kWindowLength samples.
/// The trailing remainder shorter than a window is dropped.
[[nodiscard]] std::vector<SignalWindow> window_recording(const Recording& recording,
                                                         std::size_t stride);

/// Reads one `t,ax,ay,az,wx,wy,wz` CSV recording.
[[nodiscard]] Recording read_recording_csv(const std::filesystem::path& path);
void write_recording_csv(const std::filesystem::path& path, const Recording& recording);

/// Pairs `<id>_wrist.csv` with `<id>_shoe.csv` under `raw_dir` and windows
/// both. Output is physical-unit, six channels on both sides, sorted by
/// recording id then offset. Source ids are `<id>@<offset>`.
[[nodiscard]] std::vector<PairedExample> prepare_raw_examples(const std::filesystem::path& raw_dir,
                                                              std::size_t stride,
                                                              LoadReport* report = nullptr);

/// Canonical JSON-lines example file: one physical-unit record per line
/// with `source_id`, `input` (6x256) and `target` (6x256).
void write_examples_jsonl(const std::filesystem::path& path, std::span<const PairedExample> examples);
[[nodiscard]] std::vector<PairedExample> read_examples_jsonl(const std::filesystem::path& path,
                                                             LoadReport* report = nullptr);

/// Loads a JSON-lines file or a raw CSV directory and returns scaled
/// examples. In two-channel mode targets are reduced to (wtot, wy) first.
[[nodiscard]] std::vector<PairedExample> load_paired_dataset(const std::filesystem::path& path,
                                                             TargetMode mode,
                                                             const ScalingSpec& scaling,
                                                             std::size_t stride = kWindowLength,
                                                             LoadReport* report = nullptr);

/// Scales one physical example for the given mode.
[[nodiscard]] PairedExample scale_example(const PairedExample& physical, TargetMode mode,
                                          const ScalingSpec& scaling,
                                          std::size_t* clip_count = nullptr);

/// Seeded shuffle; the first floor(fraction * n) examples go to train.
[[nodiscard]] DatasetSplit split_dataset(std::vector<PairedExample> examples, double fraction,
                                         std::uint64_t seed);

}  // namespace imu2shoe
