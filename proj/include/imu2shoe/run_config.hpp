// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imu2shoe/signals.hpp"
#include "imu2shoe/train.hpp"

namespace imu2shoe {

/// Flat `key = value` run description: every TrainConfig key except
/// out_channels (derived from `mode`) plus the dataset and output keys.
/// Lines starting with '#' and blank lines are ignored.
struct RunConfig {
  TrainConfig train;
  std::string data;
  TargetMode mode = TargetMode::kSixChannel;
  std::string output_dir = "run";
  double split_fraction = 0.9;
  std::size_t stride = kWindowLength;

  [[nodiscard]] static const std::vector<std::string>& keys();
  [[nodiscard]] static bool has_key(const std::string& key);
  /// ConfigError naming the key for unknown keys and bad values.
  void set(const std::string& key, const std::string& value);
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> fields() const;
  [[nodiscard]] std::string to_text() const;

  /// Applies every assignment in `text`; returns the keys that were set.
  /// Malformed lines raise ParseError with `source:line`.
  std::vector<std::string> apply_text(const std::string& text, const std::string& source = "config");
  void validate() const;
};

/// One `key=value` assignment from the command line.
[[nodiscard]] std::pair<std::string, std::string> split_assignment(const std::string& text);

/// Seed from IMU2SHOE_SEED, if set; ConfigError when it is not an integer.
[[nodiscard]] std::optional<std::uint64_t> seed_from_environment();

}  // namespace imu2shoe
