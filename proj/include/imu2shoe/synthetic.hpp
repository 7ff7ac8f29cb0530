// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "imu2shoe/dataset.hpp"

namespace imu2shoe {

/// Paired windows with a known input-to-target map, for smoke training.
///
/// Each input channel is a random level plus a few random low-frequency
/// sinusoids.
/// The target channel is gain * input, delayed by `delay` samples, plus
/// Gaussian noise, clipped to [0, 1]. Both sides are in scaled units.
struct SyntheticConfig {
  std::size_t count = 64;
  std::size_t delay = 10;
  double gain = 0.7;
  double noise_std = 0.01;
  double level_spread = 0.3;      ///< channel levels are uniform in 0.5 +- level_spread
  double amplitude = 0.15;        ///< peak deviation of the input from its level
  std::size_t components = 3;     ///< sinusoids per channel
  double min_frequency_hz = 0.5;
  double max_frequency_hz = 3.0;
  TargetMode target = TargetMode::kSixChannel;
};

/// In two-channel mode the targets are the delayed copies of wx and wy.
[[nodiscard]] std::vector<PairedExample> make_synthetic_examples(const SyntheticConfig& config,
                                                                 std::uint64_t seed);

}  // namespace imu2shoe
