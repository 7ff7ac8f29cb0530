// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "imu2shoe/signals.hpp"

namespace imu2shoe {

struct ChannelMetrics {
  std::string channel;
  double rmse = 0.0;
  double mae = 0.0;

  friend bool operator==(const ChannelMetrics&, const ChannelMetrics&) = default;
};

/// Per-channel translation errors, in the scaled 0-1 domain unless converted.
struct MetricsReport {
  std::string model;   ///< "ae", "unet" or "identity"
  std::string regime;  ///< "gan" or "wgan-gp"
  std::size_t n = 0;   ///< output channel count
  std::size_t examples = 0;
  std::vector<ChannelMetrics> channels;

  [[nodiscard]] double mean_rmse() const;
  [[nodiscard]] double mean_mae() const;

  /// {"model", "regime", "N", "examples", "channels": [{"name", "rmse", "mae"}]}
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] static MetricsReport from_json(const std::string& text);
  /// Aligned table: one RMSE block and one MAE block, one column per channel.
  [[nodiscard]] std::string to_text() const;

  /// Errors multiplied by each channel's physical range width.
  [[nodiscard]] MetricsReport to_physical(const ScalingSpec& scaling) const;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// RMSE = sqrt(mean (p - t)^2) and MAE = mean |p - t| per channel, pooled
/// over every example and sample. Throws UsageError on empty input, count
/// or shape mismatch, or windows that are not in scaled units.
[[nodiscard]] MetricsReport rmse_mae(std::span<const SignalWindow> predictions,
                                     std::span<const SignalWindow> targets);

/// Elementwise mean of the training targets (per channel and time step).
[[nodiscard]] SignalWindow baseline_predictor(std::span<const SignalWindow> train_targets);

}  // namespace imu2shoe
