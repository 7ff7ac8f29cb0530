// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imu2shoe {

/// Samples per window: 5.12 s at 50 Hz.
inline constexpr std::size_t kWindowLength = 256;
inline constexpr double kSampleRateHz = 50.0;

/// Canonical channel orders. Everything that reads or writes windows uses these.
inline constexpr std::array<std::string_view, 6> kImuChannels = {"ax", "ay", "az", "wx", "wy", "wz"};
inline constexpr std::array<std::string_view, 2> kGaitChannels = {"wtot", "wy"};

/// Translation target layout: all six shoe channels or the (wtot, wy) pair.
enum class TargetMode { kSixChannel, kTwoChannel };

[[nodiscard]] std::size_t target_channel_count(TargetMode mode);
[[nodiscard]] std::vector<std::string> target_channel_names(TargetMode mode);
[[nodiscard]] std::vector<std::string> imu_channel_names();
[[nodiscard]] std::string_view to_string(TargetMode mode);
[[nodiscard]] TargetMode parse_target_mode(std::string_view text);

enum class Units { kPhysical, kScaled };

/// One C x 256 window of inertial samples, stored channel-major.
///
/// Invariants are enforced at construction: the length is exactly
/// kWindowLength, one name per channel, and scaled windows lie in [0, 1].
class SignalWindow {
 public:
  SignalWindow(std::vector<std::string> channel_names, std::vector<double> data, Units units);

  [[nodiscard]] std::size_t channels() const noexcept { return names_.size(); }
  [[nodiscard]] static constexpr std::size_t length() noexcept { return kWindowLength; }
  [[nodiscard]] Units units() const noexcept { return units_; }
  [[nodiscard]] const std::vector<std::string>& channel_names() const noexcept { return names_; }

  [[nodiscard]] double operator()(std::size_t channel, std::size_t t) const {
    return data_[channel * kWindowLength + t];
  }
  [[nodiscard]] std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * kWindowLength, kWindowLength};
  }
  /// Row index of a named channel; throws ConfigError when absent.
  [[nodiscard]] std::size_t channel_index(std::string_view name) const;
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const SignalWindow&, const SignalWindow&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> data_;
  Units units_;
};

struct ChannelRange {
  std::string name;
  double min_physical = 0.0;
  double max_physical = 1.0;

  friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

/// Fixed physical range per channel used for the affine 0-1 mapping.
class ScalingSpec {
 public:
  ScalingSpec() = default;
  explicit ScalingSpec(std::vector<ChannelRange> ranges);

  /// Sensor full-scale ranges: +-4 g, +-2000 dps, and [0, 2000*sqrt(3)] dps for wtot.
  [[nodiscard]] static ScalingSpec imu_default();

  [[nodiscard]] const ChannelRange& range(std::string_view channel) const;
  [[nodiscard]] bool contains(std::string_view channel) const;
  [[nodiscard]] const std::vector<ChannelRange>& ranges() const noexcept { return ranges_; }
  /// Subset in the given channel order; throws ConfigError for missing entries.
  [[nodiscard]] ScalingSpec select(std::span<const std::string> channels) const;

  friend bool operator==(const ScalingSpec&, const ScalingSpec&) = default;

 private:
  std::vector<ChannelRange> ranges_;
};

/// v' = (v - min) / (max - min), clipped to [0, 1]. Clip events are added
/// to `clip_count` when it is non-null.
[[nodiscard]] SignalWindow scale_to_unit(const SignalWindow& window, const ScalingSpec& spec,
                                         std::size_t* clip_count = nullptr);

/// Exact affine inverse of scale_to_unit (without the clip).
[[nodiscard]] SignalWindow unscale_from_unit(const SignalWindow& window, const ScalingSpec& spec);

/// Euclidean norm of the three gyroscope components.
[[nodiscard]] double omega_total(double wx, double wy, double wz) noexcept;

/// (wtot, wy) from a six-channel physical shoe window.
[[nodiscard]] SignalWindow make_two_channel_target(const SignalWindow& shoe);

}  // namespace imu2shoe
