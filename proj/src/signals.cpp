// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/signals.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

std::size_t target_channel_count(TargetMode mode) {
  return mode == TargetMode::kSixChannel ? kImuChannels.size() : kGaitChannels.size();
}

std::vector<std::string> target_channel_names(TargetMode mode) {
  if (mode == TargetMode::kSixChannel) return imu_channel_names();
  return {kGaitChannels.begin(), kGaitChannels.end()};
}

std::vector<std::string> imu_channel_names() { return {kImuChannels.begin(), kImuChannels.end()}; }

std::string_view to_string(TargetMode mode) {
  return mode == TargetMode::kSixChannel ? "6ch" : "2ch";
}

TargetMode parse_target_mode(std::string_view text) {
  if (text == "6ch" || text == "6") return TargetMode::kSixChannel;
  if (text == "2ch" || text == "2") return TargetMode::kTwoChannel;
  throw ConfigError(fmt::format("unknown mode '{}' (expected 6ch or 2ch)", text));
}

SignalWindow::SignalWindow(std::vector<std::string> channel_names, std::vector<double> data,
                           Units units)
    : names_(std::move(channel_names)), data_(std::move(data)), units_(units) {
  if (data_.size() != names_.size() * kWindowLength) {
    throw ShapeError(fmt::format("window expects {} channels x {} samples = {} values, got {}",
                                 names_.size(), kWindowLength, names_.size() * kWindowLength,
                                 data_.size()));
  }
  if (units_ == Units::kScaled) {
    const auto bad = std::find_if(data_.begin(), data_.end(),
                                  [](double v) { return !(v >= 0.0 && v <= 1.0); });
    if (bad != data_.end()) {
      const auto idx = static_cast<std::size_t>(bad - data_.begin());
      throw DataError(fmt::format("scaled window value {} at channel {} sample {} is outside [0, 1]",
                                  *bad, names_[idx / kWindowLength], idx % kWindowLength));
    }
  }
}

std::size_t SignalWindow::channel_index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError(fmt::format("window has no channel '{}'", name));
  return static_cast<std::size_t>(it - names_.begin());
}

ScalingSpec::ScalingSpec(std::vector<ChannelRange> ranges) : ranges_(std::move(ranges)) {
  for (const auto& r : ranges_) {
    if (!(r.max_physical > r.min_physical) || !std::isfinite(r.min_physical) ||
        !std::isfinite(r.max_physical)) {
      throw ConfigError(fmt::format("scaling range for '{}' must satisfy min < max, got [{}, {}]",
                                    r.name, r.min_physical, r.max_physical));
    }
  }
}

ScalingSpec ScalingSpec::imu_default() {
  constexpr double kAccel = 4.0;
  constexpr double kGyro = 2000.0;
  return ScalingSpec({{"ax", -kAccel, kAccel},
                      {"ay", -kAccel, kAccel},
                      {"az", -kAccel, kAccel},
                      {"wx", -kGyro, kGyro},
                      {"wy", -kGyro, kGyro},
                      {"wz", -kGyro, kGyro},
                      {"wtot", 0.0, kGyro * std::numbers::sqrt3}});
}

bool ScalingSpec::contains(std::string_view channel) const {
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [&](const ChannelRange& r) { return r.name == channel; });
}

const ChannelRange& ScalingSpec::range(std::string_view channel) const {
  const auto it = std::find_if(ranges_.begin(), ranges_.end(),
                               [&](const ChannelRange& r) { return r.name == channel; });
  if (it == ranges_.end()) {
    throw ConfigError(fmt::format("scaling spec has no entry for channel '{}'", channel));
  }
  return *it;
}

ScalingSpec ScalingSpec::select(std::span<const std::string> channels) const {
  std::vector<ChannelRange> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(range(c));
  return ScalingSpec(std::move(out));
}

SignalWindow scale_to_unit(const SignalWindow& window, const ScalingSpec& spec,
                           std::size_t* clip_count) {
  if (window.units() != Units::kPhysical) {
    throw UsageError("scale_to_unit expects a window in physical units");
  }
  std::vector<double> out(window.data().size());
  std::size_t clipped = 0;
  for (std::size_t c = 0; c < window.channels(); ++c) {
    const auto& r = spec.range(window.channel_names()[c]);
    const double width = r.max_physical - r.min_physical;
    if (!(width > 0.0)) throw ConfigError(fmt::format("empty scaling range for '{}'", r.name));
    const auto src = window.channel(c);
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      double v = (src[t] - r.min_physical) / width;
      if (v < 0.0 || v > 1.0 || std::isnan(v)) {
        ++clipped;
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
      }
      out[c * kWindowLength + t] = v;
    }
  }
  if (clip_count != nullptr) *clip_count += clipped;
  return {window.channel_names(), std::move(out), Units::kScaled};
}

SignalWindow unscale_from_unit(const SignalWindow& window, const ScalingSpec& spec) {
  if (window.units() != Units::kScaled) {
    throw UsageError("unscale_from_unit expects a window in scaled units");
  }
  std::vector<double> out(window.data().size());
  for (std::size_t c = 0; c < window.channels(); ++c) {
    const auto& r = spec.range(window.channel_names()[c]);
    const double width = r.max_physical - r.min_physical;
    if (!(width > 0.0)) throw ConfigError(fmt::format("empty scaling range for '{}'", r.name));
    const auto src = window.channel(c);
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      out[c * kWindowLength + t] = src[t] * width + r.min_physical;
    }
  }
  return {window.channel_names(), std::move(out), Units::kPhysical};
}

double omega_total(double wx, double wy, double wz) noexcept {
  return std::sqrt(wx * wx + wy * wy + wz * wz);
}

SignalWindow make_two_channel_target(const SignalWindow& shoe) {
  if (shoe.channels() != kImuChannels.size()) {
    throw ShapeError(fmt::format("two-channel target needs a 6-channel shoe window, got {} channels",
                                 shoe.channels()));
  }
  if (shoe.units() != Units::kPhysical) {
    throw UsageError("make_two_channel_target expects physical units");
  }
  const auto wx = shoe.channel(shoe.channel_index("wx"));
  const auto wy = shoe.channel(shoe.channel_index("wy"));
  const auto wz = shoe.channel(shoe.channel_index("wz"));
  std::vector<double> out(2 * kWindowLength);
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    out[t] = omega_total(wx[t], wy[t], wz[t]);
    out[kWindowLength + t] = wy[t];
  }
  return {target_channel_names(TargetMode::kTwoChannel), std::move(out), Units::kPhysical};
}

}  // namespace imu2shoe
