// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/rng.hpp"

namespace imu2shoe {

std::vector<PairedExample> make_synthetic_examples(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.components == 0) throw ConfigError("synthetic data needs at least one component");
  if (!(config.min_frequency_hz > 0.0 && config.max_frequency_hz >= config.min_frequency_hz)) {
    throw ConfigError("synthetic frequency range must be positive and ordered");
  }
  Rng rng(seed);
  const auto span = kWindowLength + config.delay;
  const auto in_names = imu_channel_names();
  const auto out_names = target_channel_names(config.target);
  // Source input channel of each target channel.
  const std::vector<std::size_t> source =
      config.target == TargetMode::kSixChannel ? std::vector<std::size_t>{0, 1, 2, 3, 4, 5}
                                               : std::vector<std::size_t>{3, 4};

  std::vector<PairedExample> out;
  out.reserve(config.count);
  for (std::size_t e = 0; e < config.count; ++e) {
    std::vector<std::vector<double>> raw;
    for (std::size_t c = 0; c < in_names.size(); ++c) {
      raw.emplace_back(span, rng.uniform(0.5 - config.level_spread, 0.5 + config.level_spread));
    }
    for (auto& ch : raw) {
      for (std::size_t k = 0; k < config.components; ++k) {
        const double a = config.amplitude / static_cast<double>(config.components) * rng.uniform(0.5, 1.0);
        const double f = rng.uniform(config.min_frequency_hz, config.max_frequency_hz);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t t = 0; t < span; ++t) {
          ch[t] += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / kSampleRateHz + phase);
        }
      }
    }
    std::vector<double> input;
    input.reserve(in_names.size() * kWindowLength);
    for (const auto& ch : raw) input.insert(input.end(), ch.begin() + config.delay, ch.end());
    std::vector<double> target;
    target.reserve(out_names.size() * kWindowLength);
    for (const auto s : source) {
      for (std::size_t t = 0; t < kWindowLength; ++t) {
        const double v = config.gain * raw[s][t] + config.noise_std * rng.normal();
        target.push_back(std::clamp(v, 0.0, 1.0));
      }
    }
    for (auto& v : input) v = std::clamp(v, 0.0, 1.0);
    out.push_back({SignalWindow(in_names, std::move(input), Units::kScaled),
                   SignalWindow(out_names, std::move(target), Units::kScaled),
                   fmt::format("synthetic-{:04d}", e)});
  }
  return out;
}

}  // namespace imu2shoe
