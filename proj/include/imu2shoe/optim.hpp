// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "imu2shoe/layers.hpp"

namespace imu2shoe {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<nn::Parameter<float>*> params, AdamConfig config);

  /// One update from the gradients currently held by the parameters.
  void step();
  void zero_grad();

  [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }
  [[nodiscard]] const std::vector<std::vector<float>>& first_moments() const noexcept { return m_; }
  [[nodiscard]] const std::vector<std::vector<float>>& second_moments() const noexcept { return v_; }
  [[nodiscard]] const std::vector<nn::Parameter<float>*>& parameters() const noexcept { return params_; }

  /// Restores a saved state; sizes must match the parameter list.
  void set_state(std::uint64_t steps, std::vector<std::vector<float>> m,
                 std::vector<std::vector<float>> v);

 private:
  std::vector<nn::Parameter<float>*> params_;
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace imu2shoe
