// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/optim.hpp"

#include <fmt/format.h>

#include <cmath>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

Adam::Adam(std::vector<nn::Parameter<float>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be positive");
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
    throw ConfigError(fmt::format("Adam betas ({}, {}) must lie in [0, 1)", config_.beta1, config_.beta2));
  }
  for (const auto* p : params_) {
    m_.emplace_back(p->size(), 0.0f);
    v_.emplace_back(p->size(), 0.0f);
  }
}

void Adam::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const auto b1 = static_cast<float>(config_.beta1);
  const auto b2 = static_cast<float>(config_.beta2);
  const auto step = static_cast<float>(config_.learning_rate / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(config_.epsilon);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    float* m = m_[i].data();
    float* v = v_[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const float g = p.grad[k];
      m[k] = b1 * m[k] + (1.0f - b1) * g;
      v[k] = b2 * v[k] + (1.0f - b2) * g * g;
      p.value[k] -= step * m[k] / (std::sqrt(v[k] * inv_c2) + eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::set_state(std::uint64_t steps, std::vector<std::vector<float>> m,
                     std::vector<std::vector<float>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw FormatError(fmt::format("optimizer state has {} moment arrays, expected {}", m.size(),
                                  params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].size() != params_[i]->size() || v[i].size() != params_[i]->size()) {
      throw FormatError(fmt::format("optimizer state for '{}' has the wrong size", params_[i]->name));
    }
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace imu2shoe
