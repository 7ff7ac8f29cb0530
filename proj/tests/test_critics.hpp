// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "imu2shoe/layers.hpp"
#include "imu2shoe/nets.hpp"

namespace imu2shoe::testing {

/// D(x, y) = c * y[0, 0].
class SampleCritic final : public nn::Critic<double> {
 public:
  explicit SampleCritic(double c) : c_(c) {}
  bool bounded() const override { return false; }
  nn::Dual<double> score(const nn::Tensor<double>&, nn::Dual<double> y, bool) override {
    shape_ = y.value;
    nn::Dual<double> out;
    out.value = nn::Tensor<double>(y.value.batch(), 1, 1);
    for (std::size_t b = 0; b < y.value.batch(); ++b) out.value.at(b, 0, 0) = c_ * y.value.at(b, 0, 0);
    if (y.has_tangent()) {
      out.tangent = nn::Tensor<double>(y.value.batch(), 1, 1);
      for (std::size_t b = 0; b < y.value.batch(); ++b) {
        out.tangent.at(b, 0, 0) = c_ * y.tangent.at(b, 0, 0);
      }
    }
    return out;
  }
  nn::Dual<double> backward(nn::Dual<double> g) override {
    nn::Dual<double> out;
    auto spread = [&](const nn::Tensor<double>& s) {
      nn::Tensor<double> r(shape_.batch(), shape_.channels(), shape_.length());
      for (std::size_t b = 0; b < shape_.batch(); ++b) r.at(b, 0, 0) = c_ * s.at(b, 0, 0);
      return r;
    };
    if (!g.value.empty()) out.value = spread(g.value);
    if (g.has_tangent()) out.tangent = spread(g.tangent);
    return out;
  }
  std::vector<nn::Parameter<double>*> parameters() override { return {}; }

 private:
  double c_;
  nn::Tensor<double> shape_;
};

/// D(x, y) = k.
class ConstantCritic final : public nn::Critic<double> {
 public:
  explicit ConstantCritic(double k) : k_(k) {}
  bool bounded() const override { return false; }
  nn::Dual<double> score(const nn::Tensor<double>&, nn::Dual<double> y, bool) override {
    shape_ = y.value;
    nn::Dual<double> out;
    out.value = nn::Tensor<double>(y.value.batch(), 1, 1, k_);
    if (y.has_tangent()) out.tangent = nn::Tensor<double>(y.value.batch(), 1, 1);
    return out;
  }
  nn::Dual<double> backward(nn::Dual<double> g) override {
    nn::Dual<double> out;
    if (!g.value.empty()) out.value = nn::Tensor<double>(shape_.batch(), shape_.channels(), shape_.length());
    if (g.has_tangent()) out.tangent = nn::Tensor<double>(shape_.batch(), shape_.channels(), shape_.length());
    return out;
  }
  std::vector<nn::Parameter<double>*> parameters() override { return {}; }

 private:
  double k_;
  nn::Tensor<double> shape_;
};

/// D(x, y) = sum_t tanh(w * y[0, t] + b): two parameters, curved in both.
class TinyCritic final : public nn::Critic<double> {
 public:
  TinyCritic() : conv_("tiny", 1, 1, 1, 0), act_("tiny.act", nn::Activation::kTanh) {}
  void set(double w, double b) {
    auto params = conv_.parameters();
    params[0]->value[0] = w;
    params[1]->value[0] = b;
  }
  bool bounded() const override { return false; }
  nn::Dual<double> score(const nn::Tensor<double>&, nn::Dual<double> y, bool training) override {
    auto z = act_.forward(conv_.forward(std::move(y), training), training);
    length_ = z.value.length();
    nn::Dual<double> out;
    out.value = sum(z.value);
    if (z.has_tangent()) out.tangent = sum(z.tangent);
    return out;
  }
  nn::Dual<double> backward(nn::Dual<double> g) override {
    nn::Dual<double> spread;
    if (!g.value.empty()) spread.value = broadcast(g.value);
    if (g.has_tangent()) spread.tangent = broadcast(g.tangent);
    return conv_.backward(act_.backward(std::move(spread)));
  }
  std::vector<nn::Parameter<double>*> parameters() override { return conv_.parameters(); }

 private:
  static nn::Tensor<double> sum(const nn::Tensor<double>& z) {
    nn::Tensor<double> out(z.batch(), 1, 1);
    for (std::size_t b = 0; b < z.batch(); ++b) {
      for (std::size_t t = 0; t < z.length(); ++t) out.at(b, 0, 0) += z.at(b, 0, t);
    }
    return out;
  }
  nn::Tensor<double> broadcast(const nn::Tensor<double>& g) const {
    nn::Tensor<double> out(g.batch(), 1, length_);
    for (std::size_t b = 0; b < g.batch(); ++b) {
      for (std::size_t t = 0; t < length_; ++t) out.at(b, 0, t) = g.at(b, 0, 0);
    }
    return out;
  }

  nn::Conv1d<double> conv_;
  nn::Elementwise<double> act_;
  std::size_t length_ = 0;
};

}  // namespace imu2shoe::testing
