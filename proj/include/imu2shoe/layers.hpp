// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "imu2shoe/rng.hpp"
#include "imu2shoe/tensor.hpp"

namespace imu2shoe::nn {

/// Named trainable array with its gradient accumulator.
template <typename T>
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Parameter(std::string n, std::vector<std::size_t> s);
  [[nodiscard]] std::size_t size() const noexcept { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

/// One differentiable stage.
///
/// forward() caches what backward() needs, so each backward() must follow
/// the forward() it differentiates. When the input carries a tangent the
/// layer propagates it (Jacobian-vector product), and backward() then
/// expects and returns cotangents for both value and tangent. Parameter
/// gradients are accumulated, never overwritten.
template <typename T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  virtual Dual<T> forward(Dual<T> input, bool training) = 0;
  virtual Dual<T> backward(Dual<T> grad) = 0;
  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  [[nodiscard]] virtual std::string_view kind() const = 0;
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// When off, backward leaves parameter gradients alone and only returns
  /// input cotangents.
  virtual void set_param_grads(bool on) { param_grads_ = on; }
  [[nodiscard]] bool param_grads() const noexcept { return param_grads_; }

 protected:
  std::string name_;
  bool param_grads_ = true;
};

/// Stride-1 cross-correlation with symmetric zero padding.
/// weight: (out, in, kernel), bias: (out).
template <typename T>
class Conv1d final : public Layer<T> {
 public:
  Conv1d(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t padding);
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  [[nodiscard]] std::string_view kind() const override { return "Conv1D"; }
  [[nodiscard]] std::size_t output_length(std::size_t input_length) const;

 private:
  std::size_t in_, out_, kernel_, padding_;
  Parameter<T> weight_, bias_;
  typename Tensor<T>::Matrix col_, tcol_;
  std::size_t batch_ = 0, in_length_ = 0, out_length_ = 0;
};

/// Transposed convolution: output length (L-1)*stride - 2*padding + kernel + output_padding.
/// weight: (in, out, kernel), bias: (out).
template <typename T>
class ConvTranspose1d final : public Layer<T> {
 public:
  ConvTranspose1d(std::string name, std::size_t in_channels, std::size_t out_channels,
                  std::size_t kernel, std::size_t stride, std::size_t padding,
                  std::size_t output_padding);
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  [[nodiscard]] std::string_view kind() const override { return "ConvTranspose1D"; }
  [[nodiscard]] std::size_t output_length(std::size_t input_length) const;

 private:
  std::size_t in_, out_, kernel_, stride_, padding_, output_padding_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_, tinput_;
  std::size_t out_length_ = 0;
};

/// Dense layer on (batch, features, 1). weight: (out, in), bias: (out).
template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::string name, std::size_t in_features, std::size_t out_features);
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  [[nodiscard]] std::string_view kind() const override { return "Linear"; }

 private:
  std::size_t in_, out_;
  Parameter<T> weight_, bias_;
  Tensor<T> input_, tinput_;
};

/// Window 2, stride 2; odd lengths drop the last sample.
template <typename T>
class MaxPool1d final : public Layer<T> {
 public:
  explicit MaxPool1d(std::string name) : Layer<T>(std::move(name)) {}
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  [[nodiscard]] std::string_view kind() const override { return "MaxPool1D"; }

 private:
  std::vector<unsigned char> pick_;  // 0 or 1: which sample of each pair won
  std::size_t batch_ = 0, channels_ = 0, in_length_ = 0;
};

/// Nearest-neighbour upsampling by 2.
template <typename T>
class Upsample1d final : public Layer<T> {
 public:
  explicit Upsample1d(std::string name) : Layer<T>(std::move(name)) {}
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  [[nodiscard]] std::string_view kind() const override { return "Upsample1D"; }
};

enum class Activation { kLeakyRelu, kSigmoid, kTanh, kUnitRemap };

/// Elementwise nonlinearity. kUnitRemap is the affine (v + 1) / 2.
template <typename T>
class Elementwise final : public Layer<T> {
 public:
  Elementwise(std::string name, Activation fn, T leaky_slope = T(0.2));
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  [[nodiscard]] std::string_view kind() const override;
  [[nodiscard]] Activation activation() const noexcept { return fn_; }

 private:
  Activation fn_;
  T slope_;
  Tensor<T> cached_;  // input for LeakyReLU, output for Sigmoid/Tanh
  Tensor<T> tinput_;
};

/// Inverted dropout; identity in evaluation mode.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(std::string name, double p, Rng* rng);
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  [[nodiscard]] std::string_view kind() const override { return "Dropout"; }
  /// Reuse the previous mask on the next training forward passes.
  void hold_mask(bool hold) noexcept { hold_ = hold; }

 private:
  double p_;
  Rng* rng_;
  bool hold_ = false;
  bool active_ = false;
  std::vector<T> mask_;
};

/// (batch, channels, length) -> (batch, channels*length, 1).
template <typename T>
class Flatten final : public Layer<T> {
 public:
  explicit Flatten(std::string name) : Layer<T>(std::move(name)) {}
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  [[nodiscard]] std::string_view kind() const override { return "Flatten"; }

 private:
  std::size_t channels_ = 0, length_ = 0;
};

/// Output shape of one executed layer, as (channels, length).
struct TraceRow {
  std::string layer;
  std::string kind;
  std::size_t channels = 0;
  std::size_t length = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};
using ForwardTrace = std::vector<TraceRow>;

/// Ordered chain of layers.
template <typename T>
class Sequential {
 public:
  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    auto& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Dual<T> forward(Dual<T> x, bool training, ForwardTrace* trace = nullptr);
  Dual<T> backward(Dual<T> grad);
  [[nodiscard]] std::vector<Parameter<T>*> parameters();
  [[nodiscard]] std::size_t size() const noexcept { return layers_.size(); }
  [[nodiscard]] Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  void set_param_grads(bool on) {
    for (auto& layer : layers_) layer->set_param_grads(on);
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

extern template struct Parameter<float>;
extern template struct Parameter<double>;
extern template class Conv1d<float>;
extern template class Conv1d<double>;
extern template class ConvTranspose1d<float>;
extern template class ConvTranspose1d<double>;
extern template class Linear<float>;
extern template class Linear<double>;
extern template class MaxPool1d<float>;
extern template class MaxPool1d<double>;
extern template class Upsample1d<float>;
extern template class Upsample1d<double>;
extern template class Elementwise<float>;
extern template class Elementwise<double>;
extern template class Dropout<float>;
extern template class Dropout<double>;
extern template class Flatten<float>;
extern template class Flatten<double>;
extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace imu2shoe::nn
