// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imu2shoe/layers.hpp"
#include "imu2shoe/rng.hpp"
#include "imu2shoe/signals.hpp"

namespace imu2shoe {

enum class ModelKind {
  kAutoencoder,
  kUNet,
  kDiscriminator,
  kIdentity,  ///< parameter-free pass-through generator for pipeline checks
};
enum class FinalNonlinearity { kSigmoid, kTanh, kNone };
enum class Regime { kGan, kWganGp };

/// How the two 256->256 decoder stages of the autoencoder double the length.
enum class Upsampling {
  kNearestPointwise,  ///< repeat each sample, then a kernel-1 convolution
  kTransposed,        ///< stride-2 transposed convolution with `transposed_kernel`
};

/// What the U-Net returns after its tanh.
enum class UNetOutput {
  kUnitRemap,  ///< (v + 1) / 2, so the output lives in [0, 1] like the targets
  kSigned,     ///< raw tanh; targets are mapped to [-1, 1] for training instead
};

[[nodiscard]] std::string_view to_string(ModelKind kind);
[[nodiscard]] std::string_view to_string(FinalNonlinearity f);
[[nodiscard]] std::string_view to_string(Regime regime);
[[nodiscard]] std::string_view to_string(Upsampling mode);
[[nodiscard]] std::string_view to_string(UNetOutput mode);
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);
[[nodiscard]] FinalNonlinearity parse_final_nonlinearity(std::string_view text);
[[nodiscard]] Regime parse_regime(std::string_view text);
[[nodiscard]] Upsampling parse_upsampling(std::string_view text);
[[nodiscard]] UNetOutput parse_unet_output(std::string_view text);

/// Architecture selector plus layer geometry.
struct ModelSpec {
  ModelKind kind = ModelKind::kAutoencoder;
  std::size_t in_channels = 6;
  std::size_t out_channels = 6;  ///< N for generators; the candidate width for the discriminator
  double leaky_slope = 0.2;
  std::size_t conv_kernel = 3;
  std::size_t transposed_kernel = 3;
  double dropout_p = 0.2;
  FinalNonlinearity final_nonlinearity = FinalNonlinearity::kSigmoid;
  Upsampling ae_upsampling = Upsampling::kNearestPointwise;
  UNetOutput unet_output = UNetOutput::kUnitRemap;

  [[nodiscard]] static ModelSpec autoencoder(std::size_t n_out);
  [[nodiscard]] static ModelSpec unet(std::size_t n_out);
  [[nodiscard]] static ModelSpec discriminator(std::size_t n_out, Regime regime);
  [[nodiscard]] static ModelSpec identity();
  [[nodiscard]] static ModelSpec generator(ModelKind kind, std::size_t n_out);

  /// Throws ConfigError on inconsistent geometry.
  void validate() const;
  [[nodiscard]] bool is_generator() const noexcept { return kind != ModelKind::kDiscriminator; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// One parameterized layer as counted analytically.
struct LayerGeometry {
  enum class Type { kConv, kTransposedConv, kLinear };
  Type type = Type::kConv;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 1;
  bool bias = true;
};

/// Parameterized layers of a spec in forward order, derived from the
/// architecture tables without building the network.
[[nodiscard]] std::vector<LayerGeometry> parameterized_layers(const ModelSpec& spec);
[[nodiscard]] std::size_t count_parameters(std::span<const LayerGeometry> layers);
[[nodiscard]] std::size_t count_parameters(const ModelSpec& spec);

/// Flattened feature width feeding the discriminator's first dense layer.
[[nodiscard]] std::size_t discriminator_flatten_width(const ModelSpec& spec);

/// JSON array of {layer, kind, shape: [channels, length]} rows.
[[nodiscard]] std::string forward_trace_json(const nn::ForwardTrace& trace);

/// Transposed-convolution padding and output padding that exactly double the length.
struct DoublingGeometry {
  std::size_t padding = 0;
  std::size_t output_padding = 0;
};
[[nodiscard]] DoublingGeometry doubling_geometry(std::size_t kernel);

namespace nn {

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases,
/// drawn layer by layer in forward order.
template <typename T>
void initialize_uniform(std::span<Parameter<T>* const> params, std::span<const std::size_t> fan_ins,
                        Rng& rng);

/// Nearest upsample by 2 followed by a kernel-1 convolution.
template <typename T>
class UpsampleConv1d final : public Layer<T> {
 public:
  UpsampleConv1d(std::string name, std::size_t in_channels, std::size_t out_channels);
  Dual<T> forward(Dual<T> input, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  std::vector<Parameter<T>*> parameters() override { return conv_.parameters(); }
  [[nodiscard]] std::string_view kind() const override { return "UpsampleConv1D"; }
  void set_param_grads(bool on) override {
    Layer<T>::set_param_grads(on);
    conv_.set_param_grads(on);
  }

 private:
  Upsample1d<T> up_;
  Conv1d<T> conv_;
};

/// Signal translator: (batch, 6, 256) -> (batch, N, 256).
template <typename T>
class Generator {
 public:
  Generator(const ModelSpec& spec, std::uint64_t seed);
  ~Generator();
  Generator(Generator&&) noexcept;
  Generator& operator=(Generator&&) noexcept;

  [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }

  /// Output in the network's native range: [0, 1], or (-1, 1) when
  /// spec().unet_output is kSigned.
  Tensor<T> forward(const Tensor<T>& x, bool training = false, ForwardTrace* trace = nullptr);
  /// Gradient of the loss w.r.t. the input; accumulates parameter gradients.
  Tensor<T> backward(const Tensor<T>& grad_output);

  /// Forward pass mapped into [0, 1] regardless of the output convention.
  Tensor<T> translate(const Tensor<T>& x);
  [[nodiscard]] bool signed_output() const noexcept;

  [[nodiscard]] std::vector<Parameter<T>*> parameters();
  [[nodiscard]] std::size_t parameter_count();
  void zero_grad();
  void reinitialize(std::uint64_t seed);

 private:
  struct Impl;
  ModelSpec spec_;
  std::unique_ptr<Impl> impl_;
};

/// Scores a candidate target given the conditioning input.
///
/// Implementations must support tangents on the candidate so that the
/// gradient penalty can differentiate the input-gradient norm with respect
/// to the critic's parameters.
template <typename T>
class Critic {
 public:
  virtual ~Critic() = default;
  /// True when the head squashes scores into (0, 1).
  [[nodiscard]] virtual bool bounded() const = 0;
  /// (batch, Cx, L) condition + (batch, N, L) candidate -> (batch, 1, 1) scores.
  virtual Dual<T> score(const Tensor<T>& condition, Dual<T> candidate, bool training) = 0;
  /// Cotangents of the scores -> cotangents of the candidate.
  virtual Dual<T> backward(Dual<T> grad) = 0;
  /// Keep stochastic layers (dropout masks) fixed across forward passes.
  virtual void hold_noise(bool /*hold*/) {}
  /// Skip parameter gradients in backward when only input cotangents are needed.
  virtual void set_param_grads(bool /*on*/) {}
  [[nodiscard]] virtual std::vector<Parameter<T>*> parameters() = 0;
};

/// Convolutional discriminator; the sigmoid head is present only for the GAN regime.
template <typename T>
class Discriminator final : public Critic<T> {
 public:
  Discriminator(const ModelSpec& spec, std::uint64_t seed);

  [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] bool bounded() const override {
    return spec_.final_nonlinearity == FinalNonlinearity::kSigmoid;
  }
  Dual<T> score(const Tensor<T>& condition, Dual<T> candidate, bool training) override;
  Dual<T> backward(Dual<T> grad) override;
  void hold_noise(bool hold) override;
  void set_param_grads(bool on) override { net_.set_param_grads(on); }
  [[nodiscard]] std::vector<Parameter<T>*> parameters() override { return net_.parameters(); }

  /// Convenience: scores without tangents.
  Tensor<T> forward(const Tensor<T>& condition, const Tensor<T>& candidate, bool training,
                    ForwardTrace* trace = nullptr);
  [[nodiscard]] std::size_t parameter_count();
  void zero_grad();
  void reinitialize(std::uint64_t seed);
  [[nodiscard]] Rng& noise_rng() noexcept { return *noise_rng_; }

 private:
  void check_inputs(const Tensor<T>& condition, const Tensor<T>& candidate) const;

  ModelSpec spec_;
  std::unique_ptr<Rng> noise_rng_;
  Sequential<T> net_;
  std::vector<std::size_t> fan_ins_;
  Dropout<T>* dropout_ = nullptr;
};

/// Stacks windows into a (batch, C, 256) tensor.
template <typename T>
[[nodiscard]] Tensor<T> stack_windows(std::span<const SignalWindow> windows);

/// Splits a (batch, C, 256) tensor of values in [0, 1] into scaled windows.
template <typename T>
[[nodiscard]] std::vector<SignalWindow> unstack_windows(const Tensor<T>& t,
                                                        const std::vector<std::string>& names);

extern template class Generator<float>;
extern template class Generator<double>;
extern template class Discriminator<float>;
extern template class Discriminator<double>;
extern template class UpsampleConv1d<float>;
extern template class UpsampleConv1d<double>;

}  // namespace nn

/// Translates one scaled six-channel window with a float generator.
[[nodiscard]] SignalWindow generator_forward(nn::Generator<float>& generator,
                                             const SignalWindow& input);

/// Scores one (input, candidate) pair in evaluation mode.
[[nodiscard]] double discriminator_forward(nn::Discriminator<float>& discriminator,
                                           const SignalWindow& input, const SignalWindow& candidate);

}  // namespace imu2shoe
