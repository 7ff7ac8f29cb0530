// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/nets.hpp"

#include <fmt/format.h>

#include <cmath>

#include <json.hpp>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

// Layer widths from the architecture tables.
namespace {
constexpr std::size_t kEnc1 = 64;
constexpr std::size_t kEnc2 = 128;
constexpr std::size_t kEnc3 = 256;
constexpr std::size_t kDiscConv = 64;
constexpr std::size_t kDiscDense = 128;
constexpr std::size_t kDiscBlocks = 3;
}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAutoencoder:
      return "ae";
    case ModelKind::kUNet:
      return "unet";
    case ModelKind::kDiscriminator:
      return "discriminator";
    case ModelKind::kIdentity:
      return "identity";
  }
  return "?";
}

std::string_view to_string(FinalNonlinearity f) {
  switch (f) {
    case FinalNonlinearity::kSigmoid:
      return "sigmoid";
    case FinalNonlinearity::kTanh:
      return "tanh";
    case FinalNonlinearity::kNone:
      return "none";
  }
  return "?";
}

std::string_view to_string(Regime regime) { return regime == Regime::kGan ? "GAN" : "WGAN-GP"; }

std::string_view to_string(Upsampling mode) {
  return mode == Upsampling::kNearestPointwise ? "nearest-pointwise" : "transposed";
}

std::string_view to_string(UNetOutput mode) {
  return mode == UNetOutput::kUnitRemap ? "remap" : "signed";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "ae" || text == "AE" || text == "autoencoder") return ModelKind::kAutoencoder;
  if (text == "unet" || text == "UNet" || text == "U-Net") return ModelKind::kUNet;
  if (text == "discriminator") return ModelKind::kDiscriminator;
  if (text == "identity") return ModelKind::kIdentity;
  throw ConfigError(fmt::format("unknown architecture '{}' (expected ae or unet)", text));
}

FinalNonlinearity parse_final_nonlinearity(std::string_view text) {
  if (text == "sigmoid") return FinalNonlinearity::kSigmoid;
  if (text == "tanh") return FinalNonlinearity::kTanh;
  if (text == "none") return FinalNonlinearity::kNone;
  throw ConfigError(fmt::format("unknown final nonlinearity '{}'", text));
}

Regime parse_regime(std::string_view text) {
  if (text == "GAN" || text == "gan") return Regime::kGan;
  if (text == "WGAN-GP" || text == "wgan-gp" || text == "WGAN" || text == "wgan") {
    return Regime::kWganGp;
  }
  throw ConfigError(fmt::format("unknown regime '{}' (expected GAN or WGAN-GP)", text));
}

Upsampling parse_upsampling(std::string_view text) {
  if (text == "nearest-pointwise") return Upsampling::kNearestPointwise;
  if (text == "transposed") return Upsampling::kTransposed;
  throw ConfigError(fmt::format("unknown upsampling mode '{}'", text));
}

UNetOutput parse_unet_output(std::string_view text) {
  if (text == "remap") return UNetOutput::kUnitRemap;
  if (text == "signed") return UNetOutput::kSigned;
  throw ConfigError(fmt::format("unknown U-Net output mode '{}' (expected remap or signed)", text));
}

ModelSpec ModelSpec::autoencoder(std::size_t n_out) {
  ModelSpec s;
  s.kind = ModelKind::kAutoencoder;
  s.out_channels = n_out;
  s.final_nonlinearity = FinalNonlinearity::kSigmoid;
  return s;
}

ModelSpec ModelSpec::unet(std::size_t n_out) {
  ModelSpec s;
  s.kind = ModelKind::kUNet;
  s.out_channels = n_out;
  s.final_nonlinearity = FinalNonlinearity::kTanh;
  return s;
}

ModelSpec ModelSpec::discriminator(std::size_t n_out, Regime regime) {
  ModelSpec s;
  s.kind = ModelKind::kDiscriminator;
  s.out_channels = n_out;
  s.final_nonlinearity =
      regime == Regime::kGan ? FinalNonlinearity::kSigmoid : FinalNonlinearity::kNone;
  return s;
}

ModelSpec ModelSpec::identity() {
  ModelSpec s;
  s.kind = ModelKind::kIdentity;
  s.out_channels = s.in_channels;
  s.final_nonlinearity = FinalNonlinearity::kNone;
  return s;
}

ModelSpec ModelSpec::generator(ModelKind kind, std::size_t n_out) {
  switch (kind) {
    case ModelKind::kAutoencoder:
      return autoencoder(n_out);
    case ModelKind::kUNet:
      return unet(n_out);
    case ModelKind::kIdentity:
      return identity();
    case ModelKind::kDiscriminator:
      break;
  }
  throw ConfigError("a discriminator is not a generator architecture");
}

void ModelSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) throw ConfigError("channel counts must be positive");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw ConfigError(fmt::format("leaky_slope {} not in [0, 1)", leaky_slope));
  }
  switch (kind) {
    case ModelKind::kAutoencoder:
    case ModelKind::kUNet: {
      if (conv_kernel % 2 == 0 || conv_kernel == 0) {
        throw ConfigError(fmt::format("conv_kernel {} must be odd for same padding", conv_kernel));
      }
      if (transposed_kernel < 2) {
        throw ConfigError(fmt::format("transposed_kernel {} must be at least 2", transposed_kernel));
      }
      if (out_channels != 2 && out_channels != 6) {
        throw ConfigError(fmt::format("generators translate to 2 or 6 channels, not {}", out_channels));
      }
      const auto want = kind == ModelKind::kAutoencoder ? FinalNonlinearity::kSigmoid
                                                        : FinalNonlinearity::kTanh;
      if (final_nonlinearity != want) {
        throw ConfigError(fmt::format("{} generator must end in {}", to_string(kind), to_string(want)));
      }
      break;
    }
    case ModelKind::kDiscriminator:
      if (final_nonlinearity == FinalNonlinearity::kTanh) {
        throw ConfigError("discriminator head must be sigmoid or none");
      }
      if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw ConfigError(fmt::format("dropout_p {} not in [0, 1)", dropout_p));
      }
      (void)discriminator_flatten_width(*this);
      break;
    case ModelKind::kIdentity:
      if (out_channels != in_channels) {
        throw ConfigError("identity generator needs as many outputs as inputs");
      }
      break;
  }
}

DoublingGeometry doubling_geometry(std::size_t kernel) {
  // out = 2(L-1) - 2p + k + op = 2L  <=>  op = 2 + 2p - k, with 0 <= op < stride.
  DoublingGeometry g;
  g.padding = (kernel - 1) / 2;
  g.output_padding = 2 + 2 * g.padding - kernel;
  return g;
}

std::vector<LayerGeometry> parameterized_layers(const ModelSpec& spec) {
  using Type = LayerGeometry::Type;
  const auto k = spec.conv_kernel;
  const auto tk = spec.transposed_kernel;
  const auto n = spec.out_channels;
  switch (spec.kind) {
    case ModelKind::kAutoencoder: {
      const bool nearest = spec.ae_upsampling == Upsampling::kNearestPointwise;
      const LayerGeometry up{nearest ? Type::kConv : Type::kTransposedConv, kEnc3, kEnc3,
                             nearest ? std::size_t{1} : tk};
      return {{Type::kConv, spec.in_channels, kEnc1, k},
              {Type::kConv, kEnc1, kEnc2, k},
              {Type::kConv, kEnc2, kEnc3, k},
              up,
              up,
              {Type::kTransposedConv, kEnc3, n, tk}};
    }
    case ModelKind::kUNet:
      return {{Type::kConv, spec.in_channels, kEnc1, k},
              {Type::kConv, kEnc1, kEnc2, k},
              {Type::kConv, kEnc2, kEnc3, k},
              {Type::kTransposedConv, kEnc3, kEnc2, tk},
              {Type::kTransposedConv, kEnc2 + kEnc2, kEnc1, tk},
              {Type::kConv, kEnc1 + kEnc1, n, k}};
    case ModelKind::kDiscriminator:
      return {{Type::kConv, spec.in_channels + n, kDiscConv, k},
              {Type::kConv, kDiscConv, kDiscConv, k},
              {Type::kConv, kDiscConv, kDiscConv, k},
              {Type::kLinear, discriminator_flatten_width(spec), kDiscDense, 1},
              {Type::kLinear, kDiscDense, 1, 1}};
    case ModelKind::kIdentity:
      return {};
  }
  return {};
}

std::string forward_trace_json(const nn::ForwardTrace& trace) {
  auto rows = nlohmann::json::array();
  for (const auto& row : trace) {
    rows.push_back({{"layer", row.layer}, {"kind", row.kind}, {"shape", {row.channels, row.length}}});
  }
  return rows.dump();
}

std::size_t count_parameters(std::span<const LayerGeometry> layers) {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.in * l.out * l.kernel + (l.bias ? l.out : 0);
  return total;
}

std::size_t count_parameters(const ModelSpec& spec) {
  const auto layers = parameterized_layers(spec);
  return count_parameters(layers);
}

std::size_t discriminator_flatten_width(const ModelSpec& spec) {
  std::size_t len = kWindowLength;
  for (std::size_t i = 0; i < kDiscBlocks; ++i) {
    if (len < spec.conv_kernel + 1) {
      throw ConfigError(fmt::format("conv_kernel {} too large for the discriminator", spec.conv_kernel));
    }
    len = (len - spec.conv_kernel + 1) / 2;  // valid conv, then pool 2
  }
  return kDiscConv * len;
}

namespace nn {

template <typename T>
void initialize_uniform(std::span<Parameter<T>* const> params, std::span<const std::size_t> fan_ins,
                        Rng& rng) {
  if (params.size() != fan_ins.size()) throw UsageError("one fan-in per parameter expected");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double bound = fan_ins[i] > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_ins[i])) : 0.0;
    for (auto& v : params[i]->value) v = static_cast<T>(rng.uniform(-bound, bound));
  }
}

template <typename T>
UpsampleConv1d<T>::UpsampleConv1d(std::string name, std::size_t in_channels,
                                  std::size_t out_channels)
    : Layer<T>(name), up_(name + ".up"), conv_(name, in_channels, out_channels, 1, 0) {}

template <typename T>
Dual<T> UpsampleConv1d<T>::forward(Dual<T> input, bool training) {
  return conv_.forward(up_.forward(std::move(input), training), training);
}

template <typename T>
Dual<T> UpsampleConv1d<T>::backward(Dual<T> grad) {
  return up_.backward(conv_.backward(std::move(grad)));
}

namespace {

// Fan-in of each parameter (weight and bias share their layer's value).
void push_fan_in(std::vector<std::size_t>& fan_ins, std::size_t value) {
  fan_ins.push_back(value);
  fan_ins.push_back(value);
}

std::size_t transposed_fan_in(std::size_t in, std::size_t kernel) {
  return in * ((kernel + 1) / 2);  // taps reaching each output at stride 2
}

template <typename T>
Dual<T> plain(const Tensor<T>& x) {
  return Dual<T>{x, {}};
}

template <typename T>
void trace_row(ForwardTrace* trace, std::string layer, std::string kind, const Tensor<T>& t) {
  if (trace) trace->push_back({std::move(layer), std::move(kind), t.channels(), t.length()});
}

}  // namespace

template <typename T>
struct Generator<T>::Impl {
  // Autoencoder (and identity, when empty).
  Sequential<T> chain;
  // U-Net stages around the two skip connections.
  Sequential<T> to_x1, to_x2, to_h, to_h2, head;
  std::size_t x1_channels = 0, h_channels = 0, h2_channels = 0;
  std::vector<std::size_t> fan_ins;
};

template <typename T>
Generator<T>::Generator(const ModelSpec& spec, std::uint64_t seed)
    : spec_(spec), impl_(std::make_unique<Impl>()) {
  spec_.validate();
  if (!spec_.is_generator()) throw ConfigError("Generator needs a generator ModelSpec");
  if (spec_.in_channels != kImuChannels.size()) {
    throw ConfigError(fmt::format("generators take {} input channels", kImuChannels.size()));
  }
  const auto k = spec_.conv_kernel;
  const auto pad = (k - 1) / 2;
  const auto tk = spec_.transposed_kernel;
  const auto dg = doubling_geometry(tk);
  const auto slope = static_cast<T>(spec_.leaky_slope);
  const auto n = spec_.out_channels;
  auto& fan = impl_->fan_ins;

  if (spec_.kind == ModelKind::kAutoencoder) {
    auto& s = impl_->chain;
    s.template add<Conv1d<T>>("enc1.conv", spec_.in_channels, kEnc1, k, pad);
    push_fan_in(fan, spec_.in_channels * k);
    s.template add<Elementwise<T>>("enc1.act", Activation::kLeakyRelu, slope);
    s.template add<MaxPool1d<T>>("enc1.pool");
    s.template add<Conv1d<T>>("enc2.conv", kEnc1, kEnc2, k, pad);
    push_fan_in(fan, kEnc1 * k);
    s.template add<Elementwise<T>>("enc2.act", Activation::kLeakyRelu, slope);
    s.template add<MaxPool1d<T>>("enc2.pool");
    s.template add<Conv1d<T>>("enc3.conv", kEnc2, kEnc3, k, pad);
    push_fan_in(fan, kEnc2 * k);
    s.template add<Elementwise<T>>("enc3.act", Activation::kLeakyRelu, slope);
    s.template add<MaxPool1d<T>>("enc3.pool");
    for (const char* stage : {"dec1", "dec2"}) {
      if (spec_.ae_upsampling == Upsampling::kNearestPointwise) {
        s.template add<UpsampleConv1d<T>>(fmt::format("{}.upconv", stage), kEnc3, kEnc3);
        push_fan_in(fan, kEnc3);
      } else {
        s.template add<ConvTranspose1d<T>>(fmt::format("{}.convT", stage), kEnc3, kEnc3, tk, 2,
                                           dg.padding, dg.output_padding);
        push_fan_in(fan, transposed_fan_in(kEnc3, tk));
      }
      s.template add<Elementwise<T>>(fmt::format("{}.act", stage), Activation::kLeakyRelu, slope);
    }
    s.template add<ConvTranspose1d<T>>("out.convT", kEnc3, n, tk, 2, dg.padding, dg.output_padding);
    push_fan_in(fan, transposed_fan_in(kEnc3, tk));
    s.template add<Elementwise<T>>("out.act", Activation::kSigmoid);
  } else if (spec_.kind == ModelKind::kUNet) {
    auto& im = *impl_;
    im.to_x1.template add<Conv1d<T>>("enc1.conv", spec_.in_channels, kEnc1, k, pad);
    push_fan_in(fan, spec_.in_channels * k);
    im.to_x1.template add<Elementwise<T>>("enc1.act", Activation::kLeakyRelu, slope);
    im.to_x2.template add<MaxPool1d<T>>("enc1.pool");
    im.to_x2.template add<Conv1d<T>>("enc2.conv", kEnc1, kEnc2, k, pad);
    push_fan_in(fan, kEnc1 * k);
    im.to_x2.template add<Elementwise<T>>("enc2.act", Activation::kLeakyRelu, slope);
    im.to_h.template add<MaxPool1d<T>>("enc2.pool");
    im.to_h.template add<Conv1d<T>>("enc3.conv", kEnc2, kEnc3, k, pad);
    push_fan_in(fan, kEnc2 * k);
    im.to_h.template add<Elementwise<T>>("enc3.act", Activation::kLeakyRelu, slope);
    im.to_h.template add<ConvTranspose1d<T>>("dec1.convT", kEnc3, kEnc2, tk, 2, dg.padding,
                                             dg.output_padding);
    push_fan_in(fan, transposed_fan_in(kEnc3, tk));
    im.to_h.template add<Elementwise<T>>("dec1.act", Activation::kLeakyRelu, slope);
    im.to_h2.template add<ConvTranspose1d<T>>("dec2.convT", kEnc2 + kEnc2, kEnc1, tk, 2,
                                              dg.padding, dg.output_padding);
    push_fan_in(fan, transposed_fan_in(kEnc2 + kEnc2, tk));
    im.to_h2.template add<Elementwise<T>>("dec2.act", Activation::kLeakyRelu, slope);
    im.head.template add<Conv1d<T>>("out.conv", kEnc1 + kEnc1, n, k, pad);
    push_fan_in(fan, (kEnc1 + kEnc1) * k);
    im.head.template add<Elementwise<T>>("out.act", Activation::kTanh);
    if (spec_.unet_output == UNetOutput::kUnitRemap) {
      im.head.template add<Elementwise<T>>("out.remap", Activation::kUnitRemap);
    }
    im.x1_channels = kEnc1;
    im.h_channels = kEnc2;
    im.h2_channels = kEnc1;
  }
  reinitialize(seed);
}

template <typename T>
Generator<T>::~Generator() = default;
template <typename T>
Generator<T>::Generator(Generator&&) noexcept = default;
template <typename T>
Generator<T>& Generator<T>::operator=(Generator&&) noexcept = default;

template <typename T>
bool Generator<T>::signed_output() const noexcept {
  return spec_.kind == ModelKind::kUNet && spec_.unet_output == UNetOutput::kSigned;
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& x, bool training, ForwardTrace* trace) {
  if (x.channels() != spec_.in_channels || x.length() != kWindowLength) {
    throw ShapeError(fmt::format("generator expects input (batch, {}, {}), got {}",
                                 spec_.in_channels, kWindowLength, x.shape_string()));
  }
  trace_row(trace, "input", "Input", x);
  auto& im = *impl_;
  if (spec_.kind != ModelKind::kUNet) return im.chain.forward(plain(x), training, trace).value;

  auto x1 = im.to_x1.forward(plain(x), training, trace).value;
  auto x2 = im.to_x2.forward(plain(x1), training, trace).value;
  auto h = im.to_h.forward(plain(x2), training, trace).value;
  auto cat1 = Tensor<T>::concat_channels(h, x2);
  trace_row(trace, "concat_x2", "Concat", cat1);
  auto h2 = im.to_h2.forward(plain(cat1), training, trace).value;
  auto cat2 = Tensor<T>::concat_channels(h2, x1);
  trace_row(trace, "concat_x1", "Concat", cat2);
  return im.head.forward(plain(cat2), training, trace).value;
}

template <typename T>
Tensor<T> Generator<T>::backward(const Tensor<T>& grad_output) {
  auto& im = *impl_;
  if (spec_.kind != ModelKind::kUNet) return im.chain.backward(plain(grad_output)).value;

  const auto g_cat2 = im.head.backward(plain(grad_output)).value;
  const auto g_h2 = g_cat2.slice_channels(0, im.h2_channels);
  const auto g_x1_skip = g_cat2.slice_channels(im.h2_channels, im.x1_channels);
  const auto g_cat1 = im.to_h2.backward(plain(g_h2)).value;
  const auto g_h = g_cat1.slice_channels(0, im.h_channels);
  auto g_x2 = g_cat1.slice_channels(im.h_channels, g_cat1.channels() - im.h_channels);
  g_x2.matrix() += im.to_h.backward(plain(g_h)).value.matrix();
  auto g_x1 = im.to_x2.backward(plain(g_x2)).value;
  g_x1.matrix() += g_x1_skip.matrix();
  return im.to_x1.backward(plain(g_x1)).value;
}

template <typename T>
Tensor<T> Generator<T>::translate(const Tensor<T>& x) {
  auto y = forward(x, false);
  if (signed_output()) {
    for (auto& v : y.values()) v = T(0.5) * v + T(0.5);
  }
  return y;
}

template <typename T>
std::vector<Parameter<T>*> Generator<T>::parameters() {
  auto& im = *impl_;
  if (spec_.kind != ModelKind::kUNet) return im.chain.parameters();
  std::vector<Parameter<T>*> out;
  for (auto* seq : {&im.to_x1, &im.to_x2, &im.to_h, &im.to_h2, &im.head}) {
    for (auto* p : seq->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::size_t Generator<T>::parameter_count() {
  std::size_t total = 0;
  for (auto* p : parameters()) total += p->size();
  return total;
}

template <typename T>
void Generator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
void Generator<T>::reinitialize(std::uint64_t seed) {
  Rng rng(seed);
  const auto params = parameters();
  initialize_uniform<T>(params, impl_->fan_ins, rng);
}

// --------------------------------------------------------- Discriminator

template <typename T>
Discriminator<T>::Discriminator(const ModelSpec& spec, std::uint64_t seed)
    : spec_(spec), noise_rng_(std::make_unique<Rng>(Rng::derive(seed, 0xd0d0))) {
  spec_.validate();
  if (spec_.kind != ModelKind::kDiscriminator) throw ConfigError("Discriminator needs a discriminator spec");
  const auto k = spec_.conv_kernel;
  const auto slope = static_cast<T>(spec_.leaky_slope);
  std::size_t in = spec_.in_channels + spec_.out_channels;
  for (int i = 1; i <= static_cast<int>(kDiscBlocks); ++i) {
    net_.template add<Conv1d<T>>(fmt::format("block{}.conv", i), in, kDiscConv, k, 0);
    push_fan_in(fan_ins_, in * k);
    net_.template add<Elementwise<T>>(fmt::format("block{}.act", i), Activation::kLeakyRelu, slope);
    net_.template add<MaxPool1d<T>>(fmt::format("block{}.pool", i));
    in = kDiscConv;
  }
  const auto flat = discriminator_flatten_width(spec_);
  net_.template add<Flatten<T>>("flatten");
  net_.template add<Linear<T>>("fc1", flat, kDiscDense);
  push_fan_in(fan_ins_, flat);
  net_.template add<Elementwise<T>>("fc1.act", Activation::kLeakyRelu, slope);
  dropout_ = &net_.template add<Dropout<T>>("dropout", spec_.dropout_p, noise_rng_.get());
  net_.template add<Linear<T>>("fc2", kDiscDense, 1);
  push_fan_in(fan_ins_, kDiscDense);
  if (spec_.final_nonlinearity == FinalNonlinearity::kSigmoid) {
    net_.template add<Elementwise<T>>("out.act", Activation::kSigmoid);
  }
  reinitialize(seed);
}

template <typename T>
void Discriminator<T>::check_inputs(const Tensor<T>& condition, const Tensor<T>& candidate) const {
  if (condition.channels() != spec_.in_channels || candidate.channels() != spec_.out_channels) {
    throw ShapeError(fmt::format("discriminator expects {}+{} channels, got condition {} and candidate {}",
                                 spec_.in_channels, spec_.out_channels, condition.shape_string(),
                                 candidate.shape_string()));
  }
  if (condition.length() != candidate.length() || condition.batch() != candidate.batch()) {
    throw ShapeError(fmt::format("condition {} and candidate {} differ in batch or length",
                                 condition.shape_string(), candidate.shape_string()));
  }
  if (condition.length() != kWindowLength) {
    throw ShapeError(fmt::format("discriminator expects length {}, got {}", kWindowLength,
                                 condition.length()));
  }
}

template <typename T>
Dual<T> Discriminator<T>::score(const Tensor<T>& condition, Dual<T> candidate, bool training) {
  check_inputs(condition, candidate.value);
  Dual<T> in;
  in.value = Tensor<T>::concat_channels(condition, candidate.value);
  if (candidate.has_tangent()) {
    const Tensor<T> zero(condition.batch(), condition.channels(), condition.length());
    in.tangent = Tensor<T>::concat_channels(zero, candidate.tangent);
  }
  return net_.forward(std::move(in), training);
}

template <typename T>
Dual<T> Discriminator<T>::backward(Dual<T> grad) {
  auto gin = net_.backward(std::move(grad));
  Dual<T> out;
  if (!gin.value.empty()) out.value = gin.value.slice_channels(spec_.in_channels, spec_.out_channels);
  if (gin.has_tangent()) out.tangent = gin.tangent.slice_channels(spec_.in_channels, spec_.out_channels);
  return out;
}

template <typename T>
void Discriminator<T>::hold_noise(bool hold) {
  dropout_->hold_mask(hold);
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& condition, const Tensor<T>& candidate,
                                    bool training, ForwardTrace* trace) {
  if (trace == nullptr) return score(condition, plain(candidate), training).value;
  check_inputs(condition, candidate);
  auto in = Tensor<T>::concat_channels(condition, candidate);
  trace_row(trace, "input", "Input", in);
  return net_.forward(plain(in), training, trace).value;
}

template <typename T>
std::size_t Discriminator<T>::parameter_count() {
  std::size_t total = 0;
  for (auto* p : parameters()) total += p->size();
  return total;
}

template <typename T>
void Discriminator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
void Discriminator<T>::reinitialize(std::uint64_t seed) {
  Rng rng(seed);
  const auto params = parameters();
  initialize_uniform<T>(params, fan_ins_, rng);
}

// ------------------------------------------------------------- stacking

template <typename T>
Tensor<T> stack_windows(std::span<const SignalWindow> windows) {
  if (windows.empty()) return {};
  const auto channels = windows.front().channels();
  Tensor<T> t(windows.size(), channels, kWindowLength);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b].channels() != channels) {
      throw ShapeError(fmt::format("window {} has {} channels, expected {}", b,
                                   windows[b].channels(), channels));
    }
    for (std::size_t c = 0; c < channels; ++c) {
      const auto src = windows[b].channel(c);
      for (std::size_t l = 0; l < kWindowLength; ++l) t.at(b, c, l) = static_cast<T>(src[l]);
    }
  }
  return t;
}

template <typename T>
std::vector<SignalWindow> unstack_windows(const Tensor<T>& t, const std::vector<std::string>& names) {
  if (t.channels() != names.size() || t.length() != kWindowLength) {
    throw ShapeError(fmt::format("cannot split {} into windows of {} channels", t.shape_string(),
                                 names.size()));
  }
  std::vector<SignalWindow> out;
  out.reserve(t.batch());
  for (std::size_t b = 0; b < t.batch(); ++b) {
    std::vector<double> data(t.channels() * kWindowLength);
    for (std::size_t c = 0; c < t.channels(); ++c) {
      for (std::size_t l = 0; l < kWindowLength; ++l) {
        data[c * kWindowLength + l] = static_cast<double>(t.at(b, c, l));
      }
    }
    out.emplace_back(names, std::move(data), Units::kScaled);
  }
  return out;
}

template void initialize_uniform<float>(std::span<Parameter<float>* const>,
                                        std::span<const std::size_t>, Rng&);
template void initialize_uniform<double>(std::span<Parameter<double>* const>,
                                         std::span<const std::size_t>, Rng&);
template class UpsampleConv1d<float>;
template class UpsampleConv1d<double>;
template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;
template Tensor<float> stack_windows<float>(std::span<const SignalWindow>);
template Tensor<double> stack_windows<double>(std::span<const SignalWindow>);
template std::vector<SignalWindow> unstack_windows<float>(const Tensor<float>&,
                                                          const std::vector<std::string>&);
template std::vector<SignalWindow> unstack_windows<double>(const Tensor<double>&,
                                                           const std::vector<std::string>&);

}  // namespace nn

SignalWindow generator_forward(nn::Generator<float>& generator, const SignalWindow& input) {
  const auto& spec = generator.spec();
  if (input.channels() != spec.in_channels) {
    throw ShapeError(fmt::format("generator expects a {}x{} window, got {}x{}", spec.in_channels,
                                 kWindowLength, input.channels(), input.length()));
  }
  if (input.units() != Units::kScaled) throw UsageError("generator input must be scaled to [0, 1]");
  const auto x = nn::stack_windows<float>(std::span<const SignalWindow>(&input, 1));
  const auto y = generator.translate(x);
  const auto names = spec.kind == ModelKind::kIdentity
                         ? input.channel_names()
                         : target_channel_names(spec.out_channels == 2 ? TargetMode::kTwoChannel
                                                                       : TargetMode::kSixChannel);
  return nn::unstack_windows(y, names).front();
}

double discriminator_forward(nn::Discriminator<float>& discriminator, const SignalWindow& input,
                             const SignalWindow& candidate) {
  const auto x = nn::stack_windows<float>(std::span<const SignalWindow>(&input, 1));
  const auto y = nn::stack_windows<float>(std::span<const SignalWindow>(&candidate, 1));
  return static_cast<double>(discriminator.forward(x, y, false).values().front());
}

}  // namespace imu2shoe
