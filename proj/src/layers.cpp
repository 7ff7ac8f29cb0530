// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/layers.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

#include "imu2shoe/errors.hpp"

namespace imu2shoe::nn {

namespace {

template <typename T>
using Matrix = typename Tensor<T>::Matrix;

template <typename T>
using RowMap = Eigen::Map<Matrix<T>>;

template <typename T>
using ConstRowMap = Eigen::Map<const Matrix<T>>;

template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
void require_channels(const Layer<T>& layer, const Tensor<T>& x, std::size_t expected) {
  if (x.channels() != expected) {
    throw ShapeError(fmt::format("layer '{}' expects {} input channels, got input {}", layer.name(),
                                 expected, x.shape_string()));
  }
}

// Outputs o with 0 <= o + k - pad < len.
inline std::pair<std::size_t, std::size_t> valid_range(std::size_t k, std::size_t pad, std::size_t len,
                                                       std::size_t out_len) {
  const std::size_t lo = pad > k ? std::min(pad - k, out_len) : 0;
  const std::size_t hi = len + pad > k ? std::min(out_len, len + pad - k) : 0;
  return {lo, std::max(lo, hi)};
}

// col((ci*K + k), b*Lout + o) = x[ci, b, o + k - pad], zero outside.
template <typename T>
void im2col(const Tensor<T>& x, std::size_t kernel, std::size_t pad, std::size_t out_len,
            Matrix<T>& col) {
  const auto batch = x.batch();
  const auto len = x.length();
  col.resize(static_cast<Eigen::Index>(x.channels() * kernel),
             static_cast<Eigen::Index>(batch * out_len));
  for (std::size_t ci = 0; ci < x.channels(); ++ci) {
    for (std::size_t k = 0; k < kernel; ++k) {
      T* row = col.data() + (ci * kernel + k) * batch * out_len;
      const auto [lo, hi] = valid_range(k, pad, len, out_len);
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = x.data() + (ci * batch + b) * len;
        T* dst = row + b * out_len;
        std::fill(dst, dst + lo, T(0));
        std::copy(src + (lo + k - pad), src + (hi + k - pad), dst + lo);
        std::fill(dst + hi, dst + out_len, T(0));
      }
    }
  }
}

// Adjoint of im2col.
template <typename T>
Tensor<T> col2im(const Matrix<T>& col, std::size_t channels, std::size_t batch, std::size_t len,
                 std::size_t kernel, std::size_t pad, std::size_t out_len) {
  Tensor<T> x(batch, channels, len);
  for (std::size_t ci = 0; ci < channels; ++ci) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const T* row = col.data() + (ci * kernel + k) * batch * out_len;
      const auto [lo, hi] = valid_range(k, pad, len, out_len);
      for (std::size_t b = 0; b < batch; ++b) {
        T* dst = x.data() + (ci * batch + b) * len + (lo + k - pad);
        const T* src = row + b * out_len + lo;
        for (std::size_t o = 0; o < hi - lo; ++o) dst[o] += src[o];
      }
    }
  }
  return x;
}

template <typename T>
void init_bias_add(Tensor<T>& y, const Parameter<T>& bias) {
  y.matrix().colwise() +=
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(bias.value.data(),
                                                             static_cast<Eigen::Index>(bias.size()));
}

template <typename T>
void accumulate_bias_grad(Parameter<T>& bias, const Tensor<T>& gy) {
  VectorMap<T>(bias.grad.data(), static_cast<Eigen::Index>(bias.size())) +=
      gy.matrix().rowwise().sum();
}

}  // namespace

template <typename T>
Parameter<T>::Parameter(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
  std::size_t count = 1;
  for (const auto d : shape) count *= d;
  value.assign(count, T(0));
  grad.assign(count, T(0));
}

// ---------------------------------------------------------------- Conv1d

template <typename T>
Conv1d<T>::Conv1d(std::string name, std::size_t in_channels, std::size_t out_channels,
                  std::size_t kernel, std::size_t padding)
    : Layer<T>(name),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      padding_(padding),
      weight_(name + ".weight", {out_channels, in_channels, kernel}),
      bias_(name + ".bias", {out_channels}) {}

template <typename T>
std::size_t Conv1d<T>::output_length(std::size_t input_length) const {
  if (input_length + 2 * padding_ < kernel_) {
    throw ShapeError(fmt::format("layer '{}': input length {} too short for kernel {}", this->name(),
                                 input_length, kernel_));
  }
  return input_length + 2 * padding_ - kernel_ + 1;
}

template <typename T>
Dual<T> Conv1d<T>::forward(Dual<T> input, bool /*training*/) {
  require_channels(*this, input.value, in_);
  batch_ = input.value.batch();
  in_length_ = input.value.length();
  out_length_ = output_length(in_length_);
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                         static_cast<Eigen::Index>(in_ * kernel_));
  Dual<T> out;
  im2col(input.value, kernel_, padding_, out_length_, col_);
  out.value = Tensor<T>::uninitialized(batch_, out_, out_length_);
  out.value.matrix().noalias() = w * col_;
  init_bias_add(out.value, bias_);
  if (input.has_tangent()) {
    im2col(input.tangent, kernel_, padding_, out_length_, tcol_);
    out.tangent = Tensor<T>::uninitialized(batch_, out_, out_length_);
    out.tangent.matrix().noalias() = w * tcol_;
  } else {
    tcol_.resize(0, 0);
  }
  return out;
}

template <typename T>
Dual<T> Conv1d<T>::backward(Dual<T> grad) {
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                         static_cast<Eigen::Index>(in_ * kernel_));
  RowMap<T> gw(weight_.grad.data(), static_cast<Eigen::Index>(out_),
               static_cast<Eigen::Index>(in_ * kernel_));
  Dual<T> gin;
  if (!grad.value.empty()) {
    if (this->param_grads_) {
      gw.noalias() += grad.value.matrix() * col_.transpose();
      accumulate_bias_grad(bias_, grad.value);
    }
    const Matrix<T> gcol = w.transpose() * grad.value.matrix();
    gin.value = col2im<T>(gcol, in_, batch_, in_length_, kernel_, padding_, out_length_);
  }
  if (grad.has_tangent() && tcol_.size() > 0) {
    if (this->param_grads_) gw.noalias() += grad.tangent.matrix() * tcol_.transpose();
    const Matrix<T> gcol = w.transpose() * grad.tangent.matrix();
    gin.tangent = col2im<T>(gcol, in_, batch_, in_length_, kernel_, padding_, out_length_);
  }
  return gin;
}

// ------------------------------------------------------- ConvTranspose1d

template <typename T>
ConvTranspose1d<T>::ConvTranspose1d(std::string name, std::size_t in_channels,
                                    std::size_t out_channels, std::size_t kernel,
                                    std::size_t stride, std::size_t padding,
                                    std::size_t output_padding)
    : Layer<T>(name),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      output_padding_(output_padding),
      weight_(name + ".weight", {in_channels, out_channels, kernel}),
      bias_(name + ".bias", {out_channels}) {}

template <typename T>
std::size_t ConvTranspose1d<T>::output_length(std::size_t input_length) const {
  const auto full = (input_length - 1) * stride_ + kernel_ + output_padding_;
  if (input_length == 0 || full < 2 * padding_ + 1) {
    throw ShapeError(fmt::format("layer '{}': input length {} too short", this->name(), input_length));
  }
  return full - 2 * padding_;
}

namespace {

// y[co, b, i*s - p + k] += cols(co*K + k, b*L + i)
template <typename T>
void scatter_transposed(const Matrix<T>& cols, Tensor<T>& y, std::size_t kernel,
                        std::size_t stride, std::size_t pad, std::size_t in_len) {
  const auto batch = y.batch();
  const auto out_len = static_cast<std::ptrdiff_t>(y.length());
  for (std::size_t co = 0; co < y.channels(); ++co) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const T* row = cols.data() + (co * kernel + k) * batch * in_len;
      for (std::size_t b = 0; b < batch; ++b) {
        T* dst = y.data() + (co * batch + b) * y.length();
        const T* src = row + b * in_len;
        for (std::size_t i = 0; i < in_len; ++i) {
          const auto o = static_cast<std::ptrdiff_t>(i * stride + k) - static_cast<std::ptrdiff_t>(pad);
          if (o >= 0 && o < out_len) dst[o] += src[i];
        }
      }
    }
  }
}

// Adjoint of scatter_transposed.
template <typename T>
Matrix<T> gather_transposed(const Tensor<T>& gy, std::size_t kernel, std::size_t stride,
                            std::size_t pad, std::size_t in_len) {
  const auto batch = gy.batch();
  const auto out_len = static_cast<std::ptrdiff_t>(gy.length());
  Matrix<T> cols(static_cast<Eigen::Index>(gy.channels() * kernel),
                 static_cast<Eigen::Index>(batch * in_len));
  for (std::size_t co = 0; co < gy.channels(); ++co) {
    for (std::size_t k = 0; k < kernel; ++k) {
      T* row = cols.data() + (co * kernel + k) * batch * in_len;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* src = gy.data() + (co * batch + b) * gy.length();
        T* dst = row + b * in_len;
        for (std::size_t i = 0; i < in_len; ++i) {
          const auto o = static_cast<std::ptrdiff_t>(i * stride + k) - static_cast<std::ptrdiff_t>(pad);
          dst[i] = (o >= 0 && o < out_len) ? src[o] : T(0);
        }
      }
    }
  }
  return cols;
}

}  // namespace

template <typename T>
Dual<T> ConvTranspose1d<T>::forward(Dual<T> input, bool /*training*/) {
  require_channels(*this, input.value, in_);
  const auto batch = input.value.batch();
  const auto in_len = input.value.length();
  out_length_ = output_length(in_len);
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(in_),
                         static_cast<Eigen::Index>(out_ * kernel_));
  Dual<T> out;
  {
    const Matrix<T> cols = w.transpose() * input.value.matrix();
    out.value = Tensor<T>(batch, out_, out_length_);
    scatter_transposed(cols, out.value, kernel_, stride_, padding_, in_len);
    init_bias_add(out.value, bias_);
  }
  if (input.has_tangent()) {
    const Matrix<T> cols = w.transpose() * input.tangent.matrix();
    out.tangent = Tensor<T>(batch, out_, out_length_);
    scatter_transposed(cols, out.tangent, kernel_, stride_, padding_, in_len);
  }
  input_ = std::move(input.value);
  tinput_ = std::move(input.tangent);
  return out;
}

template <typename T>
Dual<T> ConvTranspose1d<T>::backward(Dual<T> grad) {
  const auto in_len = input_.length();
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(in_),
                         static_cast<Eigen::Index>(out_ * kernel_));
  RowMap<T> gw(weight_.grad.data(), static_cast<Eigen::Index>(in_),
               static_cast<Eigen::Index>(out_ * kernel_));
  Dual<T> gin;
  if (!grad.value.empty()) {
    const Matrix<T> gcols = gather_transposed(grad.value, kernel_, stride_, padding_, in_len);
    if (this->param_grads_) {
      gw.noalias() += input_.matrix() * gcols.transpose();
      accumulate_bias_grad(bias_, grad.value);
    }
    gin.value = Tensor<T>::uninitialized(input_.batch(), in_, in_len);
    gin.value.matrix().noalias() = w * gcols;
  }
  if (grad.has_tangent() && !tinput_.empty()) {
    const Matrix<T> gcols = gather_transposed(grad.tangent, kernel_, stride_, padding_, in_len);
    if (this->param_grads_) gw.noalias() += tinput_.matrix() * gcols.transpose();
    gin.tangent = Tensor<T>::uninitialized(input_.batch(), in_, in_len);
    gin.tangent.matrix().noalias() = w * gcols;
  }
  return gin;
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::string name, std::size_t in_features, std::size_t out_features)
    : Layer<T>(name),
      in_(in_features),
      out_(out_features),
      weight_(name + ".weight", {out_features, in_features}),
      bias_(name + ".bias", {out_features}) {}

template <typename T>
Dual<T> Linear<T>::forward(Dual<T> input, bool /*training*/) {
  require_channels(*this, input.value, in_);
  if (input.value.length() != 1) {
    throw ShapeError(fmt::format("layer '{}' expects flattened input, got {}", this->name(),
                                 input.value.shape_string()));
  }
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                         static_cast<Eigen::Index>(in_));
  const auto batch = input.value.batch();
  Dual<T> out;
  out.value = Tensor<T>::uninitialized(batch, out_, 1);
  out.value.matrix().noalias() = w * input.value.matrix();
  init_bias_add(out.value, bias_);
  if (input.has_tangent()) {
    out.tangent = Tensor<T>::uninitialized(batch, out_, 1);
    out.tangent.matrix().noalias() = w * input.tangent.matrix();
  }
  input_ = std::move(input.value);
  tinput_ = std::move(input.tangent);
  return out;
}

template <typename T>
Dual<T> Linear<T>::backward(Dual<T> grad) {
  const ConstRowMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                         static_cast<Eigen::Index>(in_));
  RowMap<T> gw(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  Dual<T> gin;
  if (!grad.value.empty()) {
    if (this->param_grads_) {
      gw.noalias() += grad.value.matrix() * input_.matrix().transpose();
      accumulate_bias_grad(bias_, grad.value);
    }
    gin.value = Tensor<T>::uninitialized(input_.batch(), in_, 1);
    gin.value.matrix().noalias() = w.transpose() * grad.value.matrix();
  }
  if (grad.has_tangent() && !tinput_.empty()) {
    if (this->param_grads_) gw.noalias() += grad.tangent.matrix() * tinput_.matrix().transpose();
    gin.tangent = Tensor<T>::uninitialized(input_.batch(), in_, 1);
    gin.tangent.matrix().noalias() = w.transpose() * grad.tangent.matrix();
  }
  return gin;
}

// ------------------------------------------------------------- MaxPool1d

template <typename T>
Dual<T> MaxPool1d<T>::forward(Dual<T> input, bool /*training*/) {
  const auto& x = input.value;
  batch_ = x.batch();
  channels_ = x.channels();
  in_length_ = x.length();
  const auto out_len = in_length_ / 2;
  if (out_len == 0) {
    throw ShapeError(fmt::format("layer '{}': cannot pool length {}", this->name(), in_length_));
  }
  Dual<T> out;
  out.value = Tensor<T>::uninitialized(batch_, channels_, out_len);
  pick_.assign(batch_ * channels_ * out_len, 0);
  const auto rows = batch_ * channels_;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = x.data() + r * in_length_;
    T* dst = out.value.data() + r * out_len;
    unsigned char* pick = pick_.data() + r * out_len;
    for (std::size_t i = 0; i < out_len; ++i) {
      const bool second = src[2 * i + 1] > src[2 * i];
      pick[i] = second ? 1 : 0;
      dst[i] = src[2 * i + (second ? 1 : 0)];
    }
  }
  if (input.has_tangent()) {
    out.tangent = Tensor<T>::uninitialized(batch_, channels_, out_len);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* src = input.tangent.data() + r * in_length_;
      T* dst = out.tangent.data() + r * out_len;
      const unsigned char* pick = pick_.data() + r * out_len;
      for (std::size_t i = 0; i < out_len; ++i) dst[i] = src[2 * i + pick[i]];
    }
  }
  return out;
}

template <typename T>
Dual<T> MaxPool1d<T>::backward(Dual<T> grad) {
  const auto out_len = in_length_ / 2;
  const auto rows = batch_ * channels_;
  auto route = [&](const Tensor<T>& g) {
    Tensor<T> gx(batch_, channels_, in_length_);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* src = g.data() + r * out_len;
      T* dst = gx.data() + r * in_length_;
      const unsigned char* pick = pick_.data() + r * out_len;
      for (std::size_t i = 0; i < out_len; ++i) dst[2 * i + pick[i]] = src[i];
    }
    return gx;
  };
  Dual<T> gin;
  if (!grad.value.empty()) gin.value = route(grad.value);
  if (grad.has_tangent()) gin.tangent = route(grad.tangent);
  return gin;
}

// ------------------------------------------------------------ Upsample1d

template <typename T>
Dual<T> Upsample1d<T>::forward(Dual<T> input, bool /*training*/) {
  auto up = [](const Tensor<T>& x) {
    auto y = Tensor<T>::uninitialized(x.batch(), x.channels(), 2 * x.length());
    for (std::size_t i = 0; i < x.size(); ++i) {
      y.data()[2 * i] = x.data()[i];
      y.data()[2 * i + 1] = x.data()[i];
    }
    return y;
  };
  Dual<T> out;
  out.value = up(input.value);
  if (input.has_tangent()) out.tangent = up(input.tangent);
  return out;
}

template <typename T>
Dual<T> Upsample1d<T>::backward(Dual<T> grad) {
  auto down = [](const Tensor<T>& g) {
    auto x = Tensor<T>::uninitialized(g.batch(), g.channels(), g.length() / 2);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = g.data()[2 * i] + g.data()[2 * i + 1];
    return x;
  };
  Dual<T> gin;
  if (!grad.value.empty()) gin.value = down(grad.value);
  if (grad.has_tangent()) gin.tangent = down(grad.tangent);
  return gin;
}

// ----------------------------------------------------------- Elementwise

template <typename T>
Elementwise<T>::Elementwise(std::string name, Activation fn, T leaky_slope)
    : Layer<T>(std::move(name)), fn_(fn), slope_(leaky_slope) {}

template <typename T>
std::string_view Elementwise<T>::kind() const {
  switch (fn_) {
    case Activation::kLeakyRelu:
      return "LeakyReLU";
    case Activation::kSigmoid:
      return "Sigmoid";
    case Activation::kTanh:
      return "Tanh";
    case Activation::kUnitRemap:
      return "UnitRemap";
  }
  return "Elementwise";
}

template <typename T>
Dual<T> Elementwise<T>::forward(Dual<T> input, bool /*training*/) {
  Dual<T> out;
  out.value = Tensor<T>::uninitialized(input.value.batch(), input.value.channels(), input.value.length());
  const T* x = input.value.data();
  T* y = out.value.data();
  const auto n = input.value.size();
  switch (fn_) {
    case Activation::kLeakyRelu:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : slope_ * x[i];
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] >= T(0)) {
          y[i] = T(1) / (T(1) + std::exp(-x[i]));
        } else {
          const T e = std::exp(x[i]);
          y[i] = e / (T(1) + e);
        }
      }
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
      break;
    case Activation::kUnitRemap:
      for (std::size_t i = 0; i < n; ++i) y[i] = T(0.5) * x[i] + T(0.5);
      break;
  }
  if (input.has_tangent()) {
    out.tangent = input.tangent;
    T* ty = out.tangent.data();
    for (std::size_t i = 0; i < n; ++i) {
      switch (fn_) {
        case Activation::kLeakyRelu:
          ty[i] *= x[i] > T(0) ? T(1) : slope_;
          break;
        case Activation::kSigmoid:
          ty[i] *= y[i] * (T(1) - y[i]);
          break;
        case Activation::kTanh:
          ty[i] *= T(1) - y[i] * y[i];
          break;
        case Activation::kUnitRemap:
          ty[i] *= T(0.5);
          break;
      }
    }
  }
  cached_ = fn_ == Activation::kLeakyRelu ? std::move(input.value) : out.value;
  tinput_ = std::move(input.tangent);
  return out;
}

template <typename T>
Dual<T> Elementwise<T>::backward(Dual<T> grad) {
  const auto n = cached_.size();
  const T* c = cached_.data();
  // out[i] = f'(x_i) * g[i]
  auto apply_first = [&](const T* g, T* out) {
    switch (fn_) {
      case Activation::kLeakyRelu:
        for (std::size_t i = 0; i < n; ++i) out[i] = (c[i] > T(0) ? T(1) : slope_) * g[i];
        break;
      case Activation::kSigmoid:
        for (std::size_t i = 0; i < n; ++i) out[i] = c[i] * (T(1) - c[i]) * g[i];
        break;
      case Activation::kTanh:
        for (std::size_t i = 0; i < n; ++i) out[i] = (T(1) - c[i] * c[i]) * g[i];
        break;
      case Activation::kUnitRemap:
        for (std::size_t i = 0; i < n; ++i) out[i] = T(0.5) * g[i];
        break;
    }
  };
  const bool curved = fn_ == Activation::kSigmoid || fn_ == Activation::kTanh;
  const bool dual = grad.has_tangent() && !tinput_.empty();
  Dual<T> gin;
  if (!grad.value.empty()) {
    gin.value = Tensor<T>::uninitialized(cached_.batch(), cached_.channels(), cached_.length());
    apply_first(grad.value.data(), gin.value.data());
  } else if (dual && curved) {
    gin.value = Tensor<T>(cached_.batch(), cached_.channels(), cached_.length());
  }
  if (dual && curved) {
    // out[i] += f''(x_i) * tx[i] * gt[i]
    T* gx = gin.value.data();
    const T* gty = grad.tangent.data();
    const T* tx = tinput_.data();
    if (fn_ == Activation::kSigmoid) {
      for (std::size_t i = 0; i < n; ++i) gx[i] += c[i] * (T(1) - c[i]) * (T(1) - T(2) * c[i]) * tx[i] * gty[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) gx[i] += T(-2) * c[i] * (T(1) - c[i] * c[i]) * tx[i] * gty[i];
    }
  }
  if (dual) {
    gin.tangent = Tensor<T>::uninitialized(cached_.batch(), cached_.channels(), cached_.length());
    apply_first(grad.tangent.data(), gin.tangent.data());
  }
  return gin;
}

// --------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(std::string name, double p, Rng* rng)
    : Layer<T>(std::move(name)), p_(p), rng_(rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError(fmt::format("dropout rate {} not in [0, 1)", p));
}

template <typename T>
Dual<T> Dropout<T>::forward(Dual<T> input, bool training) {
  active_ = training && p_ > 0.0;
  if (!active_) return input;
  const auto n = input.value.size();
  if (!hold_ || mask_.size() != n) {
    mask_.resize(n);
    const T keep_scale = T(1.0 / (1.0 - p_));
    for (auto& m : mask_) m = rng_->uniform01() < p_ ? T(0) : keep_scale;
  }
  for (std::size_t i = 0; i < n; ++i) input.value.data()[i] *= mask_[i];
  if (input.has_tangent()) {
    for (std::size_t i = 0; i < n; ++i) input.tangent.data()[i] *= mask_[i];
  }
  return input;
}

template <typename T>
Dual<T> Dropout<T>::backward(Dual<T> grad) {
  if (!active_) return grad;
  if (!grad.value.empty()) {
    for (std::size_t i = 0; i < mask_.size(); ++i) grad.value.data()[i] *= mask_[i];
  }
  if (grad.has_tangent()) {
    for (std::size_t i = 0; i < mask_.size(); ++i) grad.tangent.data()[i] *= mask_[i];
  }
  return grad;
}

// --------------------------------------------------------------- Flatten

template <typename T>
Dual<T> Flatten<T>::forward(Dual<T> input, bool /*training*/) {
  channels_ = input.value.channels();
  length_ = input.value.length();
  auto flat = [&](const Tensor<T>& x) {
    auto y = Tensor<T>::uninitialized(x.batch(), channels_ * length_, 1);
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t l = 0; l < length_; ++l) y.at(b, c * length_ + l, 0) = x.at(b, c, l);
      }
    }
    return y;
  };
  Dual<T> out;
  out.value = flat(input.value);
  if (input.has_tangent()) out.tangent = flat(input.tangent);
  return out;
}

template <typename T>
Dual<T> Flatten<T>::backward(Dual<T> grad) {
  auto unflat = [&](const Tensor<T>& g) {
    auto x = Tensor<T>::uninitialized(g.batch(), channels_, length_);
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t b = 0; b < g.batch(); ++b) {
        for (std::size_t l = 0; l < length_; ++l) x.at(b, c, l) = g.at(b, c * length_ + l, 0);
      }
    }
    return x;
  };
  Dual<T> gin;
  if (!grad.value.empty()) gin.value = unflat(grad.value);
  if (grad.has_tangent()) gin.tangent = unflat(grad.tangent);
  return gin;
}

// ------------------------------------------------------------ Sequential

template <typename T>
Dual<T> Sequential<T>::forward(Dual<T> x, bool training, ForwardTrace* trace) {
  for (auto& layer : layers_) {
    x = layer->forward(std::move(x), training);
    if (trace) {
      trace->push_back({layer->name(), std::string(layer->kind()), x.value.channels(),
                        x.value.length()});
    }
  }
  return x;
}

template <typename T>
Dual<T> Sequential<T>::backward(Dual<T> grad) {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(std::move(grad));
  return grad;
}

template <typename T>
std::vector<Parameter<T>*> Sequential<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) {
    for (auto* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

template struct Parameter<float>;
template struct Parameter<double>;
template class Conv1d<float>;
template class Conv1d<double>;
template class ConvTranspose1d<float>;
template class ConvTranspose1d<double>;
template class Linear<float>;
template class Linear<double>;
template class MaxPool1d<float>;
template class MaxPool1d<double>;
template class Upsample1d<float>;
template class Upsample1d<double>;
template class Elementwise<float>;
template class Elementwise<double>;
template class Dropout<float>;
template class Dropout<double>;
template class Flatten<float>;
template class Flatten<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace imu2shoe::nn
