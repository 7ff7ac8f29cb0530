// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/tensor.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "imu2shoe/errors.hpp"

namespace imu2shoe::nn {

template <typename T>
std::string Tensor<T>::shape_string() const {
  return fmt::format("({}, {}, {})", batch_, channels_, length_);
}

template <typename T>
Tensor<T> Tensor<T>::concat_channels(const Tensor& a, const Tensor& b) {
  if (a.batch_ != b.batch_ || a.length_ != b.length_) {
    throw ShapeError(fmt::format("cannot concatenate channels of {} and {}", a.shape_string(),
                                 b.shape_string()));
  }
  Tensor out(a.batch_, a.channels_ + b.channels_, a.length_);
  // Channel-major storage makes this two contiguous copies.
  std::copy(a.data_.begin(), a.data_.end(), out.data_.begin());
  std::copy(b.data_.begin(), b.data_.end(),
            out.data_.begin() + static_cast<std::ptrdiff_t>(a.data_.size()));
  return out;
}

template <typename T>
Tensor<T> Tensor<T>::slice_channels(std::size_t first, std::size_t count) const {
  if (first + count > channels_) {
    throw ShapeError(fmt::format("channel slice [{}, {}) out of range for {}", first, first + count,
                                 shape_string()));
  }
  Tensor out(batch_, count, length_);
  const auto stride = batch_ * length_;
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * stride), count * stride,
              out.data_.begin());
  return out;
}

template <typename T>
Tensor<T> Tensor<T>::slice_batch(std::size_t first, std::size_t count) const {
  if (first + count > batch_) {
    throw ShapeError(fmt::format("batch slice [{}, {}) out of range for {}", first, first + count,
                                 shape_string()));
  }
  Tensor out(count, channels_, length_);
  for (std::size_t c = 0; c < channels_; ++c) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((c * batch_ + first) * length_),
                count * length_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(c * count * length_));
  }
  return out;
}

template <typename T>
Tensor<T> Tensor<T>::concat_batch(const Tensor& a, const Tensor& b) {
  if (a.channels_ != b.channels_ || a.length_ != b.length_) {
    throw ShapeError(fmt::format("cannot concatenate batches of {} and {}", a.shape_string(),
                                 b.shape_string()));
  }
  Tensor out(a.batch_ + b.batch_, a.channels_, a.length_);
  for (std::size_t c = 0; c < a.channels_; ++c) {
    auto dst = out.data_.begin() + static_cast<std::ptrdiff_t>(c * out.batch_ * out.length_);
    dst = std::copy_n(a.data_.begin() + static_cast<std::ptrdiff_t>(c * a.batch_ * a.length_),
                      a.batch_ * a.length_, dst);
    std::copy_n(b.data_.begin() + static_cast<std::ptrdiff_t>(c * b.batch_ * b.length_),
                b.batch_ * b.length_, dst);
  }
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace imu2shoe::nn
