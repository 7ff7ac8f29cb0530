// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace imu2shoe::nn {

/// Aligned allocator whose value-less construct() leaves scalars uninitialized.
template <typename T>
struct DefaultInitAllocator : Eigen::aligned_allocator<T> {
  template <typename U>
  struct rebind {
    using other = DefaultInitAllocator<U>;
  };
  DefaultInitAllocator() = default;
  template <typename U>
  DefaultInitAllocator(const DefaultInitAllocator<U>&) noexcept {}

  template <typename U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(p)) U;
  }
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

/// Batch of multichannel sequences with logical shape (batch, channels, length).
///
/// Storage is channel-major, [channel][batch][sample], so a whole layer
/// activation is a (channels x batch*length) row-major matrix and 1D
/// convolutions reduce to a single GEMM per layer. Dense features use
/// length 1, giving a (features x batch) matrix.
template <typename T>
class Tensor {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  /// Over-aligned so vectorized reductions see the same alignment every run.
  using Storage = std::vector<T, DefaultInitAllocator<T>>;

  Tensor() = default;
  Tensor(std::size_t batch, std::size_t channels, std::size_t length, T fill = T(0))
      : batch_(batch), channels_(channels), length_(length), data_(batch * channels * length, fill) {}

  /// Contents are indeterminate; every element must be written before it is read.
  [[nodiscard]] static Tensor uninitialized(std::size_t batch, std::size_t channels, std::size_t length) {
    Tensor t;
    t.batch_ = batch;
    t.channels_ = channels;
    t.length_ = length;
    t.data_ = Storage(batch * channels * length);
    return t;
  }

  [[nodiscard]] std::size_t batch() const noexcept { return batch_; }
  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t length() const noexcept { return length_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] bool same_shape(const Tensor& o) const noexcept {
    return batch_ == o.batch_ && channels_ == o.channels_ && length_ == o.length_;
  }
  [[nodiscard]] std::string shape_string() const;

  [[nodiscard]] T& at(std::size_t b, std::size_t c, std::size_t t) {
    return data_[(c * batch_ + b) * length_ + t];
  }
  [[nodiscard]] T at(std::size_t b, std::size_t c, std::size_t t) const {
    return data_[(c * batch_ + b) * length_ + t];
  }

  [[nodiscard]] T* data() noexcept { return data_.data(); }
  [[nodiscard]] const T* data() const noexcept { return data_.data(); }
  [[nodiscard]] Storage& values() noexcept { return data_; }
  [[nodiscard]] const Storage& values() const noexcept { return data_; }

  /// (channels x batch*length) view.
  [[nodiscard]] MatrixMap matrix() {
    return MatrixMap(data_.data(), static_cast<Eigen::Index>(channels_),
                     static_cast<Eigen::Index>(batch_ * length_));
  }
  [[nodiscard]] ConstMatrixMap matrix() const {
    return ConstMatrixMap(data_.data(), static_cast<Eigen::Index>(channels_),
                          static_cast<Eigen::Index>(batch_ * length_));
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  /// Channel-wise concatenation of equal (batch, length) tensors.
  [[nodiscard]] static Tensor concat_channels(const Tensor& a, const Tensor& b);
  /// Channels [first, first + count).
  [[nodiscard]] Tensor slice_channels(std::size_t first, std::size_t count) const;
  /// Examples [first, first + count).
  [[nodiscard]] Tensor slice_batch(std::size_t first, std::size_t count) const;
  /// Batch-wise concatenation of equal (channels, length) tensors.
  [[nodiscard]] static Tensor concat_batch(const Tensor& a, const Tensor& b);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  Storage data_;
};

/// Primal value plus an optional forward-mode tangent.
///
/// Layers propagate (value, tangent) together; the backward pass of a dual
/// forward returns cotangents for both, which is what differentiating a
/// directional derivative with respect to parameters requires.
template <typename T>
struct Dual {
  Tensor<T> value;
  Tensor<T> tangent;  ///< empty when no tangent is carried

  [[nodiscard]] bool has_tangent() const noexcept { return !tangent.empty(); }
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace imu2shoe::nn
