// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "imu2shoe/nets.hpp"
#include "imu2shoe/signals.hpp"
#include "imu2shoe/tensor.hpp"

namespace imu2shoe {

// Every network minimizes its own loss:
//   discriminator (GAN):  -mean[log D(x,y) + log(1 - D(x,G(x)))]
//   generator (GAN):      -mean log D(x,G(x))       non-saturating (default)
//                          mean log(1 - D(x,G(x)))  saturating
//   generator (WGAN-GP):  -mean D(x,G(x))
//   critic (WGAN-GP):      mean D(x,G(x)) - mean D(x,y) + lambda * GP

/// Probabilities are clamped to [kLogClamp, 1 - kLogClamp] before taking logs.
inline constexpr double kLogClamp = 1e-7;

enum class GeneratorLossMode { kNonSaturating, kSaturating };

[[nodiscard]] std::string_view to_string(GeneratorLossMode mode);
[[nodiscard]] GeneratorLossMode parse_generator_loss_mode(std::string_view text);

/// Per-epoch training diagnostics, one row of the training log.
struct LossReport {
  double generator_loss = 0.0;
  double discriminator_loss = 0.0;
  double gradient_penalty = 0.0;  ///< zero in the GAN regime
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;

  [[nodiscard]] bool finite() const;
};

/// Loss value plus its derivative w.r.t. each score.
struct LossGradient {
  double value = 0.0;
  std::vector<double> d_real;  ///< dL/d score_real_i (empty if unused)
  std::vector<double> d_fake;  ///< dL/d score_fake_i
};

[[nodiscard]] LossGradient gan_discriminator_loss_grad(std::span<const double> d_real,
                                                       std::span<const double> d_fake);
[[nodiscard]] LossGradient gan_generator_loss_grad(
    std::span<const double> d_fake, GeneratorLossMode mode = GeneratorLossMode::kNonSaturating);
[[nodiscard]] LossGradient wgan_generator_loss_grad(std::span<const double> critic_fake);
/// Critic loss without the penalty term: mean(fake) - mean(real).
[[nodiscard]] LossGradient wgan_critic_loss_grad(std::span<const double> critic_fake,
                                                 std::span<const double> critic_real);

[[nodiscard]] double gan_discriminator_loss(std::span<const double> d_real,
                                            std::span<const double> d_fake);
[[nodiscard]] double gan_generator_loss(std::span<const double> d_fake,
                                        GeneratorLossMode mode = GeneratorLossMode::kNonSaturating);
[[nodiscard]] double wgan_generator_loss(std::span<const double> critic_fake);
[[nodiscard]] double wgan_discriminator_loss(std::span<const double> critic_fake,
                                             std::span<const double> critic_real, double gp,
                                             double lambda);

/// alpha * y + (1 - alpha) * g.
[[nodiscard]] SignalWindow interpolate(const SignalWindow& y, const SignalWindow& g, double alpha);

/// Batched interpolation with one alpha per example.
template <typename T>
[[nodiscard]] nn::Tensor<T> interpolate(const nn::Tensor<T>& y, const nn::Tensor<T>& g,
                                        std::span<const T> alpha);

struct GradientPenalty {
  double penalty = 0.0;                 ///< mean over the batch of (||grad||_2 - 1)^2
  std::vector<double> gradient_norms;   ///< ||grad_y D(x_i, y_i)||_2 per example
};

/// Gradient penalty of `critic` at the candidates `y_interp`, differentiating
/// with respect to the candidate only.
///
/// When `param_grad_scale` is non-zero, `param_grad_scale * dGP/dtheta` is
/// added to the critic's parameter gradients (double backpropagation via a
/// Jacobian-vector product through the critic). Gradients the critic held
/// before the call are otherwise left untouched. Bounded critics are rejected.
template <typename T>
GradientPenalty gradient_penalty(nn::Critic<T>& critic, const nn::Tensor<T>& x,
                                 const nn::Tensor<T>& y_interp, T param_grad_scale,
                                 bool training);

/// Column of per-example scores as doubles.
template <typename T>
[[nodiscard]] std::vector<double> scores_of(const nn::Tensor<T>& scores);

}  // namespace imu2shoe
