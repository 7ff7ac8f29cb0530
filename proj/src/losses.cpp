// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/losses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

namespace {

void require_nonempty(std::span<const double> v, const char* what) {
  if (v.empty()) throw UsageError(fmt::format("{}: empty score list", what));
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw UsageError(fmt::format("{}: {} real scores vs {} fake scores", what, b.size(), a.size()));
  }
}

double clamp_prob(double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); }

// d/dp log(clamp(p)); zero where the clamp is active.
double dlog(double p) { return (p < kLogClamp || p > 1.0 - kLogClamp) ? 0.0 : 1.0 / p; }

double mean(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(GeneratorLossMode mode) {
  return mode == GeneratorLossMode::kNonSaturating ? "non-saturating" : "saturating";
}

GeneratorLossMode parse_generator_loss_mode(std::string_view text) {
  if (text == "non-saturating") return GeneratorLossMode::kNonSaturating;
  if (text == "saturating") return GeneratorLossMode::kSaturating;
  throw ConfigError(fmt::format("unknown generator loss mode '{}'", text));
}

bool LossReport::finite() const {
  return std::isfinite(generator_loss) && std::isfinite(discriminator_loss) &&
         std::isfinite(gradient_penalty) && std::isfinite(d_real_mean) && std::isfinite(d_fake_mean);
}

LossGradient gan_discriminator_loss_grad(std::span<const double> d_real,
                                         std::span<const double> d_fake) {
  require_nonempty(d_real, "gan_discriminator_loss");
  require_same_length(d_fake, d_real, "gan_discriminator_loss");
  const auto n = static_cast<double>(d_real.size());
  LossGradient out;
  out.d_real.resize(d_real.size());
  out.d_fake.resize(d_fake.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    sum += std::log(clamp_prob(d_real[i])) + std::log(clamp_prob(1.0 - d_fake[i]));
    out.d_real[i] = -dlog(d_real[i]) / n;
    out.d_fake[i] = dlog(1.0 - d_fake[i]) / n;
  }
  out.value = -sum / n;
  return out;
}

LossGradient gan_generator_loss_grad(std::span<const double> d_fake, GeneratorLossMode mode) {
  require_nonempty(d_fake, "gan_generator_loss");
  const auto n = static_cast<double>(d_fake.size());
  LossGradient out;
  out.d_fake.resize(d_fake.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    if (mode == GeneratorLossMode::kNonSaturating) {
      sum -= std::log(clamp_prob(d_fake[i]));
      out.d_fake[i] = -dlog(d_fake[i]) / n;
    } else {
      sum += std::log(clamp_prob(1.0 - d_fake[i]));
      out.d_fake[i] = -dlog(1.0 - d_fake[i]) / n;
    }
  }
  out.value = sum / n;
  return out;
}

LossGradient wgan_generator_loss_grad(std::span<const double> critic_fake) {
  require_nonempty(critic_fake, "wgan_generator_loss");
  const auto n = static_cast<double>(critic_fake.size());
  LossGradient out;
  out.value = -mean(critic_fake);
  out.d_fake.assign(critic_fake.size(), -1.0 / n);
  return out;
}

LossGradient wgan_critic_loss_grad(std::span<const double> critic_fake,
                                   std::span<const double> critic_real) {
  require_nonempty(critic_fake, "wgan_discriminator_loss");
  require_same_length(critic_fake, critic_real, "wgan_discriminator_loss");
  const auto n = static_cast<double>(critic_fake.size());
  LossGradient out;
  out.value = mean(critic_fake) - mean(critic_real);
  out.d_fake.assign(critic_fake.size(), 1.0 / n);
  out.d_real.assign(critic_real.size(), -1.0 / n);
  return out;
}

double gan_discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  return gan_discriminator_loss_grad(d_real, d_fake).value;
}

double gan_generator_loss(std::span<const double> d_fake, GeneratorLossMode mode) {
  return gan_generator_loss_grad(d_fake, mode).value;
}

double wgan_generator_loss(std::span<const double> critic_fake) {
  return wgan_generator_loss_grad(critic_fake).value;
}

double wgan_discriminator_loss(std::span<const double> critic_fake,
                               std::span<const double> critic_real, double gp, double lambda) {
  if (gp < 0.0) throw UsageError("gradient penalty must be non-negative");
  return wgan_critic_loss_grad(critic_fake, critic_real).value + lambda * gp;
}

SignalWindow interpolate(const SignalWindow& y, const SignalWindow& g, double alpha) {
  if (y.channels() != g.channels() || y.channel_names() != g.channel_names()) {
    throw ShapeError(fmt::format("cannot interpolate windows of {} and {} channels", y.channels(),
                                 g.channels()));
  }
  if (y.units() != g.units()) throw UsageError("cannot interpolate windows in different units");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError(fmt::format("interpolation weight {} not in [0, 1]", alpha));
  }
  std::vector<double> out(y.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = alpha * y.data()[i] + (1.0 - alpha) * g.data()[i];
  }
  if (y.units() == Units::kScaled) {
    // Rounding can step a hair outside [0, 1] when both ends sit on the boundary.
    for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
  }
  return {y.channel_names(), std::move(out), y.units()};
}

template <typename T>
nn::Tensor<T> interpolate(const nn::Tensor<T>& y, const nn::Tensor<T>& g, std::span<const T> alpha) {
  if (!y.same_shape(g)) {
    throw ShapeError(fmt::format("cannot interpolate {} and {}", y.shape_string(), g.shape_string()));
  }
  if (alpha.size() != y.batch()) {
    throw UsageError(fmt::format("{} interpolation weights for a batch of {}", alpha.size(), y.batch()));
  }
  nn::Tensor<T> out(y.batch(), y.channels(), y.length());
  for (std::size_t c = 0; c < y.channels(); ++c) {
    for (std::size_t b = 0; b < y.batch(); ++b) {
      const T a = alpha[b];
      for (std::size_t l = 0; l < y.length(); ++l) {
        out.at(b, c, l) = a * y.at(b, c, l) + (T(1) - a) * g.at(b, c, l);
      }
    }
  }
  return out;
}

template <typename T>
std::vector<double> scores_of(const nn::Tensor<T>& scores) {
  std::vector<double> out(scores.batch());
  for (std::size_t b = 0; b < scores.batch(); ++b) out[b] = static_cast<double>(scores.at(b, 0, 0));
  return out;
}

template <typename T>
GradientPenalty gradient_penalty(nn::Critic<T>& critic, const nn::Tensor<T>& x,
                                 const nn::Tensor<T>& y_interp, T param_grad_scale, bool training) {
  if (critic.bounded()) {
    throw UsageError("gradient penalty needs an unbounded critic (WGAN-GP regime, no sigmoid head)");
  }
  const auto batch = y_interp.batch();
  if (batch == 0) throw UsageError("gradient penalty of an empty batch");

  // Input gradient of each example's score; parameter gradients from this
  // pass are discarded by restoring the snapshot.
  const auto params = critic.parameters();
  std::vector<std::vector<T>> saved;
  saved.reserve(params.size());
  for (auto* p : params) saved.push_back(p->grad);

  critic.hold_noise(false);
  const auto scores = critic.score(x, nn::Dual<T>{y_interp, {}}, training);
  critic.hold_noise(true);
  nn::Dual<T> seed;
  seed.value = nn::Tensor<T>(batch, 1, 1, T(1));
  critic.set_param_grads(false);
  auto grad_y = critic.backward(std::move(seed)).value;
  critic.set_param_grads(true);
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->grad = std::move(saved[i]);
  if (grad_y.empty()) grad_y = nn::Tensor<T>(batch, y_interp.channels(), y_interp.length());

  GradientPenalty out;
  out.gradient_norms.resize(batch);
  std::vector<double> sq(batch, 0.0);
  for (std::size_t c = 0; c < grad_y.channels(); ++c) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < grad_y.length(); ++l) {
        const auto v = static_cast<double>(grad_y.at(b, c, l));
        sq[b] += v * v;
      }
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    out.gradient_norms[b] = std::sqrt(sq[b]);
    const double d = out.gradient_norms[b] - 1.0;
    out.penalty += d * d;
  }
  out.penalty /= static_cast<double>(batch);

  if (param_grad_scale != T(0)) {
    // d/dtheta of sum_i w_i (||g_i|| - 1)^2 equals d/dtheta of
    // sum_i c_i <g_i(theta), v_i> with v_i = g_i frozen and
    // c_i = 2 w_i (||g_i|| - 1) / ||g_i||. The inner product is the
    // directional derivative of the score along v_i, i.e. the tangent
    // output of a forward pass seeded with v_i.
    nn::Tensor<T> coeff(batch, 1, 1);
    const double w = static_cast<double>(param_grad_scale) / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const double n = out.gradient_norms[b];
      coeff.at(b, 0, 0) = n > 0.0 ? static_cast<T>(2.0 * w * (n - 1.0) / n) : T(0);
    }
    (void)critic.score(x, nn::Dual<T>{y_interp, grad_y}, training);
    nn::Dual<T> cot;
    cot.tangent = std::move(coeff);
    (void)critic.backward(std::move(cot));
  }
  critic.hold_noise(false);
  return out;
}

template nn::Tensor<float> interpolate<float>(const nn::Tensor<float>&, const nn::Tensor<float>&,
                                              std::span<const float>);
template nn::Tensor<double> interpolate<double>(const nn::Tensor<double>&,
                                                const nn::Tensor<double>&, std::span<const double>);
template std::vector<double> scores_of<float>(const nn::Tensor<float>&);
template std::vector<double> scores_of<double>(const nn::Tensor<double>&);
template GradientPenalty gradient_penalty<float>(nn::Critic<float>&, const nn::Tensor<float>&,
                                                 const nn::Tensor<float>&, float, bool);
template GradientPenalty gradient_penalty<double>(nn::Critic<double>&, const nn::Tensor<double>&,
                                                  const nn::Tensor<double>&, double, bool);

}  // namespace imu2shoe
