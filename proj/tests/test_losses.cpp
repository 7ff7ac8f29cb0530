// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/losses.hpp"
#include "imu2shoe/rng.hpp"
#include "test_critics.hpp"

using namespace imu2shoe;
using nn::Tensor;

namespace {
using V = std::vector<double>;
constexpr double kTol = 1e-6;
}  // namespace

TEST_CASE("gan discriminator loss examples") {
  CHECK(std::abs(gan_discriminator_loss(V{0.5}, V{0.5}) - 1.3862944) < kTol);
  CHECK(std::abs(gan_discriminator_loss(V{0.5}, V{0.5}) - 2.0 * std::log(2.0)) < 1e-12);
  CHECK(std::abs(gan_discriminator_loss(V{0.9, 0.8}, V{0.1, 0.2}) -
                 -(std::log(0.9) + std::log(0.9) + std::log(0.8) + std::log(0.8)) / 2.0) < 1e-12);
  CHECK(std::abs(gan_discriminator_loss(V{0.9, 0.8}, V{0.1, 0.2}) - 0.3285040669720361) < kTol);
  double previous = 1e9;
  for (const double eps : {1e-2, 1e-4, 1e-6}) {
    const double v = gan_discriminator_loss(V{1.0 - eps}, V{eps});
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 3e-6);
  CHECK_THROWS_AS((void)gan_discriminator_loss(V{}, V{}), UsageError);
  CHECK_THROWS_AS((void)gan_discriminator_loss(V{0.5}, V{0.5, 0.5}), UsageError);
}

TEST_CASE("log arguments are clamped") {
  const double v = gan_discriminator_loss(V{0.0}, V{1.0});
  CHECK(std::isfinite(v));
  CHECK(std::abs(v + 2.0 * std::log(kLogClamp)) < 1e-9);
  CHECK(std::isfinite(gan_generator_loss(V{0.0})));
}

TEST_CASE("gan generator loss examples") {
  CHECK(std::abs(gan_generator_loss(V{0.5}) - 0.6931472) < kTol);
  CHECK(gan_generator_loss(V{1.0 - 1e-6}) < 2e-6);
  CHECK(std::abs(gan_generator_loss(V{0.25, 0.75}, GeneratorLossMode::kSaturating) - -0.8370) < 1e-4);
  CHECK(std::abs(gan_generator_loss(V{0.25, 0.75}, GeneratorLossMode::kSaturating) -
                 0.5 * (std::log(0.75) + std::log(0.25))) < 1e-12);
  CHECK_THROWS_AS((void)gan_generator_loss(V{}), UsageError);
}

TEST_CASE("wgan losses examples") {
  CHECK(std::abs(wgan_generator_loss(V{0.7}) - -0.7) < kTol);
  CHECK(std::abs(wgan_generator_loss(V{1.0, -1.0})) < kTol);
  CHECK(std::abs(wgan_generator_loss(V{2.5, 0.5, -1.0}) - -2.0 / 3.0) < kTol);
  CHECK(std::abs(wgan_discriminator_loss(V{0.0}, V{1.0}, 0.0, 15.0) - -1.0) < kTol);
  CHECK(std::abs(wgan_discriminator_loss(V{0.3, -0.2}, V{0.3, -0.2}, 0.0, 15.0)) < kTol);
  CHECK(std::abs(wgan_discriminator_loss(V{0.2}, V{0.8}, 0.04, 15.0)) < kTol);
  CHECK_THROWS_AS((void)wgan_discriminator_loss(V{0.2}, V{0.8, 0.1}, 0.0, 1.0), UsageError);
  CHECK_THROWS_AS((void)wgan_generator_loss(V{}), UsageError);
}

TEST_CASE("wgan discriminator loss is linear in lambda") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const V fake{rng.normal(), rng.normal()};
    const V real{rng.normal(), rng.normal()};
    const double gp = rng.uniform(0.0, 2.0);
    const double l0 = wgan_discriminator_loss(fake, real, gp, 0.0);
    const double l1 = wgan_discriminator_loss(fake, real, gp, 1.0);
    const double lam = rng.uniform(0.0, 30.0);
    CHECK(std::abs(wgan_discriminator_loss(fake, real, gp, lam) - (l0 + lam * (l1 - l0))) < 1e-12);
  }
}

TEST_CASE("losses are permutation invariant over the batch") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    V real(6), fake(6);
    for (auto& v : real) v = rng.uniform(0.01, 0.99);
    for (auto& v : fake) v = rng.uniform(0.01, 0.99);
    const double d = gan_discriminator_loss(real, fake);
    const double g = gan_generator_loss(fake);
    const double w = wgan_discriminator_loss(fake, real, 0.1, 15.0);
    std::vector<std::size_t> order{0, 1, 2, 3, 4, 5};
    rng.shuffle(std::span<std::size_t>(order));
    V real_p(6), fake_p(6);
    for (std::size_t i = 0; i < 6; ++i) {
      real_p[i] = real[order[i]];
      fake_p[i] = fake[order[i]];
    }
    CHECK(std::abs(gan_discriminator_loss(real_p, fake_p) - d) < 1e-12);
    CHECK(std::abs(gan_generator_loss(fake_p) - g) < 1e-12);
    CHECK(std::abs(wgan_discriminator_loss(fake_p, real_p, 0.1, 15.0) - w) < 1e-12);
  }
}

TEST_CASE("gan discriminator loss grid minimum sits at the perfect discriminator") {
  double best = std::numeric_limits<double>::infinity();
  double best_real = 0.0, best_fake = 0.0;
  for (int i = 1; i < 100; ++i) {
    for (int j = 1; j < 100; ++j) {
      const double r = i / 100.0, f = j / 100.0;
      const double v = gan_discriminator_loss(V{r}, V{f});
      if (v < best) {
        best = v;
        best_real = r;
        best_fake = f;
      }
    }
  }
  CHECK(best_real == doctest::Approx(0.99));
  CHECK(best_fake == doctest::Approx(0.01));
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(17);
  const V real{0.3, 0.8, 0.55};
  const V fake{0.2, 0.6, 0.9};
  const double h = 1e-6;
  auto check = [&](const auto& f, const V& point, const V& grad) {
    for (std::size_t i = 0; i < point.size(); ++i) {
      V up = point, down = point;
      up[i] += h;
      down[i] -= h;
      CHECK(std::abs((f(up) - f(down)) / (2 * h) - grad[i]) < 1e-6);
    }
  };
  const auto d = gan_discriminator_loss_grad(real, fake);
  check([&](const V& r) { return gan_discriminator_loss(r, fake); }, real, d.d_real);
  check([&](const V& f) { return gan_discriminator_loss(real, f); }, fake, d.d_fake);
  for (const auto mode : {GeneratorLossMode::kNonSaturating, GeneratorLossMode::kSaturating}) {
    const auto g = gan_generator_loss_grad(fake, mode);
    check([&](const V& f) { return gan_generator_loss(f, mode); }, fake, g.d_fake);
  }
  const auto wg = wgan_generator_loss_grad(fake);
  check([&](const V& f) { return wgan_generator_loss(f); }, fake, wg.d_fake);
  const auto wc = wgan_critic_loss_grad(fake, real);
  check([&](const V& f) { return wgan_discriminator_loss(f, real, 0.0, 1.0); }, fake, wc.d_fake);
  check([&](const V& r) { return wgan_discriminator_loss(fake, r, 0.0, 1.0); }, real, wc.d_real);
}

TEST_CASE("interpolate endpoints and midpoint") {
  const auto names = target_channel_names(TargetMode::kTwoChannel);
  const SignalWindow y(names, std::vector<double>(2 * kWindowLength, 0.2), Units::kScaled);
  const SignalWindow g(names, std::vector<double>(2 * kWindowLength, 0.6), Units::kScaled);
  CHECK(interpolate(y, g, 1.0) == y);
  CHECK(interpolate(y, g, 0.0) == g);
  const auto mid = interpolate(y, g, 0.5);
  for (const double v : mid.data()) CHECK(std::abs(v - 0.4) < 1e-15);
  const SignalWindow six(imu_channel_names(), std::vector<double>(6 * kWindowLength, 0.5),
                         Units::kScaled);
  CHECK_THROWS_AS((void)interpolate(y, six, 0.5), ShapeError);
  CHECK_THROWS_AS((void)interpolate(y, g, 1.5), UsageError);
}

TEST_CASE("batched interpolate uses one weight per example") {
  Tensor<double> y(2, 2, 3, 1.0), g(2, 2, 3, 0.0);
  const std::vector<double> alpha{0.25, 0.75};
  const auto out = interpolate<double>(y, g, alpha);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(out.at(0, c, t) == 0.25);
      CHECK(out.at(1, c, t) == 0.75);
    }
  }
  CHECK_THROWS_AS((void)interpolate<double>(y, g, std::vector<double>{0.5}), UsageError);
}

TEST_CASE("gradient penalty of simple critics") {
  const Tensor<double> x(3, 6, 8, 0.5);
  Rng rng(2);
  Tensor<double> y(3, 2, 8);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform01();

  testing::SampleCritic unit(1.0);
  CHECK(std::abs(gradient_penalty<double>(unit, x, y, 0.0, false).penalty) < kTol);
  testing::ConstantCritic constant(0.3);
  CHECK(std::abs(gradient_penalty<double>(constant, x, y, 0.0, false).penalty - 1.0) < kTol);
  testing::SampleCritic twice(2.0);
  CHECK(std::abs(gradient_penalty<double>(twice, x, y, 0.0, false).penalty - 1.0) < kTol);
  for (double c = -3.0; c <= 3.0; c += 0.25) {
    testing::SampleCritic critic(c);
    const auto gp = gradient_penalty<double>(critic, x, y, 0.0, false);
    CHECK(std::abs(gp.penalty - (std::abs(c) - 1.0) * (std::abs(c) - 1.0)) < 1e-12);
    for (const double n : gp.gradient_norms) CHECK(std::abs(n - std::abs(c)) < 1e-12);
  }
}

TEST_CASE("gradient penalty rejects a bounded critic") {
  nn::Discriminator<double> d(ModelSpec::discriminator(2, Regime::kGan), 1);
  const Tensor<double> x(1, 6, 256, 0.5), y(1, 2, 256, 0.5);
  CHECK_THROWS_AS((void)gradient_penalty<double>(d, x, y, 1.0, false), UsageError);
}

TEST_CASE("gradient penalty parameter gradient of a two-parameter critic") {
  testing::TinyCritic critic;
  critic.set(0.7, -0.3);
  Rng rng(9);
  const Tensor<double> x(4, 6, 5, 0.0);
  Tensor<double> y(4, 1, 5);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);

  for (auto* p : critic.parameters()) p->zero_grad();
  (void)gradient_penalty<double>(critic, x, y, 1.0, false);
  const auto params = critic.parameters();
  REQUIRE(params.size() == 2);
  const double h = 1e-3;
  for (auto* p : params) {
    REQUIRE(p->size() == 1);
    const double analytic = p->grad[0];
    const double saved = p->value[0];
    p->value[0] = saved + h;
    const double up = gradient_penalty<double>(critic, x, y, 0.0, false).penalty;
    p->value[0] = saved - h;
    const double down = gradient_penalty<double>(critic, x, y, 0.0, false).penalty;
    p->value[0] = saved;
    const double numeric = (up - down) / (2.0 * h);
    CHECK(std::abs(analytic - numeric) / std::abs(numeric) < 1e-4);
  }
}

TEST_CASE("gradient penalty leaves earlier gradients and adds scale times dGP") {
  testing::TinyCritic critic;
  critic.set(1.3, 0.2);
  Rng rng(4);
  const Tensor<double> x(3, 6, 4, 0.0);
  Tensor<double> y(3, 1, 4);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);
  for (auto* p : critic.parameters()) p->zero_grad();
  (void)gradient_penalty<double>(critic, x, y, 1.0, false);
  std::vector<double> unit;
  for (auto* p : critic.parameters()) unit.push_back(p->grad[0]);
  for (auto* p : critic.parameters()) p->grad[0] = 10.0;
  (void)gradient_penalty<double>(critic, x, y, 15.0, false);
  const auto params = critic.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(std::abs(params[i]->grad[0] - (10.0 + 15.0 * unit[i])) < 1e-10);
  }
  for (auto* p : critic.parameters()) p->grad[0] = 3.0;
  (void)gradient_penalty<double>(critic, x, y, 0.0, false);
  for (auto* p : critic.parameters()) CHECK(p->grad[0] == 3.0);
}

TEST_CASE("gradient penalty double backprop through the full critic") {
  nn::Discriminator<double> d(ModelSpec::discriminator(2, Regime::kWganGp), 21);
  Rng rng(8);
  Tensor<double> x(2, 6, 256), y(2, 2, 256);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform01();
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform01();
  d.zero_grad();
  (void)gradient_penalty<double>(d, x, y, 1.0, false);
  const double h = 1e-6;
  int checked = 0;
  for (auto* p : d.parameters()) {
    const auto grad = p->grad;
    for (int k = 0; k < 3; ++k) {
      const auto i = static_cast<std::size_t>(rng.below(p->size()));
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = gradient_penalty<double>(d, x, y, 0.0, false).penalty;
      p->value[i] = saved - h;
      const double down = gradient_penalty<double>(d, x, y, 0.0, false).penalty;
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max(1e-6, std::max(std::abs(numeric), std::abs(grad[i])));
      CHECK(std::abs(grad[i] - numeric) / scale < 1e-4);
      ++checked;
    }
  }
  CHECK(checked == 30);
}
