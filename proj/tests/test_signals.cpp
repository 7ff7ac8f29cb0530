// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/rng.hpp"
#include "imu2shoe/signals.hpp"

using namespace imu2shoe;

namespace {

SignalWindow constant_window(std::vector<std::string> names, std::vector<double> levels, Units units) {
  std::vector<double> data;
  for (const double v : levels) data.insert(data.end(), kWindowLength, v);
  return {std::move(names), std::move(data), units};
}

SignalWindow random_physical_imu(Rng& rng, double accel = 4.0, double gyro = 2000.0) {
  std::vector<double> data(6 * kWindowLength);
  for (std::size_t c = 0; c < 6; ++c) {
    const double r = c < 3 ? accel : gyro;
    for (std::size_t t = 0; t < kWindowLength; ++t) data[c * kWindowLength + t] = rng.uniform(-r, r);
  }
  return {imu_channel_names(), std::move(data), Units::kPhysical};
}

}  // namespace

TEST_CASE("window invariants are enforced at construction") {
  CHECK_THROWS_AS(SignalWindow({"ax"}, std::vector<double>(255), Units::kPhysical), ShapeError);
  CHECK_THROWS_AS(SignalWindow({"ax", "ay"}, std::vector<double>(256), Units::kPhysical), ShapeError);
  CHECK_THROWS_AS(constant_window({"ax"}, {1.5}, Units::kScaled), DataError);
  CHECK_THROWS_AS(constant_window({"ax"}, {-0.01}, Units::kScaled), DataError);
  CHECK_NOTHROW(constant_window({"ax"}, {1.5}, Units::kPhysical));
  const auto w = constant_window({"wtot", "wy"}, {0.0, 1.0}, Units::kScaled);
  CHECK(w.channel_index("wy") == 1);
  CHECK_THROWS_AS((void)w.channel_index("wz"), ConfigError);
}

TEST_CASE("scaling examples") {
  const auto spec = ScalingSpec::imu_default();
  const auto scaled = scale_to_unit(
      constant_window(imu_channel_names(), {0.0, 1.0, -4.0, -2000.0, 2000.0, 0.0}, Units::kPhysical), spec);
  CHECK(scaled.units() == Units::kScaled);
  CHECK(scaled(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(scaled(1, 17) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(scaled(2, 255) == 0.0);
  CHECK(scaled(3, 3) == 0.0);
  CHECK(scaled(4, 3) == 1.0);

  const auto back = unscale_from_unit(
      constant_window(imu_channel_names(), {0.5, 0.5, 0.5, 0.5, 1.0, 0.0}, Units::kScaled), spec);
  CHECK(back(0, 0) == 0.0);
  CHECK(back(4, 0) == 2000.0);
  CHECK(back(5, 0) == -2000.0);
  CHECK(spec.range("wtot").max_physical == doctest::Approx(2000.0 * std::sqrt(3.0)));
}

TEST_CASE("scaling errors") {
  const auto spec = ScalingSpec::imu_default();
  CHECK_THROWS_AS(ScalingSpec({{"ax", 1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(ScalingSpec({{"ax", 2.0, -2.0}}), ConfigError);
  CHECK_THROWS_AS((void)scale_to_unit(constant_window({"mag"}, {0.0}, Units::kPhysical), spec), ConfigError);
  CHECK_THROWS_AS((void)scale_to_unit(constant_window({"ax"}, {0.5}, Units::kScaled), spec), UsageError);
  CHECK_THROWS_AS((void)unscale_from_unit(constant_window({"ax"}, {0.5}, Units::kPhysical), spec), UsageError);
  const std::vector<std::string> missing = {"ax", "q"};
  CHECK_THROWS_AS((void)spec.select(missing), ConfigError);
}

TEST_CASE("out-of-range samples are clipped and counted") {
  const auto spec = ScalingSpec::imu_default();
  std::size_t clipped = 0;
  const auto w = scale_to_unit(
      constant_window({"ax", "wy"}, {-5.0, 2500.0}, Units::kPhysical), spec, &clipped);
  CHECK(clipped == 2 * kWindowLength);
  CHECK(w(0, 0) == 0.0);
  CHECK(w(1, 0) == 1.0);
}

TEST_CASE("property: scale then unscale is the identity within 1e-9") {
  const auto spec = ScalingSpec::imu_default();
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto physical = random_physical_imu(rng);
    std::size_t clipped = 0;
    const auto scaled = scale_to_unit(physical, spec, &clipped);
    CHECK(clipped == 0);
    for (const double v : scaled.data()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto back = unscale_from_unit(scaled, spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < back.data().size(); ++i) {
      const double ref = physical.data()[i];
      worst = std::max(worst, std::abs(back.data()[i] - ref) / std::max(std::abs(ref), 1e-300));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("omega total examples") {
  CHECK(omega_total(0, 0, 0) == 0.0);
  CHECK(omega_total(3, 4, 0) == 5.0);
  CHECK(omega_total(1, 1, 1) == doctest::Approx(1.7320508).epsilon(1e-7));
}

TEST_CASE("property: omega total dominates components and ignores order and sign") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 3> w = {rng.uniform(-2000, 2000), rng.uniform(-2000, 2000), rng.uniform(-2000, 2000)};
    const double n = omega_total(w[0], w[1], w[2]);
    CHECK(n >= 0.0);
    CHECK(n >= std::abs(w[1]));
    const double flipped = omega_total(-w[2], w[0], -w[1]);
    CHECK(flipped == doctest::Approx(n).epsilon(1e-15));
  }
}

TEST_CASE("two-channel target") {
  const auto zero = constant_window(imu_channel_names(), {0.3, -0.2, 1.0, 0, 0, 0}, Units::kPhysical);
  const auto z = make_two_channel_target(zero);
  CHECK(z.channel_names() == std::vector<std::string>{"wtot", "wy"});
  CHECK(std::all_of(z.data().begin(), z.data().end(), [](double v) { return v == 0.0; }));

  const auto single = make_two_channel_target(
      constant_window(imu_channel_names(), {0, 0, 0, 0, -120.5, 0}, Units::kPhysical));
  CHECK(single(0, 100) == 120.5);
  CHECK(single(1, 100) == -120.5);

  Rng rng(2);
  const auto shoe = random_physical_imu(rng);
  const auto two = make_two_channel_target(shoe);
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    const double wx = shoe(3, t);
    const double wy = shoe(4, t);
    const double wz = shoe(5, t);
    CHECK(two(0, t) == doctest::Approx(std::sqrt(wx * wx + wy * wy + wz * wz)).epsilon(1e-14));
    CHECK(two(1, t) == wy);
    CHECK(two(0, t) >= std::abs(two(1, t)));
  }
  const auto scaled = scale_to_unit(two, ScalingSpec::imu_default());
  CHECK(scaled.units() == Units::kScaled);

  CHECK_THROWS_AS((void)make_two_channel_target(constant_window({"wx", "wy"}, {0, 0}, Units::kPhysical)),
                  ShapeError);
}

TEST_CASE("target modes") {
  CHECK(target_channel_count(TargetMode::kSixChannel) == 6);
  CHECK(target_channel_count(TargetMode::kTwoChannel) == 2);
  CHECK(parse_target_mode(to_string(TargetMode::kTwoChannel)) == TargetMode::kTwoChannel);
  CHECK(parse_target_mode(to_string(TargetMode::kSixChannel)) == TargetMode::kSixChannel);
  CHECK_THROWS_AS((void)parse_target_mode("3ch"), ConfigError);
}
