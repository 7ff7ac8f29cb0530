// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

double MetricsReport::mean_rmse() const {
  if (channels.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : channels) s += c.rmse;
  return s / static_cast<double>(channels.size());
}

double MetricsReport::mean_mae() const {
  if (channels.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : channels) s += c.mae;
  return s / static_cast<double>(channels.size());
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["regime"] = regime;
  j["N"] = n;
  j["examples"] = examples;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : channels) {
    rows.push_back({{"name", c.channel}, {"rmse", c.rmse}, {"mae", c.mae}});
  }
  j["channels"] = std::move(rows);
  return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.model = j.at("model").get<std::string>();
    r.regime = j.at("regime").get<std::string>();
    r.n = j.at("N").get<std::size_t>();
    r.examples = j.at("examples").get<std::size_t>();
    for (const auto& c : j.at("channels")) {
      r.channels.push_back({c.at("name").get<std::string>(), c.at("rmse").get<double>(),
                            c.at("mae").get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("metrics report: {}", e.what()));
  }
}

std::string MetricsReport::to_text() const {
  constexpr int kName = 14;
  constexpr int kCol = 8;
  std::string out = fmt::format("{:<{}} {} examples, N={}\n", "model", kName, examples, n);
  std::string head = fmt::format("{:<{}}", "", kName);
  std::string names = fmt::format("{:<{}}", "", kName);
  std::string values = fmt::format("{:<{}}", fmt::format("{} {}", model, regime), kName);
  const auto width = static_cast<int>(channels.size()) * kCol;
  head += fmt::format("|{:^{}}|{:^{}}|", "RMSE", width, "MAE", width);
  names += "|";
  values += "|";
  for (const auto& c : channels) {
    names += fmt::format("{:>{}}", c.channel, kCol);
    values += fmt::format("{:>{}.3f}", c.rmse, kCol);
  }
  names += "|";
  values += "|";
  for (const auto& c : channels) {
    names += fmt::format("{:>{}}", c.channel, kCol);
    values += fmt::format("{:>{}.3f}", c.mae, kCol);
  }
  names += "|";
  values += "|";
  return out + head + "\n" + names + "\n" + values + "\n";
}

MetricsReport MetricsReport::to_physical(const ScalingSpec& scaling) const {
  MetricsReport r = *this;
  for (auto& c : r.channels) {
    const auto& range = scaling.range(c.channel);
    const double w = range.max_physical - range.min_physical;
    c.rmse *= w;
    c.mae *= w;
  }
  return r;
}

namespace {

void check_pair(const SignalWindow& p, const SignalWindow& t, std::size_t i) {
  if (p.units() != Units::kScaled || t.units() != Units::kScaled) {
    throw UsageError(fmt::format("example {}: metrics need scaled-unit windows", i));
  }
  if (p.channel_names() != t.channel_names() || p.length() != t.length()) {
    throw UsageError(fmt::format("example {}: prediction has {} channels, target has {}", i,
                                 p.channels(), t.channels()));
  }
}

}  // namespace

MetricsReport rmse_mae(std::span<const SignalWindow> predictions,
                       std::span<const SignalWindow> targets) {
  if (predictions.size() != targets.size()) {
    throw UsageError(fmt::format("{} predictions for {} targets", predictions.size(), targets.size()));
  }
  if (targets.empty()) throw UsageError("metrics of an empty example set");
  const auto& first = targets.front();
  const auto channels = first.channels();
  std::vector<double> sq(channels, 0.0), ab(channels, 0.0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    check_pair(predictions[i], targets[i], i);
    if (targets[i].channel_names() != first.channel_names()) {
      throw UsageError(fmt::format("example {} has different channels from example 0", i));
    }
    for (std::size_t c = 0; c < channels; ++c) {
      const auto p = predictions[i].channel(c);
      const auto t = targets[i].channel(c);
      for (std::size_t s = 0; s < t.size(); ++s) {
        const double e = p[s] - t[s];
        sq[c] += e * e;
        ab[c] += std::abs(e);
      }
    }
  }
  const auto count = static_cast<double>(targets.size() * first.length());
  MetricsReport r;
  r.n = channels;
  r.examples = targets.size();
  for (std::size_t c = 0; c < channels; ++c) {
    r.channels.push_back({first.channel_names()[c], std::sqrt(sq[c] / count), ab[c] / count});
  }
  return r;
}

SignalWindow baseline_predictor(std::span<const SignalWindow> train_targets) {
  if (train_targets.empty()) throw UsageError("baseline predictor needs at least one target");
  const auto& first = train_targets.front();
  std::vector<double> mean(first.data().size(), 0.0);
  for (std::size_t i = 0; i < train_targets.size(); ++i) {
    const auto& t = train_targets[i];
    if (t.channel_names() != first.channel_names() || t.units() != first.units()) {
      throw UsageError(fmt::format("target {} differs in channels or units from target 0", i));
    }
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += t.data()[k];
  }
  const auto n = static_cast<double>(train_targets.size());
  for (auto& v : mean) v /= n;
  if (first.units() == Units::kScaled) {
    for (auto& v : mean) v = std::clamp(v, 0.0, 1.0);
  }
  return {first.channel_names(), std::move(mean), first.units()};
}

}  // namespace imu2shoe
