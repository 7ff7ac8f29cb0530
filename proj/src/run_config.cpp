// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/run_config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> k = {"data", "mode", "output_dir", "split_fraction", "stride"};
    for (const auto& [key, value] : TrainConfig{}.fields()) {
      if (key != "out_channels") k.push_back(key);
    }
    return k;
  }();
  return all;
}

bool RunConfig::has_key(const std::string& key) {
  const auto& k = keys();
  return std::find(k.begin(), k.end(), key) != k.end();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "data") {
    data = value;
  } else if (key == "mode") {
    try {
      mode = parse_target_mode(value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("mode: {}", e.what()));
    }
    train.out_channels = target_channel_count(mode);
  } else if (key == "output_dir") {
    if (value.empty()) throw ConfigError("output_dir must not be empty");
    output_dir = value;
  } else if (key == "split_fraction") {
    split_fraction = parse_number<double>(key, value);
  } else if (key == "stride") {
    stride = parse_number<std::size_t>(key, value);
  } else if (key == "out_channels") {
    throw ConfigError("out_channels: set the output layout with mode=6ch or mode=2ch");
  } else if (TrainConfig::has_key(key)) {
    train.set(key, value);
  } else {
    throw ConfigError(fmt::format("unknown configuration key '{}'", key));
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::fields() const {
  std::vector<std::pair<std::string, std::string>> out = {
      {"data", data},
      {"mode", std::string(to_string(mode))},
      {"output_dir", output_dir},
      {"split_fraction", fmt::format("{}", split_fraction)},
      {"stride", std::to_string(stride)}};
  for (auto& kv : train.fields()) {
    if (kv.first != "out_channels") out.push_back(std::move(kv));
  }
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : fields()) out += fmt::format("{} = {}\n", k, v);
  return out;
}

std::vector<std::string> RunConfig::apply_text(const std::string& text, const std::string& source) {
  std::vector<std::string> set_keys;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("{}:{}: expected 'key = value', got '{}'", source, line_no, body));
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
    set_keys.push_back(key);
  }
  return set_keys;
}

void RunConfig::validate() const {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ConfigError(fmt::format("split_fraction must lie in (0, 1), got {}", split_fraction));
  }
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (train.out_channels != target_channel_count(mode)) {
    throw ConfigError("mode and out_channels disagree");
  }
  train.validate();
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("expected key=value, got '{}'", text));
  }
  return {trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1))};
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("IMU2SHOE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  return parse_number<std::uint64_t>("IMU2SHOE_SEED", trim(raw));
}

}  // namespace imu2shoe
