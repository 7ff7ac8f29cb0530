// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/translate.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>

#include <json.hpp>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kChunk = 64;

std::vector<double> parse_rows(const json& node, std::size_t channels, const fs::path& path,
                               std::size_t line) {
  if (!node.is_array() || node.size() != channels) {
    throw ParseError(fmt::format("{}:{}: expected {} channel rows", path.string(), line, channels));
  }
  std::vector<double> out;
  out.reserve(channels * kWindowLength);
  for (const auto& row : node) {
    if (!row.is_array() || row.size() != kWindowLength) {
      throw ParseError(fmt::format("{}:{}: every channel row must hold {} samples", path.string(), line,
                                   kWindowLength));
    }
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError(fmt::format("{}:{}: non-numeric sample", path.string(), line));
      out.push_back(v.get<double>());
    }
  }
  return out;
}

ScalingSpec or_default(const ScalingSpec& s) {
  return s.ranges().empty() ? ScalingSpec::imu_default() : s;
}

}  // namespace

std::string_view to_string(Units units) { return units == Units::kPhysical ? "physical" : "scaled"; }

Units parse_units(std::string_view text) {
  if (text == "physical") return Units::kPhysical;
  if (text == "scaled") return Units::kScaled;
  throw ConfigError(fmt::format("unknown units '{}' (expected physical or scaled)", text));
}

void write_windows_jsonl(const fs::path& path, std::span<const WindowRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& r : records) {
    json rows = json::array();
    for (std::size_t c = 0; c < r.window.channels(); ++c) {
      const auto ch = r.window.channel(c);
      rows.push_back(json(std::vector<double>(ch.begin(), ch.end())));
    }
    json rec;
    rec["source_id"] = r.source_id;
    rec["channels"] = r.window.channel_names();
    rec["units"] = to_string(r.window.units());
    rec["data"] = std::move(rows);
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::vector<WindowRecord> read_windows_jsonl(const fs::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<WindowRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
    if (!rec.is_object()) throw ParseError(fmt::format("{}:{}: expected an object", path.string(), line_no));
    std::string id = rec.contains("source_id") && rec["source_id"].is_string()
                         ? rec["source_id"].get<std::string>()
                         : fmt::format("line{}", line_no);
    try {
      if (rec.contains("data")) {
        const auto names = rec.at("channels").get<std::vector<std::string>>();
        const auto units = parse_units(rec.value("units", std::string("physical")));
        auto data = parse_rows(rec["data"], names.size(), path, line_no);
        out.push_back({std::move(id), SignalWindow(names, std::move(data), units)});
      } else if (rec.contains("input")) {
        auto data = parse_rows(rec["input"], kImuChannels.size(), path, line_no);
        out.push_back({std::move(id), SignalWindow(imu_channel_names(), std::move(data), Units::kPhysical)});
      } else {
        throw ParseError(fmt::format("{}:{}: record needs a 'data' or 'input' field", path.string(), line_no));
      }
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const ConfigError& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const DataError& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (report) {
    report->examples = out.size();
    if (out.empty()) report->warnings.push_back(fmt::format("'{}' contains no windows", path.string()));
  }
  return out;
}

std::vector<SignalWindow> translate_windows(nn::Generator<float>& generator,
                                            std::span<const SignalWindow> inputs,
                                            const BundleHeader& header, bool physical_output) {
  const auto in_scaling = or_default(header.input_scaling);
  const auto out_scaling = or_default(header.output_scaling);
  const auto names = target_channel_names(generator.spec().out_channels == 2 ? TargetMode::kTwoChannel
                                                                             : TargetMode::kSixChannel);
  std::vector<SignalWindow> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += kChunk) {
    const auto count = std::min(kChunk, inputs.size() - start);
    std::vector<SignalWindow> batch;
    batch.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& w = inputs[start + i];
      if (w.channel_names() != imu_channel_names()) {
        throw ShapeError(fmt::format("window {} has channels {}, expected the six wrist channels",
                                     start + i, fmt::join(w.channel_names(), ",")));
      }
      batch.push_back(w.units() == Units::kPhysical ? scale_to_unit(w, in_scaling) : w);
    }
    auto windows = nn::unstack_windows<float>(generator.translate(nn::stack_windows<float>(batch)), names);
    for (auto& w : windows) {
      out.push_back(physical_output ? unscale_from_unit(w, out_scaling) : std::move(w));
    }
  }
  return out;
}

}  // namespace imu2shoe
