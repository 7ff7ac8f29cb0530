// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string_view>

#include <json.hpp>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/rng.hpp"

namespace imu2shoe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kCsvHeader = "t,ax,ay,az,wx,wy,wz";
constexpr std::string_view kWristSuffix = "_wrist.csv";
constexpr std::string_view kShoeSuffix = "_shoe.csv";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

double parse_number(std::string_view field, const fs::path& path, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(fmt::format("{}:{}: '{}' is not a number", path.string(), line, field));
  }
  return value;
}

// 6 x 256 nested array -> channel-major vector.
std::vector<double> parse_window_array(const json& node, std::size_t channels,
                                       const fs::path& path, std::size_t line,
                                       std::string_view field) {
  if (!node.is_array() || node.size() != channels) {
    throw ParseError(fmt::format("{}:{}: field '{}' must be an array of {} channels", path.string(),
                                 line, field, channels));
  }
  std::vector<double> out;
  out.reserve(channels * kWindowLength);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto& row = node[c];
    if (!row.is_array() || row.size() != kWindowLength) {
      throw ParseError(fmt::format("{}:{}: field '{}' channel {} must hold {} samples",
                                   path.string(), line, field, c, kWindowLength));
    }
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw ParseError(fmt::format("{}:{}: field '{}' channel {} has a non-numeric sample",
                                     path.string(), line, field, c));
      }
      out.push_back(v.get<double>());
    }
  }
  return out;
}

json window_to_json(const SignalWindow& w) {
  json rows = json::array();
  for (std::size_t c = 0; c < w.channels(); ++c) {
    const auto ch = w.channel(c);
    rows.push_back(json(std::vector<double>(ch.begin(), ch.end())));
  }
  return rows;
}

SignalWindow slice_window(const Recording& rec, std::size_t offset) {
  std::vector<double> data(rec.channel_names.size() * kWindowLength);
  for (std::size_t c = 0; c < rec.channel_names.size(); ++c) {
    const auto src = rec.channel(c);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), kWindowLength,
                data.begin() + static_cast<std::ptrdiff_t>(c * kWindowLength));
  }
  return {rec.channel_names, std::move(data), Units::kPhysical};
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::size_t> window_offsets(std::size_t length, std::size_t window_len,
                                        std::size_t stride) {
  if (stride == 0) throw ConfigError("window stride must be at least 1");
  if (window_len == 0) throw ConfigError("window length must be at least 1");
  if (length < window_len) {
    throw DataError(fmt::format("recording of {} samples is shorter than one {}-sample window",
                                length, window_len));
  }
  std::vector<std::size_t> offsets;
  for (std::size_t off = 0; off + window_len <= length; off += stride) offsets.push_back(off);
  return offsets;
}

std::vector<SignalWindow> window_recording(const Recording& recording, std::size_t stride) {
  std::vector<std::size_t> offsets;
  try {
    offsets = window_offsets(recording.length, kWindowLength, stride);
  } catch (const DataError& e) {
    throw DataError(fmt::format("recording '{}': {}", recording.id, e.what()));
  }
  std::vector<SignalWindow> windows;
  windows.reserve(offsets.size());
  for (const auto off : offsets) windows.push_back(slice_window(recording, off));
  return windows;
}

Recording read_recording_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw ParseError(fmt::format("{}:1: expected header '{}'", path.string(), kCsvHeader));
  }
  Recording rec;
  rec.id = path.stem().string();
  rec.channel_names = imu_channel_names();
  std::vector<std::vector<double>> columns(kImuChannels.size());
  std::size_t line_no = 1;
  double last_t = -INFINITY;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      fields.push_back(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != kImuChannels.size() + 1) {
      throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), line_no,
                                   kImuChannels.size() + 1, fields.size()));
    }
    const double t = parse_number(fields[0], path, line_no);
    if (!(t > last_t)) {
      throw ParseError(fmt::format("{}:{}: timestamps must be strictly increasing", path.string(),
                                   line_no));
    }
    last_t = t;
    for (std::size_t c = 0; c < kImuChannels.size(); ++c) {
      columns[c].push_back(parse_number(fields[c + 1], path, line_no));
    }
  }
  rec.length = columns[0].size();
  rec.data.reserve(rec.length * columns.size());
  for (const auto& col : columns) rec.data.insert(rec.data.end(), col.begin(), col.end());
  return rec;
}

void write_recording_csv(const fs::path& path, const Recording& recording) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << kCsvHeader << '\n';
  for (std::size_t t = 0; t < recording.length; ++t) {
    out << fmt::format("{}", static_cast<double>(t) / kSampleRateHz);
    for (std::size_t c = 0; c < recording.channel_names.size(); ++c) {
      out << ',' << fmt::format("{}", recording.channel(c)[t]);
    }
    out << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::vector<PairedExample> prepare_raw_examples(const fs::path& raw_dir, std::size_t stride,
                                                LoadReport* report) {
  if (!fs::is_directory(raw_dir)) {
    throw IoError(fmt::format("'{}' is not a directory", raw_dir.string()));
  }
  std::map<std::string, fs::path> wrist;
  std::map<std::string, fs::path> shoe;
  for (const auto& entry : fs::directory_iterator(raw_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (ends_with(name, kWristSuffix)) {
      wrist.emplace(name.substr(0, name.size() - kWristSuffix.size()), entry.path());
    } else if (ends_with(name, kShoeSuffix)) {
      shoe.emplace(name.substr(0, name.size() - kShoeSuffix.size()), entry.path());
    }
  }
  std::vector<PairedExample> out;
  std::size_t pairs = 0;
  for (const auto& [id, wrist_path] : wrist) {
    const auto match = shoe.find(id);
    if (match == shoe.end()) {
      if (report) report->warnings.push_back(fmt::format("recording '{}' has no shoe file", id));
      continue;
    }
    ++pairs;
    auto w = read_recording_csv(wrist_path);
    auto s = read_recording_csv(match->second);
    w.id = id;
    s.id = id;
    if (w.length != s.length) {
      throw DataError(fmt::format("recording '{}': wrist has {} samples but shoe has {}", id,
                                  w.length, s.length));
    }
    const auto offsets = window_offsets(w.length, kWindowLength, stride);
    const auto wrist_windows = window_recording(w, stride);
    const auto shoe_windows = window_recording(s, stride);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      out.push_back({wrist_windows[i], shoe_windows[i], fmt::format("{}@{}", id, offsets[i])});
    }
  }
  for (const auto& [id, path] : shoe) {
    if (!wrist.contains(id) && report) {
      report->warnings.push_back(fmt::format("recording '{}' has no wrist file", id));
    }
  }
  if (pairs == 0) {
    throw DataError(fmt::format("no paired recordings found in '{}'", raw_dir.string()));
  }
  if (report) report->examples = out.size();
  return out;
}

void write_examples_jsonl(const fs::path& path, std::span<const PairedExample> examples) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& ex : examples) {
    if (ex.input.units() != Units::kPhysical || ex.target.units() != Units::kPhysical) {
      throw UsageError("JSON-lines files store physical units only");
    }
    json record;
    record["source_id"] = ex.source_id;
    record["input"] = window_to_json(ex.input);
    record["target"] = window_to_json(ex.target);
    out << record.dump() << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::vector<PairedExample> read_examples_jsonl(const fs::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<PairedExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
    if (!record.is_object() || !record.contains("input") || !record.contains("target")) {
      throw ParseError(fmt::format("{}:{}: record needs 'input' and 'target' fields",
                                   path.string(), line_no));
    }
    std::string id = record.contains("source_id") && record["source_id"].is_string()
                         ? record["source_id"].get<std::string>()
                         : fmt::format("line{}", line_no);
    auto input = parse_window_array(record["input"], kImuChannels.size(), path, line_no, "input");
    auto target =
        parse_window_array(record["target"], kImuChannels.size(), path, line_no, "target");
    out.push_back({SignalWindow(imu_channel_names(), std::move(input), Units::kPhysical),
                   SignalWindow(imu_channel_names(), std::move(target), Units::kPhysical),
                   std::move(id)});
  }
  if (out.empty() && report) {
    report->warnings.push_back(fmt::format("'{}' contains no examples", path.string()));
  }
  if (report) report->examples = out.size();
  return out;
}

PairedExample scale_example(const PairedExample& physical, TargetMode mode,
                            const ScalingSpec& scaling, std::size_t* clip_count) {
  auto target = mode == TargetMode::kTwoChannel ? make_two_channel_target(physical.target)
                                                : physical.target;
  return {scale_to_unit(physical.input, scaling, clip_count),
          scale_to_unit(target, scaling, clip_count), physical.source_id};
}

std::vector<PairedExample> load_paired_dataset(const fs::path& path, TargetMode mode,
                                               const ScalingSpec& scaling, std::size_t stride,
                                               LoadReport* report) {
  LoadReport local;
  auto physical = fs::is_directory(path) ? prepare_raw_examples(path, stride, &local)
                                         : read_examples_jsonl(path, &local);
  std::vector<PairedExample> out;
  out.reserve(physical.size());
  for (const auto& ex : physical) {
    out.push_back(scale_example(ex, mode, scaling, &local.clipped_samples));
  }
  local.examples = out.size();
  if (report) *report = std::move(local);
  return out;
}

DatasetSplit split_dataset(std::vector<PairedExample> examples, double fraction,
                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError(fmt::format("split fraction must lie in (0, 1), got {}", fraction));
  }
  if (examples.size() < 2) {
    throw DataError(fmt::format("cannot split {} example(s); need at least 2", examples.size()));
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  // Guard against 0.9 * n landing a hair under an integer.
  const auto n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(examples.size()) + 1e-9));
  DatasetSplit split;
  split.seed = seed;
  split.split_fraction = fraction;
  split.train.reserve(n_train);
  split.validation.reserve(examples.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < n_train ? split.train : split.validation;
    dst.push_back(std::move(examples[order[i]]));
  }
  return split;
}

}  // namespace imu2shoe
