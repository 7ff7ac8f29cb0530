// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imu2shoe/dataset.hpp"
#include "imu2shoe/nets.hpp"
#include "imu2shoe/weights_io.hpp"

namespace imu2shoe {

/// One line of a JSON-lines window file:
///   {"source_id": "...", "channels": ["ax", ...], "units": "physical" | "scaled", "data": [[...256], ...]}
/// Readers also accept example records and take their `input` field (physical units).
struct WindowRecord {
  std::string source_id;
  SignalWindow window;
};

[[nodiscard]] std::string_view to_string(Units units);
[[nodiscard]] Units parse_units(std::string_view text);

void write_windows_jsonl(const std::filesystem::path& path, std::span<const WindowRecord> records);
[[nodiscard]] std::vector<WindowRecord> read_windows_jsonl(const std::filesystem::path& path,
                                                           LoadReport* report = nullptr);

/// Translates wrist windows in order. Physical inputs are scaled with the
/// bundle's input scaling; outputs are scaled unless `physical_output`.
[[nodiscard]] std::vector<SignalWindow> translate_windows(nn::Generator<float>& generator,
                                                          std::span<const SignalWindow> inputs,
                                                          const BundleHeader& header,
                                                          bool physical_output = false);

}  // namespace imu2shoe
