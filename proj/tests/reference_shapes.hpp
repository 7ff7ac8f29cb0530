// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "imu2shoe/layers.hpp"

namespace imu2shoe::testing {

// Published layer rows as (kind, channels, length). N is substituted by the caller.
struct ShapeRow {
  std::string kind;
  std::size_t channels;
  std::size_t length;
};

constexpr std::size_t kN = 0;  // placeholder for the output channel count

inline std::vector<ShapeRow> autoencoder_rows() {
  return {{"Input", 6, 256},          {"Conv1D", 64, 256},       {"LeakyReLU", 64, 256},
          {"MaxPool1D", 64, 128},     {"Conv1D", 128, 128},      {"LeakyReLU", 128, 128},
          {"MaxPool1D", 128, 64},     {"Conv1D", 256, 64},       {"LeakyReLU", 256, 64},
          {"MaxPool1D", 256, 32},     {"ConvTranspose1D", 256, 64}, {"LeakyReLU", 256, 64},
          {"ConvTranspose1D", 256, 128}, {"LeakyReLU", 256, 128}, {"ConvTranspose1D", kN, 256},
          {"Sigmoid", kN, 256}};
}

inline std::vector<ShapeRow> unet_rows() {
  return {{"Input", 6, 256},        {"Conv1D", 64, 256},     {"LeakyReLU", 64, 256},
          {"MaxPool1D", 64, 128},   {"Conv1D", 128, 128},    {"LeakyReLU", 128, 128},
          {"MaxPool1D", 128, 64},   {"Conv1D", 256, 64},     {"LeakyReLU", 256, 64},
          {"ConvTranspose1D", 128, 128}, {"LeakyReLU", 128, 128}, {"Concat", 256, 128},
          {"ConvTranspose1D", 64, 256}, {"LeakyReLU", 64, 256}, {"Concat", 128, 256},
          {"Conv1D", kN, 256},      {"Tanh", kN, 256}};
}

// Flatten is listed with the width computed from the per-layer chain (64 * 30),
// not the printed 7680.
inline std::vector<ShapeRow> discriminator_rows(std::size_t n) {
  return {{"Input", 6 + n, 256},  {"Conv1D", 64, 254},   {"LeakyReLU", 64, 254},
          {"MaxPool1D", 64, 127}, {"Conv1D", 64, 125},   {"LeakyReLU", 64, 125},
          {"MaxPool1D", 64, 62},  {"Conv1D", 64, 60},    {"LeakyReLU", 64, 60},
          {"MaxPool1D", 64, 30},  {"Flatten", 1920, 1},  {"Linear", 128, 1},
          {"LeakyReLU", 128, 1},  {"Dropout", 128, 1},   {"Linear", 1, 1},
          {"Sigmoid", 1, 1}};
}

inline constexpr std::size_t kPrintedFlattenWidth = 7680;
inline constexpr std::size_t kPublishedAutoencoderParameters = 247938;
inline constexpr std::size_t kPublishedUNetParameters = 272898;

/// Kinds that stand in for a published row kind.
inline bool kind_matches(const std::string& actual, const std::string& published) {
  if (actual == published) return true;
  // Upsample + pointwise conv replaces a transposed conv of the same output shape.
  return published == "ConvTranspose1D" && actual == "UpsampleConv1D";
}

/// Empty string when the trace follows the rows; otherwise the first mismatch.
inline std::string compare_trace(const nn::ForwardTrace& trace, const std::vector<ShapeRow>& rows,
                                 std::size_t n) {
  if (trace.size() < rows.size()) {
    return "trace has " + std::to_string(trace.size()) + " rows, expected " +
           std::to_string(rows.size());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto want_c = rows[i].channels == kN ? n : rows[i].channels;
    const auto& got = trace[i];
    if (!kind_matches(got.kind, rows[i].kind) || got.channels != want_c ||
        got.length != rows[i].length) {
      return "row " + std::to_string(i) + " (" + got.layer + "): got " + got.kind + " (" +
             std::to_string(got.channels) + ", " + std::to_string(got.length) + "), expected " +
             rows[i].kind + " (" + std::to_string(want_c) + ", " + std::to_string(rows[i].length) +
             ")";
    }
  }
  return {};
}

}  // namespace imu2shoe::testing
