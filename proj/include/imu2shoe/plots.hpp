// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imu2shoe/signals.hpp"

namespace imu2shoe {

/// Target and translated window of one example, both scaled.
struct PlotExample {
  SignalWindow target;
  SignalWindow prediction;
  std::string source_id;
};

struct PlotOptions {
  /// Plot in g / dps instead of the 0-1 domain.
  bool physical_units = false;
  ScalingSpec scaling = ScalingSpec::imu_default();
  std::size_t width = 900;
  std::size_t panel_height = 150;
};

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, row-major, white unless a fill is given.
class Raster {
 public:
  using Rgb = imu2shoe::Rgb;

  Raster(std::size_t width, std::size_t height) : Raster(width, height, Rgb{}) {}
  Raster(std::size_t width, std::size_t height, Rgb fill);

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] Rgb pixel(std::size_t x, std::size_t y) const;
  void set(long x, long y, Rgb c);
  void line(long x0, long y0, long x1, long y1, Rgb c);
  void rect(long x0, long y0, long x1, long y1, Rgb c);
  /// 5x7 bitmap text; the top-left corner of the first glyph is at (x, y).
  void text(long x, long y, std::string_view s, Rgb c, int scale = 1);
  [[nodiscard]] static long text_width(std::string_view s, int scale = 1);

  /// Writes a PNG with optional tEXt chunks (key, value). Throws IoError.
  void write_png(const std::filesystem::path& path,
                 std::span<const std::pair<std::string, std::string>> text_chunks = {}) const;

  [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> data_;
};

/// Panel label for a channel name, e.g. "wtot" for the total angular velocity.
[[nodiscard]] std::string panel_label(std::string_view channel, bool physical_units);

/// Renders one example: one panel per channel, target and translation overlaid.
[[nodiscard]] Raster render_example(const PlotExample& example, const PlotOptions& options = {});

/// One PNG per example in `out_dir`, named "<index>_<source id>.png". The
/// "panels" text chunk lists the panel labels. Returns the written paths;
/// no examples means no files. Throws IoError when the directory is unwritable.
std::vector<std::filesystem::path> emit_plots(std::span<const PlotExample> examples,
                                              const std::filesystem::path& out_dir,
                                              const PlotOptions& options = {});

}  // namespace imu2shoe
