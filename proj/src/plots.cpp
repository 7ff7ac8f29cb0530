// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/plots.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

namespace fs = std::filesystem;

namespace {

using Glyph = std::array<std::uint8_t, 7>;

// Rows top to bottom, bit 4 is the leftmost column.
Glyph glyph(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case '0': return {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E};
    case '1': return {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E};
    case '2': return {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F};
    case '3': return {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E};
    case '4': return {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02};
    case '5': return {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E};
    case '6': return {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E};
    case '7': return {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08};
    case '8': return {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E};
    case '9': return {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C};
    case 'a': return {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F};
    case 'b': return {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E};
    case 'c': return {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E};
    case 'd': return {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F};
    case 'e': return {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E};
    case 'f': return {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08};
    case 'g': return {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E};
    case 'h': return {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11};
    case 'i': return {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E};
    case 'j': return {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C};
    case 'k': return {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12};
    case 'l': return {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E};
    case 'm': return {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11};
    case 'n': return {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11};
    case 'o': return {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E};
    case 'p': return {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10};
    case 'q': return {0x00, 0x00, 0x0D, 0x13, 0x0F, 0x01, 0x01};
    case 'r': return {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10};
    case 's': return {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E};
    case 't': return {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06};
    case 'u': return {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D};
    case 'v': return {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04};
    case 'w': return {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A};
    case 'x': return {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11};
    case 'y': return {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E};
    case 'z': return {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F};
    case '.': return {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
    case ',': return {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08};
    case ':': return {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00};
    case '-': return {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00};
    case '+': return {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00};
    case '=': return {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00};
    case '_': return {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F};
    case '/': return {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00};
    case '@': return {0x0E, 0x11, 0x17, 0x15, 0x17, 0x10, 0x0E};
    case '[': return {0x0E, 0x08, 0x08, 0x08, 0x08, 0x08, 0x0E};
    case ']': return {0x0E, 0x02, 0x02, 0x02, 0x02, 0x02, 0x0E};
    case '(': return {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02};
    case ')': return {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08};
    default: return {};
  }
}

constexpr Raster::Rgb kBlack{0, 0, 0};
constexpr Raster::Rgb kGrid{220, 220, 220};
constexpr Raster::Rgb kFrame{120, 120, 120};
constexpr Raster::Rgb kTarget{20, 20, 20};
constexpr Raster::Rgb kTranslated{214, 39, 40};

constexpr long kMarginLeft = 64;
constexpr long kMarginRight = 12;
constexpr long kPanelPadTop = 16;
constexpr long kPanelPadBottom = 14;
constexpr long kHeader = 22;
constexpr long kFooter = 20;

std::string sanitize(std::string_view id) {
  std::string out;
  for (const char c : id) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out.empty() ? std::string("example") : out;
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  const double a = std::abs(v);
  if (a >= 100.0) return fmt::format("{:.0f}", v);
  if (a >= 1.0) return fmt::format("{:.2g}", v);
  return fmt::format("{:.2f}", v);
}

// Plain C style: nothing with a destructor may live across the setjmp.
bool encode_png(FILE* file, const std::uint8_t* rgb, std::size_t width, std::size_t height,
                png_text* texts, int n_texts) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (n_texts > 0) png_set_text(png, info, texts, n_texts);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb + y * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Raster::Raster(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), data_(width * height * 3) {
  for (std::size_t i = 0; i < width * height; ++i) {
    data_[3 * i] = fill.r;
    data_[3 * i + 1] = fill.g;
    data_[3 * i + 2] = fill.b;
  }
}

Raster::Rgb Raster::pixel(std::size_t x, std::size_t y) const {
  const auto i = 3 * (y * width_ + x);
  return {data_.at(i), data_.at(i + 1), data_.at(i + 2)};
}

void Raster::set(long x, long y, Rgb c) {
  if (x < 0 || y < 0 || x >= static_cast<long>(width_) || y >= static_cast<long>(height_)) return;
  const auto i = 3 * (static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x));
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

void Raster::line(long x0, long y0, long x1, long y1, Rgb c) {
  const long dx = std::abs(x1 - x0);
  const long dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1;
  const long sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Raster::rect(long x0, long y0, long x1, long y1, Rgb c) {
  line(x0, y0, x1, y0, c);
  line(x1, y0, x1, y1, c);
  line(x1, y1, x0, y1, c);
  line(x0, y1, x0, y0, c);
}

void Raster::text(long x, long y, std::string_view s, Rgb c, int scale) {
  for (const char ch : s) {
    const auto g = glyph(ch);
    for (long row = 0; row < 7; ++row) {
      for (long col = 0; col < 5; ++col) {
        if (((g[static_cast<std::size_t>(row)] >> (4 - col)) & 1) == 0) continue;
        for (int a = 0; a < scale; ++a) {
          for (int b = 0; b < scale; ++b) set(x + col * scale + a, y + row * scale + b, c);
        }
      }
    }
    x += 6 * scale;
  }
}

long Raster::text_width(std::string_view s, int scale) {
  return s.empty() ? 0 : static_cast<long>(s.size()) * 6 * scale - scale;
}

void Raster::write_png(const fs::path& path,
                       std::span<const std::pair<std::string, std::string>> text_chunks) const {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError(fmt::format("cannot write '{}'", path.string()));
  std::vector<png_text> texts(text_chunks.size());
  for (std::size_t i = 0; i < text_chunks.size(); ++i) {
    texts[i].compression = PNG_TEXT_COMPRESSION_NONE;
    texts[i].key = const_cast<char*>(text_chunks[i].first.c_str());
    texts[i].text = const_cast<char*>(text_chunks[i].second.c_str());
  }
  if (!encode_png(file.get(), data_.data(), width_, height_, texts.data(), static_cast<int>(texts.size())) ||
      std::fflush(file.get()) != 0) {
    throw IoError(fmt::format("failed writing PNG '{}'", path.string()));
  }
}

std::string panel_label(std::string_view channel, bool physical_units) {
  std::string label(channel);
  if (!physical_units) return label;
  return label + (!channel.empty() && channel.front() == 'a' ? " [g]" : " [dps]");
}

Raster render_example(const PlotExample& ex, const PlotOptions& options) {
  if (ex.target.channel_names() != ex.prediction.channel_names()) {
    throw ShapeError(fmt::format("example '{}': target has {} channels, prediction has {}", ex.source_id,
                                 ex.target.channels(), ex.prediction.channels()));
  }
  if (ex.target.units() != Units::kScaled || ex.prediction.units() != Units::kScaled) {
    throw UsageError("plots take scaled windows");
  }
  const auto target = options.physical_units ? unscale_from_unit(ex.target, options.scaling) : ex.target;
  const auto pred =
      options.physical_units ? unscale_from_unit(ex.prediction, options.scaling) : ex.prediction;

  const auto n = target.channels();
  const auto width = static_cast<long>(options.width);
  const auto ph = static_cast<long>(options.panel_height);
  Raster img(options.width, static_cast<std::size_t>(kHeader + static_cast<long>(n) * ph + kFooter));

  img.text(kMarginLeft, 7, ex.source_id, kBlack);
  const std::string legend_t = "target";
  const std::string legend_p = "translated";
  long lx = width - kMarginRight - Raster::text_width(legend_t + legend_p) - 60;
  img.line(lx, 10, lx + 16, 10, kTarget);
  img.text(lx + 20, 7, legend_t, kBlack);
  lx += 20 + Raster::text_width(legend_t) + 14;
  img.line(lx, 10, lx + 16, 10, kTranslated);
  img.line(lx, 11, lx + 16, 11, kTranslated);
  img.text(lx + 20, 7, legend_p, kBlack);

  const long x0 = kMarginLeft;
  const long x1 = width - kMarginRight;
  const auto xs = [&](std::size_t t) {
    return x0 + static_cast<long>(std::lround(static_cast<double>(t) * static_cast<double>(x1 - x0) /
                                              static_cast<double>(kWindowLength - 1)));
  };
  for (std::size_t c = 0; c < n; ++c) {
    const long top = kHeader + static_cast<long>(c) * ph + kPanelPadTop;
    const long bottom = kHeader + static_cast<long>(c + 1) * ph - kPanelPadBottom;
    double lo = 0.0;
    double hi = 1.0;
    if (options.physical_units) {
      const auto a = target.channel(c);
      const auto b = pred.channel(c);
      lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
      hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
      const double pad = std::max(0.05 * (hi - lo), 1e-6);
      lo -= pad;
      hi += pad;
    }
    const auto ys = [&](double v) {
      const double f = (v - lo) / (hi - lo);
      return bottom - static_cast<long>(std::lround(std::clamp(f, 0.0, 1.0) * static_cast<double>(bottom - top)));
    };
    for (int k = 0; k <= 4; ++k) {
      const double v = lo + (hi - lo) * k / 4.0;
      const long y = ys(v);
      img.line(x0 + 1, y, x1 - 1, y, kGrid);
      if (k % 2 == 0) {
        const auto label = tick_label(v);
        img.text(x0 - 4 - Raster::text_width(label), y - 3, label, kBlack);
      }
    }
    img.rect(x0, top, x1, bottom, kFrame);
    img.text(x0 + 4, top - 11, panel_label(target.channel_names()[c], options.physical_units), kBlack);
    for (std::size_t t = 1; t < kWindowLength; ++t) {
      img.line(xs(t - 1), ys(target(c, t - 1)), xs(t), ys(target(c, t)), kTarget);
    }
    for (std::size_t t = 1; t < kWindowLength; ++t) {
      img.line(xs(t - 1), ys(pred(c, t - 1)), xs(t), ys(pred(c, t)), kTranslated);
    }
  }
  const long axis_y = kHeader + static_cast<long>(n) * ph - kPanelPadBottom;
  for (int s = 0; s <= 5; ++s) {
    const auto t = static_cast<std::size_t>(std::lround(s * kSampleRateHz));
    const long x = xs(t);
    img.line(x, axis_y, x, axis_y + 3, kFrame);
    const auto label = fmt::format("{}", s);
    img.text(x - Raster::text_width(label) / 2, axis_y + 5, label, kBlack);
  }
  img.text(x1 - Raster::text_width("t [s]"), axis_y + 5 + 9, "t [s]", kBlack);
  return img;
}

std::vector<fs::path> emit_plots(std::span<const PlotExample> examples, const fs::path& out_dir,
                                 const PlotOptions& options) {
  std::vector<fs::path> written;
  if (examples.empty()) return written;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError(fmt::format("cannot create plot directory '{}'", out_dir.string()));
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const auto img = render_example(ex, options);
    std::string panels;
    for (const auto& name : ex.target.channel_names()) {
      if (!panels.empty()) panels += ',';
      panels += panel_label(name, false);
    }
    const std::vector<std::pair<std::string, std::string>> chunks = {
        {"Title", ex.source_id},
        {"panels", panels},
        {"units", options.physical_units ? "physical" : "scaled"}};
    const auto path = out_dir / fmt::format("{:03d}_{}.png", i, sanitize(ex.source_id));
    img.write_png(path, chunks);
    written.push_back(path);
  }
  return written;
}

}  // namespace imu2shoe
