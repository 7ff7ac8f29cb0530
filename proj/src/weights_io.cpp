// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/weights_io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "imu2shoe/errors.hpp"

namespace imu2shoe {

namespace {

using Json = nlohmann::ordered_json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

Json scaling_json(const ScalingSpec& s) {
  auto arr = Json::array();
  for (const auto& r : s.ranges()) {
    arr.push_back({{"channel", r.name}, {"min", r.min_physical}, {"max", r.max_physical}});
  }
  return arr;
}

ScalingSpec scaling_from_json(const Json& j) {
  std::vector<ChannelRange> ranges;
  for (const auto& r : j) {
    ranges.push_back({r.at("channel").get<std::string>(), r.at("min").get<double>(),
                      r.at("max").get<double>()});
  }
  if (ranges.empty()) return {};
  return ScalingSpec(std::move(ranges));
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (const auto d : shape) n *= d;
  return n;
}

}  // namespace

std::size_t BundleEntry::element_count() const { return product(shape); }

std::size_t WeightBundle::payload_bytes() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.element_count() * 4;
  return n;
}

const BundleEntry& WeightBundle::entry(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw FormatError(fmt::format("bundle has no entry '{}'", name));
}

std::vector<std::uint8_t> encode_bundle(const WeightBundle& bundle) {
  Json j;
  const auto& h = bundle.header;
  j["format_version"] = kBundleVersion;
  j["arch"] = h.arch;
  j["in_channels"] = h.in_channels;
  j["out_channels"] = h.out_channels;
  j["conv_kernel"] = h.conv_kernel;
  j["transposed_kernel"] = h.transposed_kernel;
  j["leaky_slope"] = h.leaky_slope;
  j["final_nonlinearity"] = h.final_nonlinearity;
  j["upsampling"] = h.upsampling;
  j["unet_output"] = h.unet_output;
  j["input_scaling"] = scaling_json(h.input_scaling);
  j["output_scaling"] = scaling_json(h.output_scaling);
  j["metadata"] = Json::object();
  for (const auto& [k, v] : h.metadata) j["metadata"][k] = v;
  auto manifest = Json::array();
  std::size_t offset = 0;
  for (const auto& e : bundle.entries) {
    if (e.data.size() != e.element_count()) {
      throw Error(fmt::format("bundle entry '{}' holds {} values but its shape needs {}", e.name,
                              e.data.size(), e.element_count()));
    }
    manifest.push_back({{"name", e.name}, {"shape", e.shape}, {"dtype", "f32"}, {"offset", offset}});
    offset += e.data.size() * 4;
  }
  j["manifest"] = std::move(manifest);
  j["payload_bytes"] = offset;
  const std::string text = j.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kBundlePreambleBytes + text.size() + offset);
  for (const char c : kBundleMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kBundleVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& e : bundle.entries) {
    for (const float f : e.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

WeightBundle decode_bundle(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < kBundlePreambleBytes) {
    throw FormatError(fmt::format("{}: truncated preamble: expected {} bytes, found {}", source,
                                  kBundlePreambleBytes, bytes.size()));
  }
  if (std::memcmp(bytes.data(), kBundleMagic, sizeof(kBundleMagic)) != 0) {
    throw FormatError(fmt::format("{}: bad magic at byte offset 0 (not a weight bundle)", source));
  }
  const auto version = get_u32(bytes.data() + 8);
  if (version != kBundleVersion) {
    throw UnsupportedVersionError(fmt::format(
        "{}: unsupported format version {} at byte offset 8 (supported: {})", source, version,
        kBundleVersion));
  }
  const std::size_t header_len = get_u32(bytes.data() + 12);
  if (bytes.size() - kBundlePreambleBytes < header_len) {
    throw FormatError(fmt::format("{}: truncated header at byte offset {}: expected {} bytes, found {}",
                                  source, kBundlePreambleBytes, header_len,
                                  bytes.size() - kBundlePreambleBytes));
  }
  const auto* text = reinterpret_cast<const char*>(bytes.data() + kBundlePreambleBytes);
  WeightBundle bundle;
  std::size_t payload_bytes = 0;
  try {
    const auto j = Json::parse(text, text + header_len);
    auto& h = bundle.header;
    if (j.at("format_version").get<std::uint32_t>() != version) {
      throw FormatError(fmt::format("{}: header format_version disagrees with the preamble", source));
    }
    h.arch = j.at("arch").get<std::string>();
    h.in_channels = j.at("in_channels").get<std::size_t>();
    h.out_channels = j.at("out_channels").get<std::size_t>();
    h.conv_kernel = j.at("conv_kernel").get<std::size_t>();
    h.transposed_kernel = j.at("transposed_kernel").get<std::size_t>();
    h.leaky_slope = j.at("leaky_slope").get<double>();
    h.final_nonlinearity = j.at("final_nonlinearity").get<std::string>();
    h.upsampling = j.at("upsampling").get<std::string>();
    h.unet_output = j.at("unet_output").get<std::string>();
    h.input_scaling = scaling_from_json(j.at("input_scaling"));
    h.output_scaling = scaling_from_json(j.at("output_scaling"));
    for (const auto& [k, v] : j.at("metadata").items()) h.metadata[k] = v.get<std::string>();
    std::size_t expected_offset = 0;
    for (const auto& m : j.at("manifest")) {
      BundleEntry e;
      e.name = m.at("name").get<std::string>();
      e.shape = m.at("shape").get<std::vector<std::size_t>>();
      if (m.at("dtype").get<std::string>() != "f32") {
        throw FormatError(fmt::format("{}: entry '{}' has dtype {}, only f32 is supported", source,
                                      e.name, m.at("dtype").dump()));
      }
      const auto offset = m.at("offset").get<std::size_t>();
      if (offset != expected_offset) {
        throw FormatError(fmt::format("{}: entry '{}' at payload offset {}, expected {} (entries must be tightly packed)",
                                      source, e.name, offset, expected_offset));
      }
      expected_offset += e.element_count() * 4;
      bundle.entries.push_back(std::move(e));
    }
    payload_bytes = j.at("payload_bytes").get<std::size_t>();
    if (payload_bytes != expected_offset) {
      throw FormatError(fmt::format("{}: payload_bytes {} disagrees with the manifest total {}", source,
                                    payload_bytes, expected_offset));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: invalid header at byte offset {}: {}", source,
                                  kBundlePreambleBytes, e.what()));
  }
  const std::size_t payload_start = kBundlePreambleBytes + header_len;
  const std::size_t available = bytes.size() - payload_start;
  if (available != payload_bytes) {
    throw FormatError(fmt::format("{}: {} payload at byte offset {}: expected {} bytes, found {}",
                                  source, available < payload_bytes ? "truncated" : "oversized",
                                  payload_start, payload_bytes, available));
  }
  const std::uint8_t* p = bytes.data() + payload_start;
  for (auto& e : bundle.entries) {
    e.data.resize(e.element_count());
    for (auto& f : e.data) {
      f = std::bit_cast<float>(get_u32(p));
      p += 4;
    }
  }
  return bundle;
}

void write_bundle(const std::filesystem::path& path, const WeightBundle& bundle) {
  const auto bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

WeightBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open bundle {}", path.string()));
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("failed reading {}", path.string()));
  return decode_bundle(bytes, path.string());
}

BundleHeader header_for(const ModelSpec& spec, const ScalingSpec& input_scaling,
                        const ScalingSpec& output_scaling) {
  BundleHeader h;
  h.arch = std::string(to_string(spec.kind));
  h.in_channels = spec.in_channels;
  h.out_channels = spec.out_channels;
  h.conv_kernel = spec.conv_kernel;
  h.transposed_kernel = spec.transposed_kernel;
  h.leaky_slope = spec.leaky_slope;
  h.final_nonlinearity = std::string(to_string(spec.final_nonlinearity));
  h.upsampling = std::string(to_string(spec.ae_upsampling));
  h.unet_output = std::string(to_string(spec.unet_output));
  h.input_scaling = input_scaling;
  h.output_scaling = output_scaling;
  if (spec.kind == ModelKind::kDiscriminator) {
    h.metadata["dropout_p"] = fmt::format("{}", spec.dropout_p);
  }
  return h;
}

ModelSpec spec_from_header(const BundleHeader& h) {
  try {
    ModelSpec spec;
    spec.kind = parse_model_kind(h.arch);
    spec.in_channels = h.in_channels;
    spec.out_channels = h.out_channels;
    spec.conv_kernel = h.conv_kernel;
    spec.transposed_kernel = h.transposed_kernel;
    spec.leaky_slope = h.leaky_slope;
    spec.final_nonlinearity = parse_final_nonlinearity(h.final_nonlinearity);
    spec.ae_upsampling = parse_upsampling(h.upsampling);
    spec.unet_output = parse_unet_output(h.unet_output);
    if (const auto it = h.metadata.find("dropout_p"); it != h.metadata.end()) {
      spec.dropout_p = std::stod(it->second);
    }
    spec.validate();
    return spec;
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("bundle header describes no buildable model: {}", e.what()));
  }
}

namespace {

std::vector<BundleEntry> entries_of(std::span<nn::Parameter<float>* const> params) {
  std::vector<BundleEntry> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back({p->name, p->shape, p->value});
  return out;
}

}  // namespace

WeightBundle make_bundle(nn::Generator<float>& generator, const ScalingSpec& input_scaling,
                         const ScalingSpec& output_scaling) {
  WeightBundle b;
  b.header = header_for(generator.spec(), input_scaling, output_scaling);
  const auto params = generator.parameters();
  b.entries = entries_of(params);
  return b;
}

WeightBundle make_bundle(nn::Discriminator<float>& discriminator) {
  WeightBundle b;
  b.header = header_for(discriminator.spec(), {}, {});
  const auto params = discriminator.parameters();
  b.entries = entries_of(params);
  return b;
}

void export_bundle(nn::Generator<float>& generator, const ScalingSpec& input_scaling,
                   const ScalingSpec& output_scaling, const std::filesystem::path& path) {
  write_bundle(path, make_bundle(generator, input_scaling, output_scaling));
}

void load_parameters(const WeightBundle& bundle, std::span<nn::Parameter<float>* const> params) {
  if (bundle.entries.size() != params.size()) {
    throw FormatError(fmt::format("bundle has {} arrays, the model expects {}", bundle.entries.size(),
                                  params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = bundle.entries[i];
    auto& p = *params[i];
    if (e.name != p.name || e.shape != p.shape) {
      throw FormatError(fmt::format("bundle entry {} is '{}' {}, the model expects '{}' {}", i, e.name,
                                    fmt::join(e.shape, "x"), p.name, fmt::join(p.shape, "x")));
    }
    p.value = e.data;
  }
}

nn::Generator<float> generator_from_bundle(const WeightBundle& bundle) {
  const auto spec = spec_from_header(bundle.header);
  if (!spec.is_generator()) {
    throw FormatError(fmt::format("bundle holds a '{}', not a generator", bundle.header.arch));
  }
  nn::Generator<float> g(spec, 0);
  const auto params = g.parameters();
  load_parameters(bundle, params);
  return g;
}

}  // namespace imu2shoe
