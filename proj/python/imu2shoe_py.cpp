// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/losses.hpp"
#include "imu2shoe/metrics.hpp"
#include "imu2shoe/nets.hpp"
#include "imu2shoe/synthetic.hpp"
#include "imu2shoe/train.hpp"
#include "imu2shoe/translate.hpp"
#include "imu2shoe/weights_io.hpp"

namespace py = pybind11;
using namespace imu2shoe;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<std::string> names_for(std::size_t channels) {
  if (channels == 6) return imu_channel_names();
  if (channels == 2) return target_channel_names(TargetMode::kTwoChannel);
  throw ShapeError("expected 2 or 6 channels, got " + std::to_string(channels));
}

// Accepts (C, 256) or (k, C, 256).
std::vector<SignalWindow> to_windows(const Array& a, Units units, std::vector<std::string> names = {}) {
  if (a.ndim() != 2 && a.ndim() != 3) throw ShapeError("expected an array of shape (C, 256) or (k, C, 256)");
  const auto k = a.ndim() == 3 ? static_cast<std::size_t>(a.shape(0)) : 1;
  const auto c = static_cast<std::size_t>(a.shape(a.ndim() - 2));
  const auto len = static_cast<std::size_t>(a.shape(a.ndim() - 1));
  if (len != kWindowLength) {
    throw ShapeError("window length must be " + std::to_string(kWindowLength) + ", got " + std::to_string(len));
  }
  if (names.empty()) names = names_for(c);
  if (names.size() != c) throw ShapeError("channel names do not match the array");
  std::vector<SignalWindow> out;
  const double* p = a.data();
  for (std::size_t i = 0; i < k; ++i, p += c * len) out.emplace_back(names, std::vector<double>(p, p + c * len), units);
  return out;
}

Array to_array(const std::vector<SignalWindow>& windows, bool batched = true) {
  const std::size_t c = windows.empty() ? 0 : windows[0].channels();
  std::vector<py::ssize_t> shape;
  if (batched) shape.push_back(static_cast<py::ssize_t>(windows.size()));
  shape.push_back(static_cast<py::ssize_t>(c));
  shape.push_back(static_cast<py::ssize_t>(kWindowLength));
  Array out(shape);
  double* p = out.mutable_data();
  for (const auto& w : windows) p = std::copy(w.data().begin(), w.data().end(), p);
  return out;
}

std::vector<PairedExample> to_examples(const Array& inputs, const Array& targets) {
  auto in = to_windows(inputs, Units::kScaled);
  auto out = to_windows(targets, Units::kScaled);
  if (in.size() != out.size()) throw ShapeError("inputs and targets hold different example counts");
  std::vector<PairedExample> ex;
  for (std::size_t i = 0; i < in.size(); ++i) ex.push_back({in[i], out[i], "py" + std::to_string(i)});
  return ex;
}

// Generator plus the scaling recorded with it.
struct PyGenerator {
  nn::Generator<float> net;
  BundleHeader header;

  static BundleHeader default_header(const ModelSpec& spec) {
    const auto mode = spec.out_channels == 2 ? TargetMode::kTwoChannel : TargetMode::kSixChannel;
    const auto scaling = ScalingSpec::imu_default();
    return header_for(spec, scaling.select(imu_channel_names()), scaling.select(target_channel_names(mode)));
  }

  explicit PyGenerator(nn::Generator<float> g) : net(std::move(g)), header(default_header(net.spec())) {}
  PyGenerator(nn::Generator<float> g, BundleHeader h) : net(std::move(g)), header(std::move(h)) {}
};

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["model"] = r.model;
  d["regime"] = r.regime;
  d["examples"] = r.examples;
  py::list channels, rmse, mae;
  for (const auto& c : r.channels) {
    channels.append(c.channel);
    rmse.append(c.rmse);
    mae.append(c.mae);
  }
  d["channels"] = channels;
  d["rmse"] = rmse;
  d["mae"] = mae;
  d["mean_rmse"] = r.mean_rmse();
  d["mean_mae"] = r.mean_mae();
  return d;
}

std::string as_text(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  return py::str(v).cast<std::string>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wrist-to-shoe IMU signal translation";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  auto format = py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<UnsupportedVersionError>(m, "UnsupportedVersionError", format.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", error.ptr());

  m.attr("WINDOW_LENGTH") = kWindowLength;
  m.def("imu_channel_names", &imu_channel_names);
  m.def("target_channel_names", [](const std::string& mode) { return target_channel_names(parse_target_mode(mode)); },
        py::arg("mode") = "6ch");
  m.def("omega_total", &omega_total, py::arg("wx"), py::arg("wy"), py::arg("wz"));

  m.def(
      "scale_to_unit",
      [](const Array& physical, std::vector<std::string> channels) {
        std::size_t clips = 0;
        std::vector<SignalWindow> out;
        for (const auto& w : to_windows(physical, Units::kPhysical, std::move(channels))) {
          out.push_back(scale_to_unit(w, ScalingSpec::imu_default(), &clips));
        }
        return py::make_tuple(to_array(out, physical.ndim() == 3), clips);
      },
      py::arg("physical"), py::arg("channels") = std::vector<std::string>{},
      "Scales (C, 256) or (k, C, 256) physical windows to [0, 1]; returns (scaled, clip count).");
  m.def(
      "unscale_from_unit",
      [](const Array& scaled, std::vector<std::string> channels) {
        std::vector<SignalWindow> out;
        for (const auto& w : to_windows(scaled, Units::kScaled, std::move(channels))) {
          out.push_back(unscale_from_unit(w, ScalingSpec::imu_default()));
        }
        return to_array(out, scaled.ndim() == 3);
      },
      py::arg("scaled"), py::arg("channels") = std::vector<std::string>{});

  using Scores = std::vector<double>;
  m.def(
      "gan_discriminator_loss", [](const Scores& real, const Scores& fake) { return gan_discriminator_loss(real, fake); },
      py::arg("d_real"), py::arg("d_fake"));
  m.def(
      "gan_generator_loss",
      [](const Scores& d_fake, bool saturating) {
        return gan_generator_loss(d_fake, saturating ? GeneratorLossMode::kSaturating : GeneratorLossMode::kNonSaturating);
      },
      py::arg("d_fake"), py::arg("saturating") = false);
  m.def(
      "wgan_generator_loss", [](const Scores& fake) { return wgan_generator_loss(fake); }, py::arg("critic_fake"));
  m.def(
      "wgan_discriminator_loss",
      [](const Scores& fake, const Scores& real, double gp, double lambda) {
        return wgan_discriminator_loss(fake, real, gp, lambda);
      },
      py::arg("critic_fake"), py::arg("critic_real"), py::arg("gp"), py::arg("lambda_gp"));

  m.def(
      "rmse_mae",
      [](const Array& predictions, const Array& targets) {
        return metrics_dict(rmse_mae(to_windows(predictions, Units::kScaled), to_windows(targets, Units::kScaled)));
      },
      py::arg("predictions"), py::arg("targets"), "Per-channel RMSE and MAE of scaled windows.");
  m.def(
      "baseline_predictor",
      [](const Array& train_targets) {
        return to_array({baseline_predictor(to_windows(train_targets, Units::kScaled))}, false);
      },
      py::arg("train_targets"));

  m.def(
      "count_parameters", [](const std::string& arch, std::size_t n_out) {
        return count_parameters(ModelSpec::generator(parse_model_kind(arch), n_out));
      },
      py::arg("arch"), py::arg("n_out") = 6);
  m.def(
      "forward_trace",
      [](const std::string& arch, std::size_t n_out) {
        nn::ForwardTrace trace;
        const nn::Tensor<float> x(1, 6, kWindowLength, 0.5f);
        if (arch == "discriminator") {
          nn::Discriminator<float> d(ModelSpec::discriminator(n_out, Regime::kGan), 0);
          (void)d.forward(x, nn::Tensor<float>(1, n_out, kWindowLength, 0.5f), false, &trace);
        } else {
          nn::Generator<float> g(ModelSpec::generator(parse_model_kind(arch), n_out), 0);
          (void)g.forward(x, false, &trace);
        }
        std::vector<py::tuple> rows;
        for (const auto& r : trace) rows.push_back(py::make_tuple(r.layer, r.kind, r.channels, r.length));
        return rows;
      },
      py::arg("arch"), py::arg("n_out") = 6, "(layer, kind, channels, length) per traced layer.");

  py::class_<PyGenerator>(m, "Generator")
      .def(py::init([](const std::string& arch, std::size_t n_out, std::uint64_t seed) {
             return PyGenerator(nn::Generator<float>(ModelSpec::generator(parse_model_kind(arch), n_out), seed));
           }),
           py::arg("arch") = "ae", py::arg("n_out") = 6, py::arg("seed") = 0)
      .def_static("identity", [] { return PyGenerator(nn::Generator<float>(ModelSpec::identity(), 0)); })
      .def_static(
          "load",
          [](const std::filesystem::path& path) {
            auto bundle = read_bundle(path);
            auto g = generator_from_bundle(bundle);
            return PyGenerator(std::move(g), std::move(bundle.header));
          },
          py::arg("path"))
      .def_property_readonly("arch", [](const PyGenerator& g) { return g.header.arch; })
      .def_property_readonly("out_channels", [](const PyGenerator& g) { return g.net.spec().out_channels; })
      .def_property_readonly("channel_names",
                             [](const PyGenerator& g) { return names_for(g.net.spec().out_channels); })
      .def_property_readonly("parameter_count", [](PyGenerator& g) { return g.net.parameter_count(); })
      .def_property_readonly("metadata", [](const PyGenerator& g) { return g.header.metadata; })
      .def(
          "translate",
          [](PyGenerator& g, const Array& inputs, bool physical_input, bool physical_output) {
            const auto windows = to_windows(inputs, physical_input ? Units::kPhysical : Units::kScaled);
            return to_array(translate_windows(g.net, windows, g.header, physical_output), inputs.ndim() == 3);
          },
          py::arg("inputs"), py::arg("physical_input") = false, py::arg("physical_output") = false,
          "Translates (6, 256) or (k, 6, 256) wrist windows.")
      .def(
          "save",
          [](PyGenerator& g, const std::filesystem::path& path) {
            auto bundle = make_bundle(g.net, g.header.input_scaling, g.header.output_scaling);
            bundle.header.metadata.insert(g.header.metadata.begin(), g.header.metadata.end());
            write_bundle(path, bundle);
          },
          py::arg("path"));

  m.def(
      "read_bundle",
      [](const std::filesystem::path& path) {
        const auto bundle = read_bundle(path);
        py::dict header;
        header["arch"] = bundle.header.arch;
        header["in_channels"] = bundle.header.in_channels;
        header["out_channels"] = bundle.header.out_channels;
        header["final_nonlinearity"] = bundle.header.final_nonlinearity;
        header["metadata"] = bundle.header.metadata;
        py::dict arrays;
        for (const auto& e : bundle.entries) {
          py::array_t<float> a(std::vector<py::ssize_t>(e.shape.begin(), e.shape.end()));
          std::copy(e.data.begin(), e.data.end(), a.mutable_data());
          arrays[py::str(e.name)] = a;
        }
        return py::make_tuple(header, arrays);
      },
      py::arg("path"), "(header dict, {name: float32 array}) in forward-pass order.");

  m.def(
      "make_synthetic",
      [](std::size_t count, std::uint64_t seed, const std::string& mode) {
        SyntheticConfig sc;
        sc.count = count;
        sc.target = parse_target_mode(mode);
        const auto ex = make_synthetic_examples(sc, seed);
        std::vector<SignalWindow> in, out;
        for (const auto& e : ex) {
          in.push_back(e.input);
          out.push_back(e.target);
        }
        return py::make_tuple(to_array(in), to_array(out));
      },
      py::arg("count") = 64, py::arg("seed") = 0, py::arg("mode") = "6ch",
      "Scaled (inputs, targets); targets are delayed, attenuated, noisy copies of the inputs.");

  m.def(
      "train",
      [](const py::dict& config, const Array& train_inputs, const Array& train_targets, const Array& val_inputs,
         const Array& val_targets, const std::string& output_dir) {
        TrainConfig c;
        for (const auto& [k, v] : config) c.set(py::str(k).cast<std::string>(), as_text(v));
        DatasetSplit split;
        split.train = to_examples(train_inputs, train_targets);
        split.validation = to_examples(val_inputs, val_targets);
        if (!split.train.empty()) c.out_channels = split.train[0].target.channels();
        TrainOptions options;
        options.output_dir = output_dir;
        std::optional<TrainResult> trained;
        {
          py::gil_scoped_release release;
          trained.emplace(train(c, split, options));
        }
        auto& result = *trained;
        py::list history;
        for (const auto& r : result.history) {
          py::dict row;
          row["epoch"] = r.epoch;
          row["g_loss"] = r.losses.generator_loss;
          row["d_loss"] = r.losses.discriminator_loss;
          row["gp"] = r.losses.gradient_penalty;
          if (r.validation) row["validation"] = metrics_dict(*r.validation);
          history.append(row);
        }
        return py::make_tuple(PyGenerator(std::move(result.generator)), history);
      },
      py::arg("config"), py::arg("train_inputs"), py::arg("train_targets"), py::arg("val_inputs"),
      py::arg("val_targets"), py::arg("output_dir") = "",
      "Trains on scaled arrays; returns (generator, per-epoch history).");
}
