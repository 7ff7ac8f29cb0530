// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "imu2shoe/dataset.hpp"
#include "imu2shoe/errors.hpp"
#include "imu2shoe/metrics.hpp"
#include "imu2shoe/plots.hpp"
#include "imu2shoe/run_config.hpp"
#include "imu2shoe/synthetic.hpp"
#include "imu2shoe/train.hpp"
#include "imu2shoe/translate.hpp"
#include "imu2shoe/weights_io.hpp"

namespace fs = std::filesystem;
using namespace imu2shoe;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

void print_warnings(const LoadReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (report.clipped_samples > 0) {
    std::cerr << fmt::format("warning: {} samples were outside the scaling range and clipped\n",
                             report.clipped_samples);
  }
}

// Input ranges followed by any output-only ranges (wtot).
ScalingSpec dataset_scaling(const BundleHeader& h) {
  std::vector<ChannelRange> ranges = h.input_scaling.ranges();
  for (const auto& r : h.output_scaling.ranges()) {
    if (!h.input_scaling.contains(r.name)) ranges.push_back(r);
  }
  if (ranges.empty()) return ScalingSpec::imu_default();
  const auto defaults = ScalingSpec::imu_default();
  for (const auto& r : defaults.ranges()) {
    if (std::none_of(ranges.begin(), ranges.end(), [&](const ChannelRange& x) { return x.name == r.name; })) {
      ranges.push_back(r);
    }
  }
  return ScalingSpec(std::move(ranges));
}

TargetMode mode_of(const BundleHeader& h) {
  return h.out_channels == 2 ? TargetMode::kTwoChannel : TargetMode::kSixChannel;
}

std::vector<PairedExample> select_subset(std::vector<PairedExample> examples, const std::string& subset,
                                         double fraction, std::uint64_t seed) {
  if (subset == "all") return examples;
  auto split = split_dataset(std::move(examples), fraction, seed);
  return subset == "train" ? std::move(split.train) : std::move(split.validation);
}

std::uint64_t seed_or_env(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  return seed_from_environment().value_or(0);
}

// ------------------------------------------------------------------ prepare

struct PrepareArgs {
  std::string raw;
  std::size_t synthetic = 0;
  std::string out;
  std::size_t stride = kWindowLength;
  std::optional<std::uint64_t> seed;
};

int cmd_prepare(const PrepareArgs& a) {
  if (a.raw.empty() == (a.synthetic == 0)) throw ConfigError("prepare needs exactly one of --raw or --synthetic");
  std::vector<PairedExample> physical;
  LoadReport report;
  if (!a.raw.empty()) {
    physical = prepare_raw_examples(a.raw, a.stride, &report);
  } else {
    SyntheticConfig sc;
    sc.count = a.synthetic;
    const auto spec = ScalingSpec::imu_default();
    for (const auto& ex : make_synthetic_examples(sc, seed_or_env(a.seed))) {
      physical.push_back({unscale_from_unit(ex.input, spec), unscale_from_unit(ex.target, spec), ex.source_id});
    }
  }
  write_examples_jsonl(a.out, physical);
  print_warnings(report);
  std::cout << fmt::format("{} examples written to {}\n", physical.size(), a.out);
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
  std::string resume;
  bool print_defaults = false;
  bool quiet = false;
};

RunConfig resolve_run_config(const TrainArgs& a) {
  RunConfig rc;
  bool seed_given = false;
  if (!a.config.empty()) {
    const auto keys = rc.apply_text(read_file(a.config), a.config);
    seed_given = std::find(keys.begin(), keys.end(), "seed") != keys.end();
  }
  if (!seed_given) {
    if (const auto env = seed_from_environment()) rc.set("seed", std::to_string(*env));
  }
  for (const auto& s : a.sets) {
    const auto [k, v] = split_assignment(s);
    rc.set(k, v);
  }
  if (!a.data.empty()) rc.data = a.data;
  if (!a.out.empty()) rc.output_dir = a.out;
  if (a.seed) rc.set("seed", std::to_string(*a.seed));
  rc.validate();
  if (rc.data.empty()) throw ConfigError("data: no dataset path given (set data=... or pass --data)");
  return rc;
}

int cmd_train(const TrainArgs& a) {
  if (a.print_defaults) {
    std::cout << RunConfig{}.to_text();
    return 0;
  }
  const auto rc = resolve_run_config(a);
  LoadReport report;
  auto examples = load_paired_dataset(rc.data, rc.mode, ScalingSpec::imu_default(), rc.stride, &report);
  print_warnings(report);
  auto split = split_dataset(std::move(examples), rc.split_fraction, rc.train.seed);
  if (!a.quiet) {
    std::cout << fmt::format("{} examples: {} train / {} validation\n", report.examples, split.train.size(),
                             split.validation.size());
  }
  const fs::path out = rc.output_dir;
  fs::create_directories(out);
  write_file(out / "config.txt", rc.to_text());

  TrainOptions options;
  options.output_dir = out;
  options.on_epoch = [&](const EpochRecord& r) {
    if (a.quiet || !r.validation) return;
    std::cout << fmt::format("epoch {:>6}  g_loss {:>10.5f}  d_loss {:>10.5f}  val_rmse {:.5f}\n", r.epoch,
                             r.losses.generator_loss, r.losses.discriminator_loss, r.validation->mean_rmse());
  };
  Trainer trainer = a.resume.empty() ? Trainer(rc.train, std::move(split), options)
                                     : Trainer::resume(a.resume, std::move(split), options);
  if (!a.resume.empty() && trainer.config().hash() != rc.train.hash()) {
    std::cerr << "warning: resuming with the checkpoint's configuration, not the given one\n";
  }
  trainer.run();
  const auto& last = trainer.history().back();
  if (last.validation) {
    write_file(out / "final_metrics.json", last.validation->to_json());
    write_file(out / "final_metrics.txt", last.validation->to_text());
  }
  if (!a.quiet) {
    std::cout << fmt::format("finished {} epochs; outputs in {}\n", trainer.epoch(), out.string());
  }
  return 0;
}

// ----------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string bundle;
  std::string data;
  std::string out;
  std::string subset = "all";
  double split_fraction = 0.9;
  std::size_t stride = kWindowLength;
  std::optional<std::uint64_t> seed;
  bool physical = false;
  std::size_t count = 3;
};

int cmd_evaluate(const EvalArgs& a) {
  const auto bundle = read_bundle(a.bundle);
  auto g = generator_from_bundle(bundle);
  LoadReport report;
  auto examples = load_paired_dataset(a.data, mode_of(bundle.header), dataset_scaling(bundle.header), a.stride,
                                      &report);
  print_warnings(report);
  examples = select_subset(std::move(examples), a.subset, a.split_fraction, seed_or_env(a.seed));
  if (examples.empty()) throw DataError(fmt::format("no examples to evaluate in '{}'", a.data));
  const auto it = bundle.header.metadata.find("regime");
  auto metrics = evaluate_epoch(g, examples, it == bundle.header.metadata.end() ? "" : it->second);
  if (a.physical) metrics = metrics.to_physical(dataset_scaling(bundle.header));
  std::cout << metrics.to_text();
  if (!a.out.empty()) {
    write_file(fs::path(a.out) / "metrics.json", metrics.to_json());
    write_file(fs::path(a.out) / "metrics.txt", metrics.to_text());
  }
  return 0;
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
  std::string bundle;
  std::string input;
  std::string out;
  bool physical = false;
};

int cmd_translate(const TranslateArgs& a) {
  const auto bundle = read_bundle(a.bundle);
  auto g = generator_from_bundle(bundle);
  LoadReport report;
  const auto records = read_windows_jsonl(a.input, &report);
  print_warnings(report);
  std::vector<SignalWindow> inputs;
  inputs.reserve(records.size());
  for (const auto& r : records) inputs.push_back(r.window);
  const auto outputs = translate_windows(g, inputs, bundle.header, a.physical);
  std::vector<WindowRecord> out;
  out.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) out.push_back({records[i].source_id, outputs[i]});
  write_windows_jsonl(a.out, out);
  std::cout << fmt::format("{} windows translated to {}\n", out.size(), a.out);
  return 0;
}

// --------------------------------------------------------------------- plot

int cmd_plot(const EvalArgs& a) {
  const auto bundle = read_bundle(a.bundle);
  auto g = generator_from_bundle(bundle);
  auto examples = load_paired_dataset(a.data, mode_of(bundle.header), dataset_scaling(bundle.header), a.stride);
  examples = select_subset(std::move(examples), a.subset, a.split_fraction, seed_or_env(a.seed));
  if (examples.size() > a.count) examples.erase(examples.begin() + static_cast<std::ptrdiff_t>(a.count), examples.end());
  const auto predictions = translate_examples(g, examples);
  std::vector<PlotExample> plots;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    plots.push_back({examples[i].target, predictions[i], examples[i].source_id});
  }
  PlotOptions options;
  options.physical_units = a.physical;
  options.scaling = dataset_scaling(bundle.header);
  const auto files = emit_plots(plots, a.out, options);
  std::cout << fmt::format("{} plots written to {}\n", files.size(), a.out);
  return 0;
}

// ----------------------------------------------------------- export-weights

struct ExportArgs {
  std::string checkpoint;
  bool identity = false;
  std::string out;
};

int cmd_export(const ExportArgs& a) {
  if (a.checkpoint.empty() == !a.identity) {
    throw ConfigError("export-weights needs exactly one of --checkpoint or --identity");
  }
  WeightBundle bundle;
  if (a.identity) {
    const auto imu = ScalingSpec::imu_default().select(imu_channel_names());
    bundle.header = header_for(ModelSpec::identity(), imu, imu);
  } else {
    fs::path src = a.checkpoint;
    if (fs::is_directory(src)) src /= layout::kGeneratorBundle;
    bundle = read_bundle(src);
    (void)generator_from_bundle(bundle);
  }
  write_bundle(a.out, bundle);
  std::cout << fmt::format("{} bundle with {} arrays ({} payload bytes) written to {}\n", bundle.header.arch,
                           bundle.entries.size(), bundle.payload_bytes(), a.out);
  return 0;
}

void add_dataset_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--bundle", a.bundle, "Generator weight bundle")->required();
  cmd->add_option("--data", a.data, "JSON-lines example file or raw recording directory")->required();
  cmd->add_option("--subset", a.subset, "Examples to use: all, train or validation")
      ->check(CLI::IsMember({"all", "train", "validation"}))
      ->capture_default_str();
  cmd->add_option("--split-fraction", a.split_fraction, "Train fraction used to rebuild the split")
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Split seed (falls back to IMU2SHOE_SEED, then 0)");
  cmd->add_option("--stride", a.stride, "Window stride for raw recordings")->capture_default_str();
  cmd->add_flag("--physical", a.physical, "Report in g / dps instead of the 0-1 range");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wrist-to-shoe inertial signal translation with conditional GANs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "imu2shoe 0.1.0");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Window paired recordings into a JSON-lines example file");
  prepare->add_option("--raw", prep.raw, "Directory of <id>_wrist.csv / <id>_shoe.csv pairs");
  prepare->add_option("--synthetic", prep.synthetic, "Generate this many synthetic examples instead");
  prepare->add_option("--out", prep.out, "Output JSON-lines file")->required();
  prepare->add_option("--stride", prep.stride, "Window stride in samples")->capture_default_str();
  prepare->add_option("--seed", prep.seed, "Seed for --synthetic");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a generator/discriminator pair");
  train->add_option("--config", tr.config, "Flat key = value configuration file");
  train->add_option("--set", tr.sets, "Override one key (key=value); repeatable");
  train->add_option("--seed", tr.seed, "Seed; overrides the file and IMU2SHOE_SEED");
  train->add_option("--data", tr.data, "Dataset path; overrides data=");
  train->add_option("--out", tr.out, "Output directory; overrides output_dir=");
  train->add_option("--resume", tr.resume, "Continue from a checkpoint directory");
  train->add_flag("--print-defaults", tr.print_defaults, "Print every configuration key with its default");
  train->add_flag("--quiet", tr.quiet, "Only report errors");

  EvalArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Per-channel RMSE and MAE of a bundle on a dataset");
  add_dataset_options(evaluate, ev);
  evaluate->add_option("--out", ev.out, "Directory for metrics.json and metrics.txt");

  TranslateArgs tl;
  auto* translate = app.add_subcommand("translate", "Translate wrist windows with a bundle");
  translate->add_option("--bundle", tl.bundle, "Generator weight bundle")->required();
  translate->add_option("--input", tl.input, "JSON-lines window or example file")->required();
  translate->add_option("--out", tl.out, "Output JSON-lines window file")->required();
  translate->add_flag("--physical", tl.physical, "Write g / dps instead of the 0-1 range");

  EvalArgs pl;
  auto* plot = app.add_subcommand("plot", "Target vs translated signal figures");
  add_dataset_options(plot, pl);
  plot->add_option("--count,-k", pl.count, "Number of examples to plot")->capture_default_str();
  plot->add_option("--out", pl.out, "Output directory")->required();

  ExportArgs ex;
  auto* exp = app.add_subcommand("export-weights", "Write a standalone generator weight bundle");
  exp->add_option("--checkpoint", ex.checkpoint, "Checkpoint or run directory, or a bundle file");
  exp->add_flag("--identity", ex.identity, "Write a parameter-free identity generator");
  exp->add_option("--out", ex.out, "Output bundle path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*train) return cmd_train(tr);
    if (*evaluate) return cmd_evaluate(ev);
    if (*translate) return cmd_translate(tl);
    if (*plot) return cmd_plot(pl);
    if (*exp) return cmd_export(ex);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!e.checkpoint_dir().empty()) std::cerr << "diagnostic checkpoint: " << e.checkpoint_dir() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kInternal);
  }
  return static_cast<int>(ExitCode::kUsage);
}
