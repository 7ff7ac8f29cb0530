// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imu2shoe/dataset.hpp"
#include "imu2shoe/losses.hpp"
#include "imu2shoe/metrics.hpp"
#include "imu2shoe/nets.hpp"

namespace imu2shoe {

/// Training hyperparameters and architecture options.
///
/// Unset learning rate and Adam betas resolve per regime:
/// GAN 1e-4 with (0.9, 0.999), WGAN-GP 3e-5 with (0.5, 0.9).
struct TrainConfig {
  Regime regime = Regime::kGan;
  ModelKind generator = ModelKind::kAutoencoder;
  std::size_t out_channels = 6;
  std::size_t epochs = 10000;
  std::optional<double> lr;
  double lambda_gp = 15.0;
  std::size_t batch_size = 32;
  std::size_t n_critic = 5;
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1000;  ///< 0 keeps only the final checkpoint
  std::size_t validate_every = 1;
  GeneratorLossMode generator_loss = GeneratorLossMode::kNonSaturating;
  std::size_t conv_kernel = 3;
  std::size_t transposed_kernel = 3;
  Upsampling upsampling = Upsampling::kNearestPointwise;
  UNetOutput unet_output = UNetOutput::kUnitRemap;
  double leaky_slope = 0.2;
  double dropout = 0.2;

  [[nodiscard]] double effective_lr() const;
  [[nodiscard]] std::pair<double, double> effective_betas() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  [[nodiscard]] ModelSpec generator_spec() const;
  [[nodiscard]] ModelSpec discriminator_spec() const;

  /// Every field as (key, value) text in a fixed order. Unset optionals are
  /// "auto" unless `resolved`, which substitutes the regime default.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> fields(bool resolved = false) const;
  /// Sets one field from text; ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  [[nodiscard]] static bool has_key(const std::string& key);

  /// 16 hex digits of FNV-1a over the resolved fields.
  [[nodiscard]] std::string hash() const;
};

/// One row of the training log plus the validation result of that epoch, if any.
struct EpochRecord {
  std::size_t epoch = 0;
  LossReport losses;
  std::optional<MetricsReport> validation;
};

struct TrainOptions {
  /// Logs, checkpoints and bundles are written here; empty keeps everything in memory.
  std::filesystem::path output_dir;
  ScalingSpec scaling = ScalingSpec::imu_default();
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Output layout under TrainOptions::output_dir.
namespace layout {
inline constexpr const char* kTrainLog = "train_log.csv";
inline constexpr const char* kValidationLog = "validation_log.csv";
inline constexpr const char* kCheckpoints = "checkpoints";
inline constexpr const char* kFinalGenerator = "generator.bundle";
inline constexpr const char* kBestGenerator = "best_generator.bundle";
inline constexpr const char* kBestInfo = "best.json";
inline constexpr const char* kDiverged = "diverged";
// Inside a checkpoint directory.
inline constexpr const char* kGeneratorBundle = "generator.bundle";
inline constexpr const char* kDiscriminatorBundle = "discriminator.bundle";
inline constexpr const char* kOptimizerBundle = "optimizer.bundle";
inline constexpr const char* kState = "state.json";
}  // namespace layout

/// Name of the periodic checkpoint directory for an epoch, e.g. "epoch_000010".
[[nodiscard]] std::string checkpoint_name(std::size_t epoch);

[[nodiscard]] std::string train_log_header();
[[nodiscard]] std::string train_log_row(std::size_t epoch, const LossReport& r);

/// Per-channel metrics of a frozen generator over a validation set.
[[nodiscard]] MetricsReport evaluate_epoch(nn::Generator<float>& generator,
                                           std::span<const PairedExample> validation,
                                           std::string regime = {});

/// Predictions in scaled units, in example order.
[[nodiscard]] std::vector<SignalWindow> translate_examples(nn::Generator<float>& generator,
                                                           std::span<const PairedExample> examples);

class Trainer {
 public:
  Trainer(TrainConfig config, DatasetSplit split, TrainOptions options = {});
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  /// Continues a run from a checkpoint directory written by this class.
  [[nodiscard]] static Trainer resume(const std::filesystem::path& checkpoint_dir, DatasetSplit split,
                                      TrainOptions options = {});

  /// Trains until config().epochs have completed.
  void run();
  /// One full pass over the training set, with logging, validation and checkpoints.
  const EpochRecord& train_epoch();

  void write_checkpoint(const std::filesystem::path& dir);

  [[nodiscard]] const TrainConfig& config() const noexcept;
  [[nodiscard]] std::size_t epoch() const noexcept;
  [[nodiscard]] const std::vector<EpochRecord>& history() const noexcept;
  [[nodiscard]] std::uint64_t generator_updates() const noexcept;
  [[nodiscard]] std::uint64_t critic_updates() const noexcept;
  [[nodiscard]] std::optional<std::size_t> best_epoch() const noexcept;
  [[nodiscard]] nn::Generator<float>& generator();
  [[nodiscard]] nn::Discriminator<float>& discriminator();

  /// One discriminator (critic) update on the given training examples; returns its loss.
  double discriminator_step(std::span<const std::size_t> examples);
  /// One generator update on the given training examples; returns its loss.
  double generator_step(std::span<const std::size_t> examples);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct TrainResult {
  nn::Generator<float> generator;
  std::vector<EpochRecord> history;
  std::uint64_t generator_updates = 0;
  std::uint64_t critic_updates = 0;
  std::optional<std::size_t> best_epoch;
};

[[nodiscard]] TrainResult train(const TrainConfig& config, const DatasetSplit& split,
                                const TrainOptions& options = {});

}  // namespace imu2shoe
