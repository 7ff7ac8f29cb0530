// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include "imu2shoe/train.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/optim.hpp"
#include "imu2shoe/weights_io.hpp"

namespace imu2shoe {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using nn::Tensor;

// ------------------------------------------------------------ TrainConfig

namespace {

template <typename Int>
Int parse_unsigned(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || v > std::numeric_limits<Int>::max()) {
    throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, value));
  }
  return static_cast<Int>(v);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, value));
  }
  return v;
}

std::optional<double> parse_auto_real(const std::string& key, const std::string& value) {
  if (value == "auto") return std::nullopt;
  return parse_real(key, value);
}

std::string real_text(double v) { return fmt::format("{}", v); }

template <typename Fn>
auto rethrow_with_key(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "regime",      "generator",      "out_channels",   "epochs",           "lr",
      "lambda_gp",   "batch_size",     "n_critic",       "beta1",            "beta2",
      "seed",        "checkpoint_every", "validate_every", "generator_loss", "conv_kernel",
      "transposed_kernel", "upsampling", "unet_output",   "leaky_slope",      "dropout"};
  return keys;
}

}  // namespace

double TrainConfig::effective_lr() const {
  if (lr) return *lr;
  return regime == Regime::kGan ? 1e-4 : 3e-5;
}

std::pair<double, double> TrainConfig::effective_betas() const {
  const auto defaults = regime == Regime::kGan ? std::pair{0.9, 0.999} : std::pair{0.5, 0.9};
  return {beta1.value_or(defaults.first), beta2.value_or(defaults.second)};
}

void TrainConfig::validate() const {
  if (!(effective_lr() > 0.0)) throw ConfigError(fmt::format("lr must be > 0, got {}", effective_lr()));
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lambda_gp >= 0.0)) throw ConfigError(fmt::format("lambda_gp must be >= 0, got {}", lambda_gp));
  if (n_critic < 1) throw ConfigError("n_critic must be >= 1");
  if (out_channels != 2 && out_channels != 6) {
    throw ConfigError(fmt::format("out_channels must be 2 or 6, got {}", out_channels));
  }
  if (generator != ModelKind::kAutoencoder && generator != ModelKind::kUNet) {
    throw ConfigError(fmt::format("generator must be autoencoder or unet, got {}", to_string(generator)));
  }
  const auto [b1, b2] = effective_betas();
  if (!(b1 >= 0.0 && b1 < 1.0)) throw ConfigError(fmt::format("beta1 must lie in [0, 1), got {}", b1));
  if (!(b2 >= 0.0 && b2 < 1.0)) throw ConfigError(fmt::format("beta2 must lie in [0, 1), got {}", b2));
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("dropout must lie in [0, 1), got {}", dropout));
  }
  rethrow_with_key("conv_kernel", [&] { generator_spec().validate(); });
  rethrow_with_key("conv_kernel", [&] { discriminator_spec().validate(); });
}

ModelSpec TrainConfig::generator_spec() const {
  auto spec = ModelSpec::generator(generator, out_channels);
  spec.conv_kernel = conv_kernel;
  spec.transposed_kernel = transposed_kernel;
  spec.ae_upsampling = upsampling;
  spec.unet_output = unet_output;
  spec.leaky_slope = leaky_slope;
  return spec;
}

ModelSpec TrainConfig::discriminator_spec() const {
  auto spec = ModelSpec::discriminator(out_channels, regime);
  spec.conv_kernel = conv_kernel;
  spec.leaky_slope = leaky_slope;
  spec.dropout_p = dropout;
  return spec;
}

std::vector<std::pair<std::string, std::string>> TrainConfig::fields(bool resolved) const {
  const auto [b1, b2] = effective_betas();
  auto opt = [&](const std::optional<double>& v, double fallback) {
    if (v) return real_text(*v);
    return resolved ? real_text(fallback) : std::string("auto");
  };
  return {
      {"regime", std::string(to_string(regime))},
      {"generator", std::string(to_string(generator))},
      {"out_channels", std::to_string(out_channels)},
      {"epochs", std::to_string(epochs)},
      {"lr", opt(lr, effective_lr())},
      {"lambda_gp", real_text(lambda_gp)},
      {"batch_size", std::to_string(batch_size)},
      {"n_critic", std::to_string(n_critic)},
      {"beta1", opt(beta1, b1)},
      {"beta2", opt(beta2, b2)},
      {"seed", std::to_string(seed)},
      {"checkpoint_every", std::to_string(checkpoint_every)},
      {"validate_every", std::to_string(validate_every)},
      {"generator_loss", std::string(to_string(generator_loss))},
      {"conv_kernel", std::to_string(conv_kernel)},
      {"transposed_kernel", std::to_string(transposed_kernel)},
      {"upsampling", std::string(to_string(upsampling))},
      {"unet_output", std::string(to_string(unet_output))},
      {"leaky_slope", real_text(leaky_slope)},
      {"dropout", real_text(dropout)},
  };
}

bool TrainConfig::has_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  auto wrap = [&](auto&& fn) { rethrow_with_key(key, fn); };
  if (key == "regime") {
    wrap([&] { regime = parse_regime(value); });
  } else if (key == "generator") {
    wrap([&] { generator = parse_model_kind(value); });
  } else if (key == "out_channels") {
    out_channels = parse_unsigned<std::size_t>(key, value);
  } else if (key == "epochs") {
    epochs = parse_unsigned<std::size_t>(key, value);
  } else if (key == "lr") {
    lr = parse_auto_real(key, value);
  } else if (key == "lambda_gp") {
    lambda_gp = parse_real(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_unsigned<std::size_t>(key, value);
  } else if (key == "n_critic") {
    n_critic = parse_unsigned<std::size_t>(key, value);
  } else if (key == "beta1") {
    beta1 = parse_auto_real(key, value);
  } else if (key == "beta2") {
    beta2 = parse_auto_real(key, value);
  } else if (key == "seed") {
    seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "checkpoint_every") {
    checkpoint_every = parse_unsigned<std::size_t>(key, value);
  } else if (key == "validate_every") {
    validate_every = parse_unsigned<std::size_t>(key, value);
  } else if (key == "generator_loss") {
    wrap([&] { generator_loss = parse_generator_loss_mode(value); });
  } else if (key == "conv_kernel") {
    conv_kernel = parse_unsigned<std::size_t>(key, value);
  } else if (key == "transposed_kernel") {
    transposed_kernel = parse_unsigned<std::size_t>(key, value);
  } else if (key == "upsampling") {
    wrap([&] { upsampling = parse_upsampling(value); });
  } else if (key == "unet_output") {
    wrap([&] { unet_output = parse_unet_output(value); });
  } else if (key == "leaky_slope") {
    leaky_slope = parse_real(key, value);
  } else if (key == "dropout") {
    dropout = parse_real(key, value);
  } else {
    throw ConfigError(fmt::format("unknown configuration key '{}'", key));
  }
}

std::string TrainConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : fields(true)) {
    for (const char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------- helpers

std::string checkpoint_name(std::size_t epoch) { return fmt::format("epoch_{:06d}", epoch); }

std::string train_log_header() { return "epoch,g_loss,d_loss,gp,d_real_mean,d_fake_mean\n"; }

std::string train_log_row(std::size_t epoch, const LossReport& r) {
  return fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", epoch, r.generator_loss,
                     r.discriminator_loss, r.gradient_penalty, r.d_real_mean, r.d_fake_mean);
}

namespace {

std::string validation_log_header(const std::vector<std::string>& names) {
  std::string h = "epoch,mean_rmse";
  for (const auto& n : names) h += ",rmse_" + n;
  for (const auto& n : names) h += ",mae_" + n;
  return h + "\n";
}

std::string validation_log_row(std::size_t epoch, const MetricsReport& m) {
  std::string row = fmt::format("{},{:.9g}", epoch, m.mean_rmse());
  for (const auto& c : m.channels) row += fmt::format(",{:.9g}", c.rmse);
  for (const auto& c : m.channels) row += fmt::format(",{:.9g}", c.mae);
  return row + "\n";
}

void write_text(const fs::path& path, const std::string& text, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
}

Tensor<float> gather(const Tensor<float>& all, std::span<const std::size_t> rows) {
  Tensor<float> out(rows.size(), all.channels(), all.length());
  const auto len = all.length();
  for (std::size_t c = 0; c < all.channels(); ++c) {
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const float* src = all.data() + (c * all.batch() + rows[b]) * len;
      std::copy(src, src + len, out.data() + (c * rows.size() + b) * len);
    }
  }
  return out;
}

bool all_finite(std::span<nn::Parameter<float>* const> params) {
  for (const auto* p : params) {
    for (const float v : p->value) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double json_number(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json metrics_json(const MetricsReport& m) {
  Json j = Json::object();
  auto rmse = Json::array(), mae = Json::array();
  for (const auto& c : m.channels) {
    rmse.push_back(c.rmse);
    mae.push_back(c.mae);
  }
  j["rmse"] = std::move(rmse);
  j["mae"] = std::move(mae);
  return j;
}

MetricsReport metrics_from_json(const Json& j, const MetricsReport& shape) {
  MetricsReport m = shape;
  for (std::size_t c = 0; c < m.channels.size(); ++c) {
    m.channels[c].rmse = json_number(j.at("rmse").at(c));
    m.channels[c].mae = json_number(j.at("mae").at(c));
  }
  return m;
}

std::string split_fingerprint(const DatasetSplit& split) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (const char c : s + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& e : split.train) feed("t:" + e.source_id);
  for (const auto& e : split.validation) feed("v:" + e.source_id);
  return fmt::format("{:016x}", h);
}

}  // namespace

std::vector<SignalWindow> translate_examples(nn::Generator<float>& generator,
                                             std::span<const PairedExample> examples) {
  constexpr std::size_t kChunk = 64;
  std::vector<SignalWindow> out;
  out.reserve(examples.size());
  const auto names = target_channel_names(generator.spec().out_channels == 2 ? TargetMode::kTwoChannel
                                                                             : TargetMode::kSixChannel);
  for (std::size_t start = 0; start < examples.size(); start += kChunk) {
    const auto count = std::min(kChunk, examples.size() - start);
    std::vector<SignalWindow> inputs;
    inputs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) inputs.push_back(examples[start + i].input);
    const auto x = nn::stack_windows<float>(inputs);
    auto windows = nn::unstack_windows<float>(generator.translate(x), names);
    for (auto& w : windows) out.push_back(std::move(w));
  }
  return out;
}

MetricsReport evaluate_epoch(nn::Generator<float>& generator, std::span<const PairedExample> validation,
                             std::string regime) {
  if (validation.empty()) throw UsageError("evaluate_epoch: empty validation set");
  const auto predictions = translate_examples(generator, validation);
  std::vector<SignalWindow> targets;
  targets.reserve(validation.size());
  for (const auto& e : validation) targets.push_back(e.target);
  auto report = rmse_mae(predictions, targets);
  report.model = std::string(to_string(generator.spec().kind));
  report.regime = std::move(regime);
  return report;
}

// ----------------------------------------------------------------- Trainer

struct Trainer::Impl {
  TrainConfig config;
  DatasetSplit split;
  TrainOptions options;
  ScalingSpec input_scaling;
  ScalingSpec output_scaling;
  std::vector<std::string> target_names;
  nn::Generator<float> g;
  nn::Discriminator<float> d;
  Adam adam_g;
  Adam adam_d;
  Rng shuffle_rng;
  Rng alpha_rng;
  Tensor<float> train_x;
  Tensor<float> train_y;  // in the generator's native output range
  std::size_t epoch = 0;
  std::vector<EpochRecord> history;
  std::uint64_t g_updates = 0;
  std::uint64_t c_updates = 0;
  std::optional<std::size_t> best_epoch;
  double best_rmse = std::numeric_limits<double>::infinity();

  struct Stats {
    double g_loss = 0.0, d_loss = 0.0, gp = 0.0, real = 0.0, fake = 0.0;
    std::size_t g_steps = 0, d_steps = 0;
  };

  Impl(TrainConfig c, DatasetSplit s, TrainOptions o)
      : config(std::move(c)),
        split(std::move(s)),
        options(std::move(o)),
        g((config.validate(), config.generator_spec()), Rng::derive(config.seed, 1).next_u64()),
        d(config.discriminator_spec(), Rng::derive(config.seed, 2).next_u64()),
        adam_g(g.parameters(), adam_config()),
        adam_d(d.parameters(), adam_config()),
        shuffle_rng(Rng::derive(config.seed, 3)),
        alpha_rng(Rng::derive(config.seed, 4)) {
    const auto mode = config.out_channels == 2 ? TargetMode::kTwoChannel : TargetMode::kSixChannel;
    target_names = target_channel_names(mode);
    input_scaling = options.scaling.select(imu_channel_names());
    output_scaling = options.scaling.select(target_names);
    if (split.train.empty()) throw UsageError("training set is empty");
    if (config.validate_every > 0 && split.validation.empty()) {
      throw UsageError("validation set is empty (set validate_every=0 to train without validation)");
    }
    for (const auto* set : {&split.train, &split.validation}) {
      for (const auto& e : *set) {
        if (e.target.channels() != config.out_channels || e.input.channels() != kImuChannels.size()) {
          throw ConfigError(fmt::format(
              "out_channels={} but example '{}' has {} input and {} target channels",
              config.out_channels, e.source_id, e.input.channels(), e.target.channels()));
        }
      }
    }
    std::vector<SignalWindow> xs, ys;
    for (const auto& e : split.train) {
      xs.push_back(e.input);
      ys.push_back(e.target);
    }
    train_x = nn::stack_windows<float>(xs);
    train_y = nn::stack_windows<float>(ys);
    if (g.signed_output()) {
      for (std::size_t i = 0; i < train_y.size(); ++i) train_y.data()[i] = 2.0f * train_y.data()[i] - 1.0f;
    }
  }

  [[nodiscard]] AdamConfig adam_config() const {
    const auto [b1, b2] = config.effective_betas();
    return {config.effective_lr(), b1, b2, 1e-8};
  }

  [[nodiscard]] std::string regime_name() const { return std::string(to_string(config.regime)); }

  // Discriminator update against a fixed fake batch.
  double d_step(const Tensor<float>& x, const Tensor<float>& y, const Tensor<float>& fake, Stats& st) {
    const auto batch = x.batch();
    adam_d.zero_grad();
    const auto scores =
        scores_of(d.score(Tensor<float>::concat_batch(x, x), {Tensor<float>::concat_batch(y, fake), {}}, true)
                      .value);
    const std::span<const double> real(scores.data(), batch);
    const std::span<const double> fk(scores.data() + batch, batch);
    const auto lg = config.regime == Regime::kGan ? gan_discriminator_loss_grad(real, fk)
                                                  : wgan_critic_loss_grad(fk, real);
    Tensor<float> cot(2 * batch, 1, 1);
    for (std::size_t i = 0; i < batch; ++i) {
      cot.at(i, 0, 0) = static_cast<float>(lg.d_real[i]);
      cot.at(batch + i, 0, 0) = static_cast<float>(lg.d_fake[i]);
    }
    (void)d.backward({std::move(cot), {}});
    double loss = lg.value;
    double gp = 0.0;
    if (config.regime == Regime::kWganGp) {
      std::vector<float> alpha(batch);
      for (auto& a : alpha) a = static_cast<float>(alpha_rng.uniform01());
      const auto y_hat = interpolate<float>(y, fake, alpha);
      gp = gradient_penalty<float>(d, x, y_hat, static_cast<float>(config.lambda_gp), true).penalty;
      loss += config.lambda_gp * gp;
    }
    adam_d.step();
    ++c_updates;
    double mr = 0.0, mf = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      mr += real[i];
      mf += fk[i];
    }
    st.d_loss += loss;
    st.gp += gp;
    st.real += mr / static_cast<double>(batch);
    st.fake += mf / static_cast<double>(batch);
    ++st.d_steps;
    return loss;
  }

  // Generator update; `fake` must come from the generator's latest forward pass.
  double g_step(const Tensor<float>& x, const Tensor<float>& fake, Stats& st) {
    const auto batch = x.batch();
    const auto scores = scores_of(d.score(x, {fake, {}}, true).value);
    const auto lg = config.regime == Regime::kGan ? gan_generator_loss_grad(scores, config.generator_loss)
                                                  : wgan_generator_loss_grad(scores);
    Tensor<float> cot(batch, 1, 1);
    for (std::size_t i = 0; i < batch; ++i) cot.at(i, 0, 0) = static_cast<float>(lg.d_fake[i]);
    d.set_param_grads(false);
    const auto grad_fake = d.backward({std::move(cot), {}}).value;
    d.set_param_grads(true);
    adam_g.zero_grad();
    (void)g.backward(grad_fake);
    adam_g.step();
    ++g_updates;
    st.g_loss += lg.value;
    ++st.g_steps;
    return lg.value;
  }

  void check_finite(const Stats& st, std::size_t batch_index) {
    const bool losses_ok = std::isfinite(st.g_loss) && std::isfinite(st.d_loss) && std::isfinite(st.gp) &&
                           std::isfinite(st.real) && std::isfinite(st.fake);
    const auto gp = g.parameters();
    const auto dp = d.parameters();
    if (losses_ok && all_finite(gp) && all_finite(dp)) return;
    const auto what = fmt::format("training diverged: non-finite {} in epoch {}, batch {}",
                                  losses_ok ? "parameters" : "loss", epoch + 1, batch_index);
    std::string dir;
    if (!options.output_dir.empty()) {
      const auto path = options.output_dir / layout::kDiverged;
      write_checkpoint(path, what);
      dir = path.string();
    }
    throw TrainingDiverged(what + (dir.empty() ? "" : fmt::format(" (diagnostic checkpoint in {})", dir)),
                           dir);
  }

  const EpochRecord& train_epoch() {
    const auto n = train_x.batch();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    Stats st;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, n - start));
      const auto x = gather(train_x, rows);
      const auto y = gather(train_y, rows);
      const auto fake = g.forward(x, true);
      const std::size_t d_steps = config.regime == Regime::kGan ? 1 : config.n_critic;
      for (std::size_t k = 0; k < d_steps; ++k) (void)d_step(x, y, fake, st);
      (void)g_step(x, fake, st);
      check_finite(st, batch_index);
    }
    ++epoch;

    EpochRecord rec;
    rec.epoch = epoch;
    const auto nd = static_cast<double>(std::max<std::size_t>(st.d_steps, 1));
    rec.losses.generator_loss = st.g_loss / static_cast<double>(std::max<std::size_t>(st.g_steps, 1));
    rec.losses.discriminator_loss = st.d_loss / nd;
    rec.losses.gradient_penalty = st.gp / nd;
    rec.losses.d_real_mean = st.real / nd;
    rec.losses.d_fake_mean = st.fake / nd;
    if (config.validate_every > 0 && (epoch % config.validate_every == 0 || epoch == config.epochs)) {
      rec.validation = evaluate_epoch(g, split.validation, regime_name());
    }
    history.push_back(rec);
    const auto& stored = history.back();

    const bool improved = stored.validation && stored.validation->mean_rmse() < best_rmse;
    if (improved) {
      best_rmse = stored.validation->mean_rmse();
      best_epoch = epoch;
    }
    if (!options.output_dir.empty()) {
      write_text(options.output_dir / layout::kTrainLog, train_log_row(epoch, stored.losses), true);
      if (stored.validation) {
        write_text(options.output_dir / layout::kValidationLog,
                   validation_log_row(epoch, *stored.validation), true);
      }
      if (improved) {
        write_bundle(options.output_dir / layout::kBestGenerator,
                     generator_bundle());
        Json info;
        info["epoch"] = epoch;
        info["mean_rmse"] = best_rmse;
        info["validation"] = metrics_json(*stored.validation);
        write_text(options.output_dir / layout::kBestInfo, info.dump(2) + "\n");
      }
      const bool periodic = config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0;
      if (periodic || epoch == config.epochs) {
        write_checkpoint(options.output_dir / layout::kCheckpoints / checkpoint_name(epoch));
      }
      if (epoch == config.epochs) {
        write_bundle(options.output_dir / layout::kFinalGenerator,
                     generator_bundle());
      }
    }
    if (options.on_epoch) options.on_epoch(stored);
    return stored;
  }

  WeightBundle generator_bundle() {
    auto b = make_bundle(g, input_scaling, output_scaling);
    b.header.metadata["regime"] = std::string(to_string(config.regime));
    b.header.metadata["epoch"] = std::to_string(epoch);
    b.header.metadata["config_hash"] = config.hash();
    return b;
  }

  void write_logs_from_history() {
    std::string train_log = train_log_header();
    std::string val_log = validation_log_header(target_names);
    for (const auto& r : history) {
      train_log += train_log_row(r.epoch, r.losses);
      if (r.validation) val_log += validation_log_row(r.epoch, *r.validation);
    }
    write_text(options.output_dir / layout::kTrainLog, train_log);
    write_text(options.output_dir / layout::kValidationLog, val_log);
  }

  void start_output() {
    if (options.output_dir.empty()) return;
    make_dirs(options.output_dir);
    write_logs_from_history();
  }

  void write_checkpoint(const fs::path& dir, const std::string& note = {}) {
    make_dirs(dir);
    write_bundle(dir / layout::kGeneratorBundle, generator_bundle());
    write_bundle(dir / layout::kDiscriminatorBundle, make_bundle(d));

    WeightBundle opt;
    opt.header.arch = "adam-state";
    opt.header.out_channels = config.out_channels;
    opt.header.metadata["generator_steps"] = std::to_string(adam_g.steps());
    opt.header.metadata["discriminator_steps"] = std::to_string(adam_d.steps());
    for (const auto* adam : {&adam_g, &adam_d}) {
      const std::string prefix = adam == &adam_g ? "generator/" : "discriminator/";
      const auto& params = adam->parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        opt.entries.push_back({prefix + params[i]->name + "/m", params[i]->shape, adam->first_moments()[i]});
        opt.entries.push_back({prefix + params[i]->name + "/v", params[i]->shape, adam->second_moments()[i]});
      }
    }
    write_bundle(dir / layout::kOptimizerBundle, opt);

    Json state;
    state["epoch"] = epoch;
    state["config_hash"] = config.hash();
    state["split_fingerprint"] = split_fingerprint(split);
    Json cfg = Json::object();
    for (const auto& [k, v] : config.fields()) cfg[k] = v;
    state["config"] = std::move(cfg);
    state["generator_updates"] = g_updates;
    state["critic_updates"] = c_updates;
    state["rng"] = {{"shuffle", shuffle_rng.state()},
                    {"alpha", alpha_rng.state()},
                    {"dropout", d.noise_rng().state()}};
    if (best_epoch) {
      state["best"] = {{"epoch", *best_epoch}, {"mean_rmse", best_rmse}};
    } else {
      state["best"] = nullptr;
    }
    const EpochRecord* last_val = nullptr;
    for (const auto& r : history) {
      if (r.validation) last_val = &r;
    }
    state["validation_rmse"] = Json::object();
    if (last_val) {
      for (const auto& c : last_val->validation->channels) state["validation_rmse"][c.channel] = c.rmse;
    }
    auto rows = Json::array();
    for (const auto& r : history) {
      Json row = {{"epoch", r.epoch},
                  {"g_loss", r.losses.generator_loss},
                  {"d_loss", r.losses.discriminator_loss},
                  {"gp", r.losses.gradient_penalty},
                  {"d_real_mean", r.losses.d_real_mean},
                  {"d_fake_mean", r.losses.d_fake_mean}};
      row["validation"] = r.validation ? metrics_json(*r.validation) : Json(nullptr);
      rows.push_back(std::move(row));
    }
    state["history"] = std::move(rows);
    if (!note.empty()) state["note"] = note;
    write_text(dir / layout::kState, state.dump(1) + "\n");
  }

  void restore(const fs::path& dir, const Json& state) {
    if (state.at("split_fingerprint").get<std::string>() != split_fingerprint(split)) {
      throw ConfigError(fmt::format("checkpoint {} was written for a different train/validation split",
                                    dir.string()));
    }
    const auto gb = read_bundle(dir / layout::kGeneratorBundle);
    const auto db = read_bundle(dir / layout::kDiscriminatorBundle);
    const auto ob = read_bundle(dir / layout::kOptimizerBundle);
    {
      const auto params = g.parameters();
      load_parameters(gb, params);
    }
    {
      const auto params = d.parameters();
      load_parameters(db, params);
    }
    for (auto* adam : {&adam_g, &adam_d}) {
      const std::string prefix = adam == &adam_g ? "generator/" : "discriminator/";
      std::vector<std::vector<float>> m, v;
      for (const auto* p : adam->parameters()) {
        m.push_back(ob.entry(prefix + p->name + "/m").data);
        v.push_back(ob.entry(prefix + p->name + "/v").data);
      }
      const auto key = adam == &adam_g ? "generator_steps" : "discriminator_steps";
      const auto it = ob.header.metadata.find(key);
      if (it == ob.header.metadata.end()) throw FormatError(fmt::format("optimizer bundle lacks {}", key));
      adam->set_state(std::stoull(it->second), std::move(m), std::move(v));
    }
    epoch = state.at("epoch").get<std::size_t>();
    g_updates = state.at("generator_updates").get<std::uint64_t>();
    c_updates = state.at("critic_updates").get<std::uint64_t>();
    shuffle_rng.set_state(state.at("rng").at("shuffle").get<std::string>());
    alpha_rng.set_state(state.at("rng").at("alpha").get<std::string>());
    d.noise_rng().set_state(state.at("rng").at("dropout").get<std::string>());
    if (!state.at("best").is_null()) {
      best_epoch = state.at("best").at("epoch").get<std::size_t>();
      best_rmse = state.at("best").at("mean_rmse").get<double>();
    }
    MetricsReport shape;
    shape.model = std::string(to_string(config.generator));
    shape.regime = regime_name();
    shape.n = config.out_channels;
    shape.examples = split.validation.size();
    for (const auto& name : target_names) shape.channels.push_back({name, 0.0, 0.0});
    history.clear();
    for (const auto& row : state.at("history")) {
      EpochRecord r;
      r.epoch = row.at("epoch").get<std::size_t>();
      r.losses.generator_loss = json_number(row.at("g_loss"));
      r.losses.discriminator_loss = json_number(row.at("d_loss"));
      r.losses.gradient_penalty = json_number(row.at("gp"));
      r.losses.d_real_mean = json_number(row.at("d_real_mean"));
      r.losses.d_fake_mean = json_number(row.at("d_fake_mean"));
      if (!row.at("validation").is_null()) r.validation = metrics_from_json(row.at("validation"), shape);
      history.push_back(std::move(r));
    }
  }

  // Example indices -> (x, y) batch tensors.
  std::pair<Tensor<float>, Tensor<float>> batch_of(std::span<const std::size_t> examples) const {
    if (examples.empty()) throw UsageError("empty batch");
    for (const auto i : examples) {
      if (i >= train_x.batch()) {
        throw UsageError(fmt::format("example index {} out of range ({} training examples)", i,
                                     train_x.batch()));
      }
    }
    return {gather(train_x, examples), gather(train_y, examples)};
  }
};

Trainer::Trainer(TrainConfig config, DatasetSplit split, TrainOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(split), std::move(options))) {
  impl_->start_output();
}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

Trainer Trainer::resume(const fs::path& checkpoint_dir, DatasetSplit split, TrainOptions options) {
  Json state;
  try {
    state = Json::parse(read_text(checkpoint_dir / layout::kState));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", (checkpoint_dir / layout::kState).string(), e.what()));
  }
  TrainConfig config;
  for (const auto& [k, v] : state.at("config").items()) config.set(k, v.get<std::string>());
  if (config.hash() != state.at("config_hash").get<std::string>()) {
    throw FormatError(fmt::format("{}: configuration hash mismatch", checkpoint_dir.string()));
  }
  auto out_dir = options.output_dir;
  options.output_dir.clear();
  Trainer t(std::move(config), std::move(split), std::move(options));
  try {
    t.impl_->restore(checkpoint_dir, state);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: {}", checkpoint_dir.string(), e.what()));
  }
  t.impl_->options.output_dir = std::move(out_dir);
  t.impl_->start_output();
  return t;
}

void Trainer::run() {
  while (impl_->epoch < impl_->config.epochs) (void)impl_->train_epoch();
}

const EpochRecord& Trainer::train_epoch() { return impl_->train_epoch(); }

void Trainer::write_checkpoint(const fs::path& dir) { impl_->write_checkpoint(dir); }

const TrainConfig& Trainer::config() const noexcept { return impl_->config; }
std::size_t Trainer::epoch() const noexcept { return impl_->epoch; }
const std::vector<EpochRecord>& Trainer::history() const noexcept { return impl_->history; }
std::uint64_t Trainer::generator_updates() const noexcept { return impl_->g_updates; }
std::uint64_t Trainer::critic_updates() const noexcept { return impl_->c_updates; }
std::optional<std::size_t> Trainer::best_epoch() const noexcept { return impl_->best_epoch; }
nn::Generator<float>& Trainer::generator() { return impl_->g; }
nn::Discriminator<float>& Trainer::discriminator() { return impl_->d; }

double Trainer::discriminator_step(std::span<const std::size_t> examples) {
  const auto [x, y] = impl_->batch_of(examples);
  const auto fake = impl_->g.forward(x, false);
  Impl::Stats st;
  return impl_->d_step(x, y, fake, st);
}

double Trainer::generator_step(std::span<const std::size_t> examples) {
  const auto [x, y] = impl_->batch_of(examples);
  const auto fake = impl_->g.forward(x, true);
  Impl::Stats st;
  return impl_->g_step(x, fake, st);
}

TrainResult train(const TrainConfig& config, const DatasetSplit& split, const TrainOptions& options) {
  Trainer trainer(config, split, options);
  trainer.run();
  TrainResult result{std::move(trainer.generator()), trainer.history(), trainer.generator_updates(),
                     trainer.critic_updates(), trainer.best_epoch()};
  return result;
}

}  // namespace imu2shoe
