// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>

#include <cmath>

#include "imu2shoe/errors.hpp"
#include "imu2shoe/synthetic.hpp"
#include "imu2shoe/train.hpp"
#include "imu2shoe/weights_io.hpp"
#include "test_util.hpp"

using namespace imu2shoe;
using testing::slurp;
using testing::TempDir;

namespace {

DatasetSplit small_split(std::size_t n_train, std::size_t n_val, std::uint64_t seed,
                         TargetMode mode = TargetMode::kSixChannel) {
  SyntheticConfig sc;
  sc.count = n_train + n_val;
  sc.target = mode;
  auto all = make_synthetic_examples(sc, seed);
  DatasetSplit split;
  split.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
  return split;
}

TrainConfig quick_config(Regime regime) {
  TrainConfig c;
  c.regime = regime;
  c.epochs = 1;
  c.batch_size = 4;
  c.seed = 11;
  c.checkpoint_every = 0;
  return c;
}

template <typename Model>
std::vector<std::vector<float>> snapshot(Model& m) {
  std::vector<std::vector<float>> out;
  for (auto* p : m.parameters()) out.push_back(p->value);
  return out;
}

SignalWindow constant_window(const std::vector<std::string>& names, double v) {
  return {names, std::vector<double>(names.size() * kWindowLength, v), Units::kScaled};
}

}  // namespace

TEST_CASE("config defaults resolve per regime") {
  TrainConfig c;
  CHECK(c.effective_lr() == doctest::Approx(1e-4));
  CHECK(c.effective_betas() == std::pair{0.9, 0.999});
  c.regime = Regime::kWganGp;
  CHECK(c.effective_lr() == doctest::Approx(3e-5));
  CHECK(c.effective_betas() == std::pair{0.5, 0.9});
  c.lr = 2e-4;
  CHECK(c.effective_lr() == doctest::Approx(2e-4));
  CHECK(c.lambda_gp == 15.0);
  CHECK(c.epochs == 10000);
  CHECK(c.n_critic == 5);
  CHECK(c.batch_size == 32);
}

TEST_CASE("config validation names the field") {
  auto expect = [](auto mutate, const std::string& field) {
    TrainConfig c;
    mutate(c);
    try {
      c.validate();
      FAIL("expected ConfigError for " << field);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  expect([](TrainConfig& c) { c.lr = 0.0; }, "lr");
  expect([](TrainConfig& c) { c.lr = -1e-3; }, "lr");
  expect([](TrainConfig& c) { c.epochs = 0; }, "epochs");
  expect([](TrainConfig& c) { c.batch_size = 0; }, "batch_size");
  expect([](TrainConfig& c) { c.lambda_gp = -1.0; }, "lambda_gp");
  expect([](TrainConfig& c) { c.n_critic = 0; }, "n_critic");
  expect([](TrainConfig& c) { c.out_channels = 3; }, "out_channels");
  expect([](TrainConfig& c) { c.beta1 = 1.0; }, "beta1");
  expect([](TrainConfig& c) { c.generator = ModelKind::kDiscriminator; }, "generator");
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("config text roundtrip and hashing") {
  TrainConfig c;
  c.set("regime", "wgan-gp");
  c.set("generator", "unet");
  c.set("out_channels", "2");
  c.set("lr", "5e-5");
  c.set("seed", "42");
  CHECK(c.regime == Regime::kWganGp);
  CHECK(c.generator == ModelKind::kUNet);
  CHECK(c.out_channels == 2);
  CHECK(c.seed == 42);

  TrainConfig d;
  for (const auto& [k, v] : c.fields()) d.set(k, v);
  CHECK(d.fields() == c.fields());
  CHECK(d.hash() == c.hash());
  CHECK(c.hash().size() == 16);

  d.set("seed", "43");
  CHECK(d.hash() != c.hash());
  d.set("seed", "42");
  d.set("lr", "auto");
  CHECK(!d.lr);
  CHECK(d.fields(true) != c.fields(true));

  CHECK_THROWS_AS(c.set("learning_rate", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("epochs", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("epochs", "-3"), ConfigError);
  CHECK_THROWS_AS(c.set("lr", "nan"), ConfigError);
  CHECK_THROWS_AS(c.set("regime", "vanilla"), ConfigError);
  CHECK(TrainConfig::has_key("lambda_gp"));
  CHECK(!TrainConfig::has_key("lambda"));
}

TEST_CASE("channel mismatch between data and config is a configuration error") {
  auto split = small_split(4, 2, 1, TargetMode::kTwoChannel);
  auto c = quick_config(Regime::kGan);
  c.out_channels = 6;
  CHECK_THROWS_AS(Trainer(c, split), ConfigError);
  c.out_channels = 2;
  CHECK_NOTHROW(Trainer(c, split));
}

TEST_CASE("empty training or validation set is rejected") {
  auto split = small_split(4, 2, 1);
  auto c = quick_config(Regime::kGan);
  auto no_train = split;
  no_train.train.clear();
  CHECK_THROWS_AS(Trainer(c, no_train), UsageError);
  auto no_val = split;
  no_val.validation.clear();
  CHECK_THROWS_AS(Trainer(c, no_val), UsageError);
  c.validate_every = 0;
  CHECK_NOTHROW(Trainer(c, no_val));
}

TEST_CASE("one full-batch GAN epoch makes exactly one generator update") {
  auto split = small_split(6, 2, 2);
  auto c = quick_config(Regime::kGan);
  c.batch_size = 6;
  const auto r = train(c, split);
  CHECK(r.generator_updates == 1);
  CHECK(r.critic_updates == 1);
  CHECK(r.history.size() == 1);
}

TEST_CASE("WGAN-GP interleaves n_critic critic steps per batch") {
  auto split = small_split(10, 2, 3);
  auto c = quick_config(Regime::kWganGp);
  c.batch_size = 2;  // 5 batches
  c.validate_every = 0;
  const auto r = train(c, split);
  CHECK(r.generator_updates == 5);
  CHECK(r.critic_updates == 25);

  c.n_critic = 2;
  c.batch_size = 4;  // batches of 4, 4, 2
  const auto r2 = train(c, split);
  CHECK(r2.generator_updates == 3);
  CHECK(r2.critic_updates == 6);
}

TEST_CASE("discriminator and generator steps only touch their own parameters") {
  for (const auto regime : {Regime::kGan, Regime::kWganGp}) {
    auto split = small_split(4, 2, 4);
    Trainer t(quick_config(regime), split);
    const std::vector<std::size_t> idx{0, 1, 2, 3};

    const auto g0 = snapshot(t.generator());
    const auto d0 = snapshot(t.discriminator());
    (void)t.discriminator_step(idx);
    CHECK(snapshot(t.generator()) == g0);
    const auto d1 = snapshot(t.discriminator());
    CHECK(d1 != d0);

    (void)t.generator_step(idx);
    CHECK(snapshot(t.discriminator()) == d1);
    CHECK(snapshot(t.generator()) != g0);
  }
}

TEST_CASE("step helpers reject bad indices") {
  auto split = small_split(4, 2, 4);
  Trainer t(quick_config(Regime::kGan), split);
  const std::vector<std::size_t> bad{0, 9};
  CHECK_THROWS_AS((void)t.discriminator_step(bad), UsageError);
  CHECK_THROWS_AS((void)t.generator_step(std::span<const std::size_t>{}), UsageError);
}

TEST_CASE("WGAN-GP critic loss falls over the first 50 steps against a frozen generator") {
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto split = small_split(8, 2, 100 + seed);
    auto c = quick_config(Regime::kWganGp);
    c.seed = seed;
    Trainer t(c, split);
    const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<double> losses;
    for (int s = 0; s < 50; ++s) losses.push_back(t.discriminator_step(idx));
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 5; ++i) {
      head += losses[static_cast<std::size_t>(i)];
      tail += losses[losses.size() - 1 - static_cast<std::size_t>(i)];
    }
    passed += tail < head ? 1 : 0;
    for (const double l : losses) CHECK(std::isfinite(l));
  }
  CHECK(passed >= 4);
}

TEST_CASE("evaluate_epoch of constant generators") {
  const auto names = imu_channel_names();
  std::vector<PairedExample> val;
  for (int i = 0; i < 3; ++i) {
    val.push_back({constant_window(names, 0.3), constant_window(names, 0.6), "c" + std::to_string(i)});
  }
  nn::Generator<float> g(ModelSpec::autoencoder(6), 1);
  for (auto* p : g.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0f);  // sigmoid(0) = 0.5

  const auto m = evaluate_epoch(g, val, "gan");
  REQUIRE(m.channels.size() == 6);
  for (const auto& ch : m.channels) {
    CHECK(ch.rmse == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(ch.mae == doctest::Approx(0.1).epsilon(1e-6));
  }
  CHECK(m.model == "ae");
  CHECK(m.regime == "gan");
  CHECK(m.examples == 3);

  for (auto& e : val) e.target = constant_window(names, 0.5);
  for (const auto& ch : evaluate_epoch(g, val).channels) CHECK(ch.rmse == doctest::Approx(0.0).epsilon(1e-7));

  CHECK_THROWS_AS((void)evaluate_epoch(g, std::span<const PairedExample>{}), UsageError);
}

TEST_CASE("evaluate_epoch of an identity generator on identity targets is exact") {
  auto split = small_split(0, 5, 9);
  for (auto& e : split.validation) e.target = e.input;
  nn::Generator<float> id(ModelSpec::identity(), 0);
  const auto m = evaluate_epoch(id, split.validation);
  for (const auto& ch : m.channels) {
    CHECK(ch.rmse < 1e-7);
    CHECK(ch.mae < 1e-7);
  }
}

TEST_CASE("training writes logs, checkpoints and bundles") {
  TempDir dir("train-layout");
  auto split = small_split(6, 2, 5);
  auto c = quick_config(Regime::kGan);
  c.epochs = 2;
  c.checkpoint_every = 1;
  TrainOptions o;
  o.output_dir = dir.path();
  std::size_t callbacks = 0;
  o.on_epoch = [&](const EpochRecord&) { ++callbacks; };
  auto r = train(c, split, o);
  CHECK(callbacks == 2);

  const auto log = slurp(dir / layout::kTrainLog);
  CHECK(log.rfind(train_log_header(), 0) == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') == 3);
  const auto vlog = slurp(dir / layout::kValidationLog);
  CHECK(vlog.rfind("epoch,mean_rmse,rmse_ax,", 0) == 0);
  CHECK(std::count(vlog.begin(), vlog.end(), '\n') == 3);

  for (const auto* name : {"epoch_000001", "epoch_000002"}) {
    const auto ck = dir.path() / layout::kCheckpoints / name;
    CHECK(std::filesystem::exists(ck / layout::kGeneratorBundle));
    CHECK(std::filesystem::exists(ck / layout::kDiscriminatorBundle));
    CHECK(std::filesystem::exists(ck / layout::kOptimizerBundle));
    const auto state = nlohmann::json::parse(slurp(ck / layout::kState));
    CHECK(state.at("config_hash") == c.hash());
    CHECK(state.at("validation_rmse").size() == 6);
  }
  CHECK(std::filesystem::exists(dir / layout::kFinalGenerator));
  CHECK(std::filesystem::exists(dir / layout::kBestGenerator));
  const auto best = nlohmann::json::parse(slurp(dir / layout::kBestInfo));
  REQUIRE(r.best_epoch);
  CHECK(best.at("epoch") == *r.best_epoch);

  // The final bundle reproduces the returned generator.
  auto g = generator_from_bundle(read_bundle(dir / layout::kFinalGenerator));
  const auto a = translate_examples(g, split.validation);
  const auto b = translate_examples(r.generator, split.validation);
  CHECK(a == b);
}

TEST_CASE("checkpoint_every = 0 keeps only the final checkpoint") {
  TempDir dir("train-final");
  auto split = small_split(4, 2, 5);
  auto c = quick_config(Regime::kGan);
  c.epochs = 2;
  TrainOptions o;
  o.output_dir = dir.path();
  (void)train(c, split, o);
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / layout::kCheckpoints)) {
    CHECK(e.path().filename() == "epoch_000002");
    ++n;
  }
  CHECK(n == 1);
}

TEST_CASE("same config and seed give byte-identical logs") {
  for (const auto regime : {Regime::kGan, Regime::kWganGp}) {
    TempDir a("det-a"), b("det-b");
    auto split = small_split(6, 2, 6);
    auto c = quick_config(regime);
    c.epochs = 2;
    TrainOptions oa, ob;
    oa.output_dir = a.path();
    ob.output_dir = b.path();
    const auto ra = train(c, split, oa);
    const auto rb = train(c, split, ob);
    CHECK(slurp(a / layout::kTrainLog) == slurp(b / layout::kTrainLog));
    CHECK(slurp(a / layout::kValidationLog) == slurp(b / layout::kValidationLog));
    CHECK(slurp(a / layout::kFinalGenerator) == slurp(b / layout::kFinalGenerator));
    REQUIRE(ra.history.back().validation);
    CHECK(ra.history.back().validation->mean_rmse() == rb.history.back().validation->mean_rmse());

    c.seed += 1;
    TempDir other("det-c");
    TrainOptions oc;
    oc.output_dir = other.path();
    (void)train(c, split, oc);
    CHECK(slurp(a / layout::kTrainLog) != slurp(other / layout::kTrainLog));
  }
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
  for (const auto regime : {Regime::kGan, Regime::kWganGp}) {
    auto split = small_split(6, 2, 7);
    auto c = quick_config(regime);
    c.epochs = 3;
    c.checkpoint_every = 1;

    TempDir full("resume-full");
    TrainOptions of;
    of.output_dir = full.path();
    auto straight = train(c, split, of);

    TempDir first("resume-first");
    {
      TrainOptions o1;
      o1.output_dir = first.path();
      Trainer t(c, split, o1);
      (void)t.train_epoch();
    }
    TempDir second("resume-second");
    TrainOptions o2;
    o2.output_dir = second.path();
    auto resumed = Trainer::resume(first.path() / layout::kCheckpoints / "epoch_000001", split, o2);
    CHECK(resumed.epoch() == 1);
    resumed.run();
    CHECK(resumed.epoch() == 3);
    CHECK(resumed.generator_updates() == straight.generator_updates);
    CHECK(resumed.critic_updates() == straight.critic_updates);
    CHECK(slurp(second / layout::kTrainLog) == slurp(full / layout::kTrainLog));
    CHECK(slurp(second / layout::kValidationLog) == slurp(full / layout::kValidationLog));
    CHECK(snapshot(resumed.generator()) == snapshot(straight.generator));
  }
}

TEST_CASE("resume rejects a different split or a tampered state") {
  TempDir dir("resume-bad");
  auto split = small_split(6, 2, 8);
  auto c = quick_config(Regime::kGan);
  TrainOptions o;
  o.output_dir = dir.path();
  (void)train(c, split, o);
  const auto ck = dir.path() / layout::kCheckpoints / "epoch_000001";

  auto other = small_split(6, 2, 99);
  for (std::size_t i = 0; i < other.train.size(); ++i) other.train[i].source_id = "other" + std::to_string(i);
  CHECK_THROWS_AS((void)Trainer::resume(ck, other, {}), ConfigError);

  auto state = nlohmann::json::parse(slurp(ck / layout::kState));
  state["config_hash"] = "0000000000000000";
  testing::spit(ck / layout::kState, state.dump());
  CHECK_THROWS_AS((void)Trainer::resume(ck, split, {}), FormatError);

  testing::spit(ck / layout::kState, "{not json");
  CHECK_THROWS_AS((void)Trainer::resume(ck, split, {}), ParseError);
  CHECK_THROWS_AS((void)Trainer::resume(dir / "missing", split, {}), IoError);
}

TEST_CASE("a huge learning rate aborts with a diagnostic checkpoint") {
  TempDir dir("diverge");
  auto split = small_split(6, 2, 10);
  auto c = quick_config(Regime::kGan);
  c.epochs = 50;
  c.lr = 1e6;
  TrainOptions o;
  o.output_dir = dir.path();
  bool thrown = false;
  try {
    (void)train(c, split, o);
  } catch (const TrainingDiverged& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    CHECK(e.checkpoint_dir() == (dir / layout::kDiverged).string());
    CHECK(std::filesystem::exists(dir / layout::kDiverged / layout::kState));
    CHECK(std::filesystem::exists(dir / layout::kDiverged / layout::kGeneratorBundle));
  }
  CHECK(thrown);

  // Every row that made it into the log is finite.
  const auto log = slurp(dir / layout::kTrainLog);
  CHECK(log.find("nan") == std::string::npos);
  CHECK(log.find("inf") == std::string::npos);
}

TEST_CASE("signed U-Net output trains against remapped targets") {
  auto split = small_split(4, 2, 12);
  auto c = quick_config(Regime::kGan);
  c.generator = ModelKind::kUNet;
  c.unet_output = UNetOutput::kSigned;
  const auto r = train(c, split);
  REQUIRE(r.history.back().validation);
  for (const auto& ch : r.history.back().validation->channels) {
    CHECK(ch.rmse >= 0.0);
    CHECK(ch.rmse <= 1.0);
  }
}
