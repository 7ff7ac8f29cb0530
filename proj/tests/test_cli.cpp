// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "imu2shoe/dataset.hpp"
#include "imu2shoe/rng.hpp"
#include "imu2shoe/translate.hpp"
#include "imu2shoe/weights_io.hpp"
#include "test_util.hpp"

using namespace imu2shoe;
using imu2shoe::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args, const std::string& env = "") {
  const auto cmd = fmt::format("{} {} {} 2>&1", env, IMU2SHOE_CLI_PATH, args);
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Recording random_recording(std::size_t length, Rng& rng) {
  Recording rec;
  rec.channel_names = imu_channel_names();
  rec.length = length;
  rec.data.resize(6 * length);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t t = 0; t < length; ++t) rec.data[c * length + t] = rng.uniform(-1.0, 1.0) * (c < 3 ? 2.0 : 500.0);
  }
  return rec;
}

// Shoe windows equal to the wrist windows, so an identity generator is exact.
void write_mirror_dataset(const fs::path& path, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PairedExample> ex;
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = random_recording(kWindowLength, rng);
    SignalWindow w(rec.channel_names, rec.data, Units::kPhysical);
    ex.push_back({w, w, fmt::format("m{}", i)});
  }
  write_examples_jsonl(path, ex);
}

std::string config_value(const fs::path& config_txt, const std::string& key) {
  const auto text = testing::slurp(config_txt);
  const auto at = text.find("\n" + key + " = ");
  if (at == std::string::npos) return {};
  const auto start = at + key.size() + 4;
  return text.substr(start, text.find('\n', start) - start);
}

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
  return n;
}

constexpr const char* kTiny = "--set epochs=1 --set batch_size=4 --set checkpoint_every=0 --quiet";

}  // namespace

TEST_CASE("help, unknown commands and print-defaults") {
  CHECK(run("--help").code == 0);
  CHECK(run("train --help").output.find("--print-defaults") != std::string::npos);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("").code == 1);
  const auto d = run("train --print-defaults");
  CHECK(d.code == 0);
  for (const char* key : {"data", "mode", "output_dir", "regime", "epochs", "lr", "lambda_gp", "batch_size", "n_critic",
                          "seed", "dropout", "conv_kernel", "transposed_kernel"}) {
    const bool listed = d.output.find(std::string("\n") + key + " = ") != std::string::npos ||
                        d.output.rfind(std::string(key) + " = ", 0) == 0;
    CHECK_MESSAGE(listed, key);
  }
}

TEST_CASE("prepare windows paired recordings") {
  TempDir dir("cli-prepare");
  Rng rng(1);
  fs::create_directories(dir / "raw");
  for (const char* id : {"a", "b"}) {
    write_recording_csv(dir / "raw" / fmt::format("{}_wrist.csv", id), random_recording(512, rng));
    write_recording_csv(dir / "raw" / fmt::format("{}_shoe.csv", id), random_recording(512, rng));
  }
  const auto r = run(fmt::format("prepare --raw {} --out {} --stride 256", q(dir / "raw"), q(dir / "ex.jsonl")));
  CHECK(r.code == 0);
  CHECK(r.output.find("4 examples") != std::string::npos);
  CHECK(read_examples_jsonl(dir / "ex.jsonl").size() == 4);

  fs::create_directories(dir / "empty");
  const auto e = run(fmt::format("prepare --raw {} --out {}", q(dir / "empty"), q(dir / "x.jsonl")));
  CHECK(e.code == 2);
  CHECK(e.output.find("no paired recordings found") != std::string::npos);
  CHECK(run(fmt::format("prepare --out {}", q(dir / "x.jsonl"))).code == 1);
}

TEST_CASE("train writes logs and one checkpoint; config errors name the field") {
  TempDir dir("cli-train");
  REQUIRE(run(fmt::format("prepare --synthetic 10 --seed 2 --out {}", q(dir / "ex.jsonl"))).code == 0);
  const auto r = run(fmt::format("train --data {} --out {} --set regime=WGAN-GP {}", q(dir / "ex.jsonl"),
                                 q(dir / "run"), kTiny));
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "run" / "generator.bundle"));
  CHECK(count_files(dir / "run" / "checkpoints") == 0);
  std::size_t checkpoints = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "run" / "checkpoints")) ++checkpoints;
  CHECK(checkpoints == 1);
  CHECK(fs::exists(dir / "run" / "checkpoints" / "epoch_000001" / "state.json"));
  const auto log = testing::slurp(dir / "run" / "train_log.csv");
  CHECK(log.rfind("epoch,g_loss,d_loss,gp,", 0) == 0);

  const auto bad = run(fmt::format("train --data {} --out {} --set lr=0", q(dir / "ex.jsonl"), q(dir / "r2")));
  CHECK(bad.code == 1);
  CHECK(bad.output.find("lr") != std::string::npos);
  const auto unknown = run(fmt::format("train --data {} --set learning_rate=1", q(dir / "ex.jsonl")));
  CHECK(unknown.code == 1);
  CHECK(unknown.output.find("learning_rate") != std::string::npos);
  testing::spit(dir / "broken.txt", "epochs = 3\nthis line has no equals sign\n");
  const auto broken = run(fmt::format("train --config {} --data {}", q(dir / "broken.txt"), q(dir / "ex.jsonl")));
  CHECK(broken.code == 2);
  CHECK(broken.output.find(":2:") != std::string::npos);
  CHECK(run(fmt::format("train --data {} --out {} --set out_channels=2", q(dir / "ex.jsonl"), q(dir / "r3"))).code == 1);
  CHECK(run("train --set epochs=1").code == 1);
  CHECK(run(fmt::format("train --data {} --out {} {}", q(dir / "missing.jsonl"), q(dir / "r4"), kTiny)).code == 2);
}

TEST_CASE("seed precedence: flag over file over environment over default") {
  TempDir dir("cli-seed");
  REQUIRE(run(fmt::format("prepare --synthetic 6 --out {}", q(dir / "ex.jsonl"))).code == 0);
  const auto data = q(dir / "ex.jsonl");
  testing::spit(dir / "with_seed.txt", "seed = 5\n");
  testing::spit(dir / "no_seed.txt", "epochs = 1\n");

  REQUIRE(run(fmt::format("train --data {} --out {} {}", data, q(dir / "d"), kTiny)).code == 0);
  CHECK(config_value(dir / "d" / "config.txt", "seed") == "0");
  REQUIRE(run(fmt::format("train --config {} --data {} --out {} {}", q(dir / "no_seed.txt"), data, q(dir / "e"), kTiny),
              "IMU2SHOE_SEED=9").code == 0);
  CHECK(config_value(dir / "e" / "config.txt", "seed") == "9");
  REQUIRE(run(fmt::format("train --config {} --data {} --out {} {}", q(dir / "with_seed.txt"), data, q(dir / "f"), kTiny),
              "IMU2SHOE_SEED=9").code == 0);
  CHECK(config_value(dir / "f" / "config.txt", "seed") == "5");
  REQUIRE(run(fmt::format("train --config {} --data {} --out {} --seed 7 {}", q(dir / "with_seed.txt"), data,
                          q(dir / "g"), kTiny),
              "IMU2SHOE_SEED=9").code == 0);
  CHECK(config_value(dir / "g" / "config.txt", "seed") == "7");
  CHECK(run(fmt::format("train --data {} {}", data, kTiny), "IMU2SHOE_SEED=abc").code == 1);
}

TEST_CASE("same seed gives byte-identical logs; resume continues the run") {
  TempDir dir("cli-det");
  REQUIRE(run(fmt::format("prepare --synthetic 10 --out {}", q(dir / "ex.jsonl"))).code == 0);
  const auto data = q(dir / "ex.jsonl");
  const std::string cfg = "--set epochs=2 --set batch_size=4 --set checkpoint_every=1 --seed 3 --quiet";
  REQUIRE(run(fmt::format("train --data {} --out {} {}", data, q(dir / "a"), cfg)).code == 0);
  REQUIRE(run(fmt::format("train --data {} --out {} {}", data, q(dir / "b"), cfg)).code == 0);
  CHECK(testing::slurp(dir / "a" / "train_log.csv") == testing::slurp(dir / "b" / "train_log.csv"));
  CHECK(testing::slurp(dir / "a" / "generator.bundle") == testing::slurp(dir / "b" / "generator.bundle"));

  REQUIRE(run(fmt::format("train --data {} --out {} --resume {} {}", data, q(dir / "c"),
                          q(dir / "a" / "checkpoints" / "epoch_000001"), cfg))
              .code == 0);
  CHECK(testing::slurp(dir / "a" / "train_log.csv") == testing::slurp(dir / "c" / "train_log.csv"));
  CHECK(run(fmt::format("train --data {} --out {} --resume {} {}", data, q(dir / "d"), q(dir / "nowhere"), cfg))
            .code != 0);
}

TEST_CASE("evaluate, translate, plot and export-weights") {
  TempDir dir("cli-eval");
  write_mirror_dataset(dir / "mirror.jsonl", 5, 4);
  REQUIRE(run(fmt::format("export-weights --identity --out {}", q(dir / "id.bundle"))).code == 0);
  const auto ev = run(fmt::format("evaluate --bundle {} --data {} --out {}", q(dir / "id.bundle"),
                                  q(dir / "mirror.jsonl"), q(dir / "eval")));
  CHECK(ev.code == 0);
  const auto report = nlohmann::json::parse(testing::slurp(dir / "eval" / "metrics.json"));
  CHECK(report.at("examples") == 5);
  for (const auto& c : report.at("channels")) CHECK(c.at("rmse").get<double>() < 1e-6);
  CHECK(fs::exists(dir / "eval" / "metrics.txt"));
  CHECK(run(fmt::format("evaluate --bundle {} --data {}", q(dir / "nope.bundle"), q(dir / "mirror.jsonl"))).code == 2);
  CHECK(run(fmt::format("evaluate --bundle {} --data {}", q(dir / "id.bundle"), q(dir / "nope.jsonl"))).code == 2);

  // A two-channel generator for translate and plot.
  REQUIRE(run(fmt::format("train --data {} --out {} --set mode=2ch {}", q(dir / "mirror.jsonl"), q(dir / "run2"), kTiny))
              .code == 0);
  const auto bundle2 = q(dir / "run2" / "generator.bundle");
  CHECK(read_bundle(dir / "run2" / "generator.bundle").header.out_channels == 2);

  const auto all = read_examples_jsonl(dir / "mirror.jsonl");
  std::vector<PairedExample> first = {all[0]};
  write_examples_jsonl(dir / "one.jsonl", first);
  REQUIRE(run(fmt::format("translate --bundle {} --input {} --out {}", bundle2, q(dir / "one.jsonl"),
                          q(dir / "one_out.jsonl")))
              .code == 0);
  const auto one = read_windows_jsonl(dir / "one_out.jsonl");
  REQUIRE(one.size() == 1);
  CHECK(one[0].window.channel_names() == std::vector<std::string>{"wtot", "wy"});
  CHECK(one[0].window.units() == Units::kScaled);

  REQUIRE(run(fmt::format("translate --bundle {} --input {} --out {} --physical", bundle2, q(dir / "mirror.jsonl"),
                          q(dir / "all_out.jsonl")))
              .code == 0);
  const auto many = read_windows_jsonl(dir / "all_out.jsonl");
  REQUIRE(many.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(many[i].source_id == fmt::format("m{}", i));
  CHECK(many[0].window.units() == Units::kPhysical);

  CHECK(run(fmt::format("plot --bundle {} --data {} -k 0 --out {}", bundle2, q(dir / "mirror.jsonl"), q(dir / "p0")))
            .code == 0);
  CHECK(count_files(dir / "p0") == 0);
  CHECK(run(fmt::format("plot --bundle {} --data {} -k 3 --out {}", bundle2, q(dir / "mirror.jsonl"), q(dir / "p3")))
            .code == 0);
  CHECK(count_files(dir / "p3") == 3);

  REQUIRE(run(fmt::format("export-weights --checkpoint {} --out {}", q(dir / "run2" / "checkpoints" / "epoch_000001"),
                          q(dir / "exported.bundle")))
              .code == 0);
  const auto a = read_bundle(dir / "exported.bundle");
  const auto b = read_bundle(dir / "run2" / "checkpoints" / "epoch_000001" / "generator.bundle");
  CHECK(a == b);
  CHECK(run(fmt::format("export-weights --out {}", q(dir / "x.bundle"))).code == 1);
}
