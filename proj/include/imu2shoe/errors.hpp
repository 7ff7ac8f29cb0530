// Copyright 2026 The imu2shoe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace imu2shoe {

/// Process exit codes shared by every command-line entry point.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

/// Base class of every error raised by the toolkit. Each subclass knows the
/// exit code the CLI reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual ExitCode exit_code() const noexcept { return ExitCode::kInternal; }
};

/// Caller violated an API precondition (empty batch, mismatched list lengths).
class UsageError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

/// Invalid configuration value or missing scaling entry.
class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

/// Tensor or window shape disagrees with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// Input data is well-formed but semantically unusable.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// Text input could not be parsed; the message carries the file and line.
class ParseError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// Binary weight bundle is corrupt or of an unsupported version.
class FormatError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// Bundle carries a format version this build cannot read.
class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// Training produced a non-finite loss. A diagnostic checkpoint has been
/// written to `checkpoint_dir()` when one was configured.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::string checkpoint_dir)
      : Error(what), checkpoint_dir_(std::move(checkpoint_dir)) {}
  [[nodiscard]] const std::string& checkpoint_dir() const noexcept { return checkpoint_dir_; }

 private:
  std::string checkpoint_dir_;
};

}  // namespace imu2shoe
