#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wzb {

// Every failure the library reports is an Error carrying one of these codes.
enum class ErrorCode {
  // trajectory-core
  MissingColumn,
  NonMonotonicTime,
  EmptyFile,
  OutOfRangeValue,
  IrregularSampling,
  MalformedField,
  // endpoint-detect
  SignalTooShort,
  AllZeroEnergy,
  InvalidThresholds,
  // behavior-classify
  IntervalTooShort,
  DegenerateFeatureRange,
  SingleClassData,
  SolverNonConvergence,
  InsufficientClassSamples,
  MalformedModel,
  // kde-map
  EmptyCalibrationSet,
  MixedLabels,
  InvalidKdeConfig,
  // synthgen
  SpeedUnderflow,
  InvalidScript,
  // cli-pipeline
  UnreadableFile,
  ConfigError,
  NoTrajectories,
  IoError,
  InvalidArgument,
};

/// Broad class of an error; drives CLI exit codes (config 2, data 3, internal 4).
enum class ErrorClass { Config, Data, Internal };

std::string_view to_string(ErrorCode code);
ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// what() without the code prefix.
  const std::string& message() const noexcept { return message_; }
  ErrorClass error_class() const noexcept { return classify(code_); }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace wzb
