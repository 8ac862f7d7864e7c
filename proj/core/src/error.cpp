#include "wzb/error.hpp"

namespace wzb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::OutOfRangeValue: return "OutOfRangeValue";
    case ErrorCode::IrregularSampling: return "IrregularSampling";
    case ErrorCode::MalformedField: return "MalformedField";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::AllZeroEnergy: return "AllZeroEnergy";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::IntervalTooShort: return "IntervalTooShort";
    case ErrorCode::DegenerateFeatureRange: return "DegenerateFeatureRange";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::SolverNonConvergence: return "SolverNonConvergence";
    case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::MixedLabels: return "MixedLabels";
    case ErrorCode::InvalidKdeConfig: return "InvalidKdeConfig";
    case ErrorCode::SpeedUnderflow: return "SpeedUnderflow";
    case ErrorCode::InvalidScript: return "InvalidScript";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NoTrajectories: return "NoTrajectories";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidKdeConfig:
    case ErrorCode::InvalidThresholds:
    case ErrorCode::InvalidScript:
    case ErrorCode::InvalidArgument:
      return ErrorClass::Config;
    case ErrorCode::SolverNonConvergence:
    case ErrorCode::IoError:
      return ErrorClass::Internal;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace wzb
