#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ofdmsense {

enum class ErrorCode {
  InsufficientSamples,
  UnsupportedRatio,
  IndexOutOfRange,
  ZeroPowerSignal,
  BitLengthMismatch,
  ConfigMismatch,
  AllocationConflict,
  UnknownFamily,
  SyncFailure,
  EmptyFeatureSet,
  InvalidArgument,
  FormatError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::UnsupportedRatio: return "UnsupportedRatio";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroPowerSignal: return "ZeroPowerSignal";
    case ErrorCode::BitLengthMismatch: return "BitLengthMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::AllocationConflict: return "AllocationConflict";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::SyncFailure: return "SyncFailure";
    case ErrorCode::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code and, for pipeline failures,
/// the name of the stage that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(format(code, message, stage)),
        code_(code),
        stage_(std::move(stage)),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Copy of this error re-tagged with a pipeline stage.
  Error with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

 private:
  static std::string format(ErrorCode code, const std::string& message, const std::string& stage) {
    std::string out;
    if (!stage.empty()) out += "[" + stage + "] ";
    out += std::string(to_string(code));
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace ofdmsense
