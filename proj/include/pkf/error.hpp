#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pkf {

enum class ErrorKind {
  ParseError,
  DimensionMismatch,
  InvalidDesign,
  BoundViolation,
  KnockoffInfeasible,
  PreconditionViolated,
  BudgetInvalid,
  DeltaTooSmall,
  PrivacyPreconditionFailed,
  SingularSystem,
  NonConvergence,
  MissingTruth,
  ConfigInvalid,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library. The kind is stable and meant to be
// matched on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidDesign: return "InvalidDesign";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::KnockoffInfeasible: return "KnockoffInfeasible";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::BudgetInvalid: return "BudgetInvalid";
    case ErrorKind::DeltaTooSmall: return "DeltaTooSmall";
    case ErrorKind::PrivacyPreconditionFailed: return "PrivacyPreconditionFailed";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::MissingTruth: return "MissingTruth";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pkf
