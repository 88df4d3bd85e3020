#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aitsahalia {

enum class ErrorCode {
  NonPositiveCoefficient,
  ExponentOutOfRange,
  InadmissibleRegime,
  NonPositiveState,
  NonPositiveStep,
  Overflow,
  SolverFailed,
  StepTooLarge,
  LevelTooDeep,
  LevelMismatch,
  RefNotFiner,
  DegenerateFit,
  BudgetExceeded,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; the code lets callers
// (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorCode::InadmissibleRegime: return "InadmissibleRegime";
    case ErrorCode::NonPositiveState: return "NonPositiveState";
    case ErrorCode::NonPositiveStep: return "NonPositiveStep";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::LevelTooDeep: return "LevelTooDeep";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::RefNotFiner: return "RefNotFiner";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace aitsahalia
