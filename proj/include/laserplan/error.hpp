#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laserplan {

enum class ErrorCode {
  InvalidArgument,
  DegenerateInput,
  EmptyOverlap,
  OutOfRange,
  OutsideWorkspace,
  NoConvergence,
  GridMismatch,
  InvalidTarget,
  NothingToCut,
  NoProgress,
  Stalled,
  PlantFault,
  ConstraintFault,
  DoesNotFit,
  InvalidGeometry,
  InsufficientMotion,
  NoBlobs,
  MissingData,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (and the CLI exit-code map) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace laserplan
