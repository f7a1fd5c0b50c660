#include "laserplan/error.hpp"

namespace laserplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::OutsideWorkspace: return "OutsideWorkspace";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::NothingToCut: return "NothingToCut";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::PlantFault: return "PlantFault";
    case ErrorCode::ConstraintFault: return "ConstraintFault";
    case ErrorCode::DoesNotFit: return "DoesNotFit";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InsufficientMotion: return "InsufficientMotion";
    case ErrorCode::NoBlobs: return "NoBlobs";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace laserplan
