#include "zd/error.hpp"

namespace zd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OverlappingZones: return "OverlappingZones";
    case ErrorKind::ZoneOutsideCapacity: return "ZoneOutsideCapacity";
    case ErrorKind::InvalidUnit: return "InvalidUnit";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InsufficientCapacity: return "InsufficientCapacity";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::HasLossModel: return "HasLossModel";
    case ErrorKind::NonPositiveReference: return "NonPositiveReference";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OverlappingZones:
    case ErrorKind::ZoneOutsideCapacity:
    case ErrorKind::InvalidUnit:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InsufficientCapacity:
      return true;
    default:
      return false;
  }
}

DispatchError::DispatchError(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

}  // namespace zd
