#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zd {

enum class ErrorKind {
  OverlappingZones,
  ZoneOutsideCapacity,
  InvalidUnit,
  DimensionMismatch,
  InsufficientCapacity,
  Infeasible,
  NotConverged,
  ParseError,
  HasLossModel,
  NonPositiveReference,
};

std::string_view to_string(ErrorKind kind) noexcept;

// True for the kinds raised by validate_case.
bool is_validation_error(ErrorKind kind) noexcept;

class DispatchError : public std::runtime_error {
 public:
  DispatchError(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace zd
