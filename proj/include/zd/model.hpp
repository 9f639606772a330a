#pragma once

// Domain types for a single-period economic dispatch instance.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zd {

/// Sentinel for a missing ramp limit or reserve cap.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Closed interval in MW. Empty when lb > ub.
struct Interval {
  double lb = 0.0;
  double ub = 0.0;

  bool empty() const noexcept { return lb > ub; }
  bool contains(double p, double tol = 0.0) const noexcept {
    return p >= lb - tol && p <= ub + tol;
  }
};

struct OperatingZone {
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const OperatingZone&, const OperatingZone&) = default;
};

struct Unit {
  std::string id;
  double a = 0.0;  // $/MW^2h
  double b = 0.0;  // $/MWh
  double c = 0.0;  // $/h
  double e = 0.0;  // $/h, valve-point amplitude
  double f = 0.0;  // rad/MW, valve-point frequency
  double p_min = 0.0;
  double p_max = 0.0;
  std::optional<double> p_prev;
  double ramp_up = kUnbounded;
  double ramp_down = kUnbounded;
  double reserve_cap = kUnbounded;
  std::vector<OperatingZone> zones;  // feasible zones, increasing and disjoint

  bool has_valve() const noexcept { return e > 0.0 && f > 0.0; }
  int zone_count() const noexcept { return static_cast<int>(zones.size()); }

  /// [p_min, p_max] intersected with the ramp window around p_prev.
  Interval ramp_window() const noexcept;

  friend bool operator==(const Unit&, const Unit&) = default;
};

/// Kron B-coefficients, all in per-unit on base_mva.
struct LossModel {
  std::size_t n = 0;
  std::vector<double> B;   // n x n, row-major
  std::vector<double> B0;  // n
  double B00 = 0.0;
  double base_mva = 100.0;

  double b(std::size_t i, std::size_t j) const noexcept { return B[i * n + j]; }

  friend bool operator==(const LossModel&, const LossModel&) = default;
};

struct SystemCase {
  std::string name;
  std::vector<Unit> units;
  double demand = 0.0;       // MW
  double reserve_req = 0.0;  // MW
  std::optional<LossModel> loss;
  std::map<std::string, std::string> provenance;

  std::size_t size() const noexcept { return units.size(); }
  bool has_valve() const noexcept;
  bool has_ramp() const noexcept;

  friend bool operator==(const SystemCase&, const SystemCase&) = default;
};

/// One feasible zone per unit (0-based).
struct ZoneAssignment {
  std::vector<int> zone_index;

  friend bool operator==(const ZoneAssignment&, const ZoneAssignment&) = default;
};

/// Checks every structural invariant and returns the normalized case: zones
/// sorted by lower bound and B symmetrized. Throws DispatchError naming the
/// offending unit. Symmetrization notes are appended to `warnings` when given.
SystemCase validate_case(SystemCase raw, std::vector<std::string>* warnings = nullptr);

/// Zone k intersected with the unit's capacity and ramp window. May be empty.
Interval effective_bounds(const Unit& unit, int k) noexcept;

/// Indices of zones whose effective bounds are non-empty.
std::vector<int> reachable_zones(const Unit& unit);

}  // namespace zd
