#include "zd/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zd/error.hpp"

namespace zd {

namespace {

constexpr double kSymmetryTol = 1e-12;

[[noreturn]] void fail(ErrorKind kind, const std::string& unit_id, const std::string& msg) {
  throw DispatchError(kind, "unit '" + unit_id + "': " + msg);
}

std::string fmt_zone(int k, const OperatingZone& z) {
  std::ostringstream os;
  os << "zone " << k << " [" << z.lower << ", " << z.upper << "]";
  return os.str();
}

void validate_unit(Unit& u) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(u.a) || !finite(u.b) || !finite(u.c) || !finite(u.e) || !finite(u.f) ||
      !finite(u.p_min) || !finite(u.p_max)) {
    fail(ErrorKind::InvalidUnit, u.id, "non-finite coefficient or limit");
  }
  if (u.p_prev && !finite(*u.p_prev)) fail(ErrorKind::InvalidUnit, u.id, "non-finite p_prev");
  if (u.p_min > u.p_max) fail(ErrorKind::InvalidUnit, u.id, "p_min > p_max");
  if (u.a < 0.0) fail(ErrorKind::InvalidUnit, u.id, "negative quadratic coefficient");
  if (u.e < 0.0 || u.f < 0.0) fail(ErrorKind::InvalidUnit, u.id, "negative valve coefficient");
  if (u.ramp_up < 0.0 || u.ramp_down < 0.0) fail(ErrorKind::InvalidUnit, u.id, "negative ramp rate");
  if (u.reserve_cap < 0.0) fail(ErrorKind::InvalidUnit, u.id, "negative reserve cap");
  if ((std::isfinite(u.ramp_up) || std::isfinite(u.ramp_down)) && !u.p_prev) {
    fail(ErrorKind::InvalidUnit, u.id, "ramp limits given without p_prev");
  }
  if (u.zones.empty()) fail(ErrorKind::ZoneOutsideCapacity, u.id, "no operating zones");

  std::stable_sort(u.zones.begin(), u.zones.end(),
                   [](const OperatingZone& x, const OperatingZone& y) { return x.lower < y.lower; });
  for (int k = 0; k < u.zone_count(); ++k) {
    const auto& z = u.zones[k];
    if (!finite(z.lower) || !finite(z.upper) || z.lower > z.upper) {
      fail(ErrorKind::InvalidUnit, u.id, fmt_zone(k, z) + " has lower > upper");
    }
    if (z.lower < u.p_min || z.upper > u.p_max) {
      fail(ErrorKind::ZoneOutsideCapacity, u.id, fmt_zone(k, z) + " outside capacity");
    }
    if (k > 0 && !(u.zones[k - 1].upper < z.lower)) {
      fail(ErrorKind::OverlappingZones, u.id,
           fmt_zone(k - 1, u.zones[k - 1]) + " overlaps " + fmt_zone(k, z));
    }
  }
  if (u.zones.front().lower != u.p_min || u.zones.back().upper != u.p_max) {
    fail(ErrorKind::ZoneOutsideCapacity, u.id, "zones must start at p_min and end at p_max");
  }
}

}  // namespace

Interval Unit::ramp_window() const noexcept {
  Interval w{p_min, p_max};
  if (p_prev) {
    w.lb = std::max(w.lb, *p_prev - ramp_down);
    w.ub = std::min(w.ub, *p_prev + ramp_up);
  }
  return w;
}

bool SystemCase::has_valve() const noexcept {
  return std::any_of(units.begin(), units.end(), [](const Unit& u) { return u.has_valve(); });
}

bool SystemCase::has_ramp() const noexcept {
  return std::any_of(units.begin(), units.end(), [](const Unit& u) {
    return u.p_prev && (std::isfinite(u.ramp_up) || std::isfinite(u.ramp_down));
  });
}

SystemCase validate_case(SystemCase sc, std::vector<std::string>* warnings) {
  if (sc.units.empty()) throw DispatchError(ErrorKind::InvalidUnit, "case has no units");
  if (!std::isfinite(sc.demand) || sc.demand < 0.0) {
    throw DispatchError(ErrorKind::InvalidUnit, "demand must be finite and non-negative");
  }
  if (!std::isfinite(sc.reserve_req) || sc.reserve_req < 0.0) {
    throw DispatchError(ErrorKind::InvalidUnit, "reserve requirement must be finite and non-negative");
  }
  double capacity = 0.0;
  for (auto& u : sc.units) {
    validate_unit(u);
    capacity += u.p_max;
  }
  if (capacity < sc.demand) {
    std::ostringstream os;
    os << "total capacity " << capacity << " MW below demand " << sc.demand << " MW";
    throw DispatchError(ErrorKind::InsufficientCapacity, os.str());
  }

  if (sc.loss) {
    auto& lm = *sc.loss;
    const std::size_t n = sc.units.size();
    if (lm.n != n || lm.B.size() != n * n || lm.B0.size() != n) {
      std::ostringstream os;
      os << "loss model dimension " << lm.n << " (B has " << lm.B.size() << " entries, B0 has "
         << lm.B0.size() << ") does not match " << n << " units";
      throw DispatchError(ErrorKind::DimensionMismatch, os.str());
    }
    if (!(lm.base_mva > 0.0) || !std::isfinite(lm.base_mva)) {
      throw DispatchError(ErrorKind::InvalidUnit, "loss base_mva must be positive");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        worst = std::max(worst, std::abs(lm.B[i * n + j] - lm.B[j * n + i]));
      }
    }
    if (worst > kSymmetryTol) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double avg = 0.5 * (lm.B[i * n + j] + lm.B[j * n + i]);
          lm.B[i * n + j] = avg;
          lm.B[j * n + i] = avg;
        }
      }
      if (warnings) {
        std::ostringstream os;
        os << "B matrix asymmetric (max |Bij - Bji| = " << worst << "); replaced by (B + B^T)/2";
        warnings->push_back(os.str());
      }
    }
  }
  return sc;
}

Interval effective_bounds(const Unit& unit, int k) noexcept {
  const auto& z = unit.zones[static_cast<std::size_t>(k)];
  const Interval w = unit.ramp_window();
  return {std::max(z.lower, w.lb), std::min(z.upper, w.ub)};
}

std::vector<int> reachable_zones(const Unit& unit) {
  std::vector<int> out;
  for (int k = 0; k < unit.zone_count(); ++k) {
    if (!effective_bounds(unit, k).empty()) out.push_back(k);
  }
  return out;
}

}  // namespace zd
