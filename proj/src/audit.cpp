#include "zd/audit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "zd/cost.hpp"
#include "zd/error.hpp"
#include "zd/loss.hpp"

namespace zd {

namespace {

std::vector<BoundViolation> check_bounds(const SystemCase& sc, std::span<const double> p) {
  std::vector<BoundViolation> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Unit& u = sc.units[i];
    const double x = p[i];
    if (x < u.p_min - kAuditBoundTol || x > u.p_max + kAuditBoundTol) {
      out.push_back({i, u.id, x, "outside capacity"});
      continue;
    }
    const bool in_zone = std::any_of(u.zones.begin(), u.zones.end(), [&](const OperatingZone& z) {
      return x >= z.lower - kAuditBoundTol && x <= z.upper + kAuditBoundTol;
    });
    if (!in_zone) out.push_back({i, u.id, x, "inside prohibited zone"});
  }
  return out;
}

}  // namespace

double adjusted_cpu_time(double given_ghz, double given_time_s, double ref_time_s) {
  if (!(ref_time_s > 0.0)) {
    throw DispatchError(ErrorKind::NonPositiveReference, "reference CPU time must be positive");
  }
  return (given_ghz / kReferenceGhz) * (given_time_s / ref_time_s);
}

AuditReport audit_dispatch(const SystemCase& sc, const ReportedDispatch& rd, std::optional<double> act_ref_time_s) {
  if (rd.p.size() != sc.size()) {
    std::ostringstream os;
    os << "'" << rd.method << "' has " << rd.p.size() << " outputs for " << sc.size() << " units";
    throw DispatchError(ErrorKind::DimensionMismatch, os.str());
  }
  AuditReport r;
  r.method = rd.method;
  r.calc_loss = sc.loss ? transmission_loss(*sc.loss, rd.p) : 0.0;
  r.required = sc.demand + r.calc_loss;
  r.output_sum = 0.0;
  for (double v : rd.p) r.output_sum += v;
  r.violation = r.output_sum - r.required;
  r.recomputed_cost = total_cost(sc.units, rd.p);
  r.reported_cost = rd.reported_cost;
  r.bound_violations = check_bounds(sc, rd.p);
  if (act_ref_time_s && rd.cpu_ghz && rd.cpu_time_s) {
    r.act = adjusted_cpu_time(*rd.cpu_ghz, *rd.cpu_time_s, *act_ref_time_s);
  }
  return r;
}

AuditTable audit_table(const SystemCase& sc, std::span<const ReportedDispatch> rows,
                       std::optional<double> act_ref_time_s) {
  AuditTable t;
  for (const auto& rd : rows) {
    try {
      t.rows.push_back(audit_dispatch(sc, rd, act_ref_time_s));
    } catch (const std::exception& e) {
      t.errors.emplace_back(rd.method, e.what());
    }
  }
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const AuditReport& a, const AuditReport& b) {
    return std::abs(a.violation) > std::abs(b.violation);
  });
  return t;
}

std::string format_audit_text(const AuditTable& table) {
  std::size_t width = 6;
  for (const auto& r : table.rows) width = std::max(width, r.method.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Method" << std::right << std::setw(11) << "Calc.Pl"
     << std::setw(12) << "PD+PL" << std::setw(12) << "Output" << std::setw(10) << "Viol." << std::setw(12)
     << "Cost" << std::setw(8) << "ACT" << "  Flags\n";
  os << std::fixed;
  for (const auto& r : table.rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.method << std::right << std::setprecision(4)
       << std::setw(11) << r.calc_loss << std::setw(12) << r.required << std::setw(12) << r.output_sum
       << std::setw(10) << r.violation << std::setprecision(2) << std::setw(12) << r.recomputed_cost;
    if (r.act) {
      os << std::setw(8) << *r.act;
    } else {
      os << std::setw(8) << "-";
    }
    os << "  ";
    for (std::size_t k = 0; k < r.bound_violations.size(); ++k) {
      const auto& v = r.bound_violations[k];
      os << (k ? "; " : "") << v.unit_id << " " << v.reason;
    }
    os << '\n';
  }
  for (const auto& [method, msg] : table.errors) os << "error: " << method << ": " << msg << '\n';
  return os.str();
}

}  // namespace zd
