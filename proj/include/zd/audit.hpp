#pragma once

// Recomputes loss, balance violation and cost from a published dispatch.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zd/model.hpp"

namespace zd {

/// CPU clock that adjusted CPU times are normalized to, GHz.
inline constexpr double kReferenceGhz = 2.67;

struct ReportedDispatch {
  std::string method;
  std::vector<double> p;  // MW, taken at printed precision
  std::optional<double> reported_loss;
  std::optional<double> reported_cost;
  std::optional<double> cpu_ghz;
  std::optional<double> cpu_time_s;
};

struct BoundViolation {
  std::size_t unit = 0;
  std::string unit_id;
  double p = 0.0;
  std::string reason;
};

struct AuditReport {
  std::string method;
  double calc_loss = 0.0;   // MW
  double required = 0.0;    // demand + calc_loss
  double output_sum = 0.0;  // sum of p
  double violation = 0.0;   // output_sum - required; negative means short
  double recomputed_cost = 0.0;
  std::optional<double> reported_cost;
  std::vector<BoundViolation> bound_violations;
  std::optional<double> act;  // adjusted CPU time, p.u.
};

/// Tolerance for flagging capacity and prohibited-zone violations, MW.
inline constexpr double kAuditBoundTol = 1e-3;

/// `act_ref_time_s` enables the ACT column when the row carries CPU data.
AuditReport audit_dispatch(const SystemCase& sc, const ReportedDispatch& rd,
                           std::optional<double> act_ref_time_s = std::nullopt);

/// (given_ghz / 2.67) * (given_time_s / ref_time_s). Throws
/// NonPositiveReference when ref_time_s <= 0.
double adjusted_cpu_time(double given_ghz, double given_time_s, double ref_time_s);

struct AuditTable {
  std::vector<AuditReport> rows;                              // by |violation|, descending
  std::vector<std::pair<std::string, std::string>> errors;  // method, message
};

/// Audits every row; failures are collected rather than thrown. The sort is
/// stable, so rows with equal |violation| keep their input order.
AuditTable audit_table(const SystemCase& sc, std::span<const ReportedDispatch> rows,
                       std::optional<double> act_ref_time_s = std::nullopt);

std::string format_audit_text(const AuditTable& table);

}  // namespace zd
