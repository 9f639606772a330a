#pragma once

// Run reports for the `solve` command: the solution, the condition flags, an
// audit of the solution against its own case, and the environment.

#include <optional>
#include <string>
#include <vector>

#include "zd/audit.hpp"
#include "zd/search.hpp"

namespace zd {

struct RunReport {
  std::string case_name;
  bool loss_on = false;
  bool valve_on = false;
  bool ramp_on = false;
  DispatchSolution solution;
  AuditReport self_audit;
  double balance_tol = 0.0;
  std::optional<double> cpu_ghz;
  int threads = 1;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
};

RunReport make_run_report(const SystemCase& sc, DispatchSolution solution, double balance_tol);

/// Clock of the first CPU from /proc/cpuinfo, if readable.
std::optional<double> detect_cpu_ghz();

std::string report_to_json(const RunReport& r);
std::string report_to_text(const RunReport& r, const SystemCase& sc);
std::string audit_table_to_json(const AuditTable& t);

}  // namespace zd
