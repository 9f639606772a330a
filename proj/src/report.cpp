#include "zd/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "zd/parallel.hpp"

namespace zd {

using nlohmann::json;

namespace {

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json audit_json(const AuditReport& a) {
  json j;
  j["method"] = a.method;
  j["calc_loss_mw"] = a.calc_loss;
  j["required_mw"] = a.required;
  j["output_mw"] = a.output_sum;
  j["violation_mw"] = a.violation;
  j["recomputed_cost"] = a.recomputed_cost;
  j["reported_cost"] = opt_number(a.reported_cost);
  j["act"] = opt_number(a.act);
  json bv = json::array();
  for (const auto& v : a.bound_violations) {
    bv.push_back({{"unit", v.unit_id}, {"p_mw", v.p}, {"reason", v.reason}});
  }
  j["bound_violations"] = std::move(bv);
  return j;
}

}  // namespace

std::optional<double> detect_cpu_ghz() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("cpu MHz", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) break;
      try {
        return std::stod(line.substr(colon + 1)) / 1000.0;
      } catch (const std::exception&) {
        break;
      }
    }
  }
  return std::nullopt;
}

RunReport make_run_report(const SystemCase& sc, DispatchSolution solution, double balance_tol) {
  RunReport r;
  r.case_name = sc.name;
  r.loss_on = sc.loss.has_value();
  r.valve_on = sc.has_valve();
  r.ramp_on = sc.has_ramp();
  ReportedDispatch rd;
  rd.method = "this run";
  rd.p = solution.p;
  r.self_audit = audit_dispatch(sc, rd);
  r.balance_tol = balance_tol;
  r.cpu_ghz = detect_cpu_ghz();
  r.threads = max_threads();
  r.wall_time_s = solution.solve_time_s;
  if (!solution.converged) r.warnings.push_back("NotConverged: best iterate reported");
  for (const auto& d : solution.stats.diagnostics) r.warnings.push_back(d);
  if (std::abs(r.self_audit.violation) > balance_tol) {
    r.warnings.push_back("self-audit violation exceeds balance tolerance");
  }
  r.solution = std::move(solution);
  return r;
}

std::string report_to_json(const RunReport& r) {
  const DispatchSolution& s = r.solution;
  json j;
  j["case"] = r.case_name;
  j["conditions"] = {{"loss", r.loss_on}, {"valve", r.valve_on}, {"ramp", r.ramp_on}};
  json sol;
  sol["p_mw"] = s.p;
  sol["zones"] = s.assignment.zone_index;
  sol["loss_mw"] = s.loss_mw;
  sol["cost"] = s.cost;
  sol["reserve_mw"] = s.reserve;
  sol["balance_residual_mw"] = s.balance_residual;
  sol["solve_time_s"] = s.solve_time_s;
  sol["converged"] = s.converged;
  sol["starts_used"] = s.starts_used;
  json st;
  st["path"] = s.stats.path;
  st["assignments_total"] = s.stats.assignments_total;
  st["assignments_reachable"] = s.stats.assignments_reachable;
  st["assignments_solved"] = s.stats.assignments_solved;
  st["assignments_infeasible"] = s.stats.assignments_infeasible;
  st["nodes_created"] = s.stats.nodes_created;
  st["nodes_pruned"] = s.stats.nodes_pruned;
  st["nodes_infeasible"] = s.stats.nodes_infeasible;
  st["pruning_disabled"] = s.stats.pruning_disabled;
  json hist = json::array();
  for (const auto& h : s.stats.incumbent_history) hist.push_back({{"cost", h.cost}, {"time_s", h.time_s}});
  st["incumbent_history"] = std::move(hist);
  sol["stats"] = std::move(st);
  j["solution"] = std::move(sol);
  j["self_audit"] = audit_json(r.self_audit);
  j["balance_tol_mw"] = r.balance_tol;
  j["environment"] = {{"cpu_ghz", opt_number(r.cpu_ghz)}, {"threads", r.threads}, {"wall_time_s", r.wall_time_s}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string report_to_text(const RunReport& r, const SystemCase& sc) {
  const DispatchSolution& s = r.solution;
  std::ostringstream os;
  os << "case " << r.case_name << "  (loss " << (r.loss_on ? "on" : "off") << ", valve "
     << (r.valve_on ? "on" : "off") << ", ramp " << (r.ramp_on ? "on" : "off") << ")\n";
  std::size_t w = 4;
  for (const auto& u : sc.units) w = std::max(w, u.id.size());
  os << std::left << std::setw(static_cast<int>(w)) << "unit" << std::right << std::setw(6) << "zone"
     << std::setw(12) << "P (MW)" << std::setw(12) << "S (MW)" << '\n';
  os << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < s.p.size(); ++i) {
    os << std::left << std::setw(static_cast<int>(w)) << sc.units[i].id << std::right << std::setw(6)
       << s.assignment.zone_index[i] + 1 << std::setw(12) << s.p[i] << std::setw(12) << s.reserve[i] << '\n';
  }
  double sum = 0.0;
  for (double v : s.p) sum += v;
  os << "total output    " << std::setw(14) << sum << " MW\n";
  os << "loss            " << std::setw(14) << s.loss_mw << " MW\n";
  os << "violation       " << std::setw(14) << r.self_audit.violation << " MW\n";
  os << std::setprecision(2);
  os << "cost            " << std::setw(14) << s.cost << " $/h\n";
  os << "search          " << s.stats.path << ", " << s.stats.assignments_solved << " assignments solved, "
     << s.stats.nodes_pruned << " nodes pruned\n";
  os << std::setprecision(3) << "time            " << std::setw(14) << s.solve_time_s << " s (" << r.threads
     << " threads)\n";
  for (const auto& wmsg : r.warnings) os << "warning: " << wmsg << '\n';
  return os.str();
}

std::string audit_table_to_json(const AuditTable& t) {
  json j;
  json rows = json::array();
  for (const auto& a : t.rows) rows.push_back(audit_json(a));
  j["rows"] = std::move(rows);
  json errs = json::array();
  for (const auto& [m, e] : t.errors) errs.push_back({{"method", m}, {"error", e}});
  j["errors"] = std::move(errs);
  return j.dump(2) + "\n";
}

}  // namespace zd
