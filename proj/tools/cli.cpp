#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "zd/audit.hpp"
#include "zd/case_io.hpp"
#include "zd/parallel.hpp"
#include "zd/report.hpp"
#include "zd/search.hpp"

namespace zd::cli {

namespace {

namespace fs = std::filesystem;

struct SolveFlags {
  bool no_loss = false;
  bool no_valve = false;
  std::uint64_t seed = SolveOptions{}.rng_seed;
  int starts = 0;
  double tol = SolveOptions{}.balance_tol;
  std::uint64_t enum_threshold = SearchOptions{}.enum_threshold;
};

SystemCase apply_conditions(SystemCase sc, const SolveFlags& f) {
  if (f.no_loss) sc.loss.reset();
  if (f.no_valve) {
    for (auto& u : sc.units) u.e = u.f = 0.0;
  }
  return sc;
}

SearchOptions search_options(const SolveFlags& f) {
  SearchOptions o;
  o.nlp.rng_seed = f.seed;
  o.nlp.n_starts = f.starts;
  o.nlp.balance_tol = f.tol;
  o.enum_threshold = f.enum_threshold;
  return o;
}

int exit_code_for(const DispatchError& e) {
  if (e.kind() == ErrorKind::ParseError || is_validation_error(e.kind())) return kInvalidInput;
  if (e.kind() == ErrorKind::Infeasible) return kInfeasible;
  return kFailure;
}

SystemCase load_with_warnings(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  SystemCase sc = load_case(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return sc;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const SystemCase sc = load_with_warnings(path, err);
  std::size_t zones = 0;
  for (const auto& u : sc.units) zones += u.zones.size();
  out << "valid: " << sc.name << ", " << sc.size() << " units, " << zones << " operating zones, "
      << assignment_space_size(sc) << " zone assignments (" << reachable_assignment_count(sc)
      << " reachable under ramp limits), loss model " << (sc.loss ? "present" : "absent") << '\n';
  return kOk;
}

int cmd_solve(const std::string& path, const SolveFlags& flags, bool as_json, std::ostream& out, std::ostream& err) {
  const SystemCase sc = apply_conditions(load_with_warnings(path, err), flags);
  const SearchOptions opts = search_options(flags);
  DispatchSolution sol;
  try {
    sol = solve(sc, opts);
  } catch (const NotConvergedError& e) {
    err << "warning: " << e.what() << '\n';
    sol.p = e.best().p;
    sol.converged = false;
  }
  const RunReport rep = make_run_report(sc, std::move(sol), opts.nlp.balance_tol);
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  out << (as_json ? report_to_json(rep) : report_to_text(rep, sc));
  return kOk;
}

int cmd_audit(const std::string& case_path, const std::string& rows_path, std::optional<double> act_ref, bool as_json,
              std::ostream& out, std::ostream& err) {
  const SystemCase sc = load_with_warnings(case_path, err);
  const ReportedTable rt = load_reported(rows_path);
  const AuditTable t = audit_table(sc, rt.rows, act_ref);
  out << (as_json ? audit_table_to_json(t) : format_audit_text(t));
  return t.errors.empty() ? kOk : kFailure;
}

int cmd_replicate(const std::string& path, int n, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const SystemCase sc = load_with_warnings(path, err);
  const SystemCase rep = replicate_case(sc, n);
  write_case(rep, out_path);
  out << "wrote " << out_path << ": " << rep.size() << " units, demand " << format_decimal(rep.demand) << " MW\n";
  return kOk;
}

std::optional<double> suite_number(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->is_string() ? parse_decimal(it->get<std::string>(), key) : it->get<double>();
}

int cmd_bench(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path suite_path = fs::path(dir) / "suite.json";
  nlohmann::json suite;
  try {
    suite = nlohmann::json::parse(read_text_file(suite_path));
  } catch (const nlohmann::json::exception& e) {
    throw DispatchError(ErrorKind::ParseError, suite_path.string() + ": " + e.what());
  }
  const std::uint64_t seed = suite.value("seed", SolveOptions{}.rng_seed);

  out << std::left << std::setw(16) << "case" << std::right << std::setw(12) << "cost" << std::setw(12) << "expected"
      << std::setw(11) << "loss" << std::setw(10) << "viol." << std::setw(9) << "time s" << "  status\n";
  int mismatches = 0;
  for (const auto& entry : suite.at("cases")) {
    const std::string name = entry.at("name").get<std::string>();
    SolveFlags flags;
    flags.seed = seed;
    if (const auto it = entry.find("options"); it != entry.end()) {
      flags.no_loss = it->value("no_loss", false);
      flags.no_valve = it->value("no_valve", false);
      flags.starts = it->value("starts", 0);
    }
    out << std::left << std::setw(16) << name << std::right << std::flush;
    try {
      const SystemCase sc =
          apply_conditions(load_with_warnings((fs::path(dir) / entry.at("case").get<std::string>()).string(), err), flags);
      const DispatchSolution sol = solve(sc, search_options(flags));
      ReportedDispatch rd{"bench", sol.p, {}, {}, {}, {}};
      const AuditReport a = audit_dispatch(sc, rd);
      const nlohmann::json exp = entry.value("expected", nlohmann::json::object());
      std::string status = "-";
      std::optional<double> shown;
      bool ok = true;
      bool checked = false;
      if (const auto c = suite_number(exp, "cost")) {
        shown = c;
        checked = true;
        ok &= std::abs(sol.cost - *c) <= suite_number(exp, "cost_tol").value_or(0.01);
      }
      if (const auto cm = suite_number(exp, "cost_max")) {
        shown = cm;
        checked = true;
        ok &= sol.cost <= *cm;
      }
      if (const auto l = suite_number(exp, "loss")) {
        checked = true;
        ok &= std::abs(sol.loss_mw - *l) <= suite_number(exp, "loss_tol").value_or(0.001);
      }
      if (checked) status = ok ? "match" : "MISMATCH";
      mismatches += checked && !ok;
      out << std::fixed << std::setprecision(2) << std::setw(12) << sol.cost;
      if (shown) {
        out << std::setw(12) << *shown;
      } else {
        out << std::setw(12) << "-";
      }
      out << std::setprecision(4) << std::setw(11) << sol.loss_mw << std::setw(10) << a.violation
          << std::setprecision(3) << std::setw(9) << sol.solve_time_s << "  " << status << '\n';
    } catch (const DispatchError& e) {
      ++mismatches;
      out << "  error: " << e.what() << '\n';
    }
    out.unsetf(std::ios::floatfield);
  }
  out << mismatches << " case(s) off their expected values\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  apply_thread_limit_from_env();
  CLI::App app{"Economic dispatch with prohibited zones, valve points, ramps, reserve and losses", "zonedispatch"};
  app.require_subcommand(1);

  std::string case_path;
  std::string rows_path;
  std::string out_path;
  std::string suite_dir;
  SolveFlags flags;
  bool want_json = false;
  bool want_text = false;
  std::optional<double> act_ref;
  int copies = 1;

  auto* validate = app.add_subcommand("validate", "Check a case file");
  validate->add_option("case", case_path, "Case file")->required();

  auto* solve_cmd = app.add_subcommand("solve", "Solve a case");
  solve_cmd->add_option("case", case_path, "Case file")->required();
  solve_cmd->add_flag("--no-loss", flags.no_loss, "Ignore the loss model");
  solve_cmd->add_flag("--no-valve", flags.no_valve, "Drop valve-point terms");
  solve_cmd->add_option("--seed", flags.seed, "RNG seed for multi-start");
  solve_cmd->add_option("--starts", flags.starts, "Starts per subproblem (0 = automatic)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--tol", flags.tol, "Balance tolerance, MW")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--enum-threshold", flags.enum_threshold, "Largest zone product solved by enumeration");
  auto* json_flag = solve_cmd->add_flag("--json", want_json, "JSON report");
  solve_cmd->add_flag("--text", want_text, "Text report (default)")->excludes(json_flag);

  auto* audit_cmd = app.add_subcommand("audit", "Audit reported dispatches against a case");
  audit_cmd->add_option("case", case_path, "Case file")->required();
  audit_cmd->add_option("rows", rows_path, "Reported-dispatch file")->required();
  audit_cmd->add_option("--act-ref", act_ref, "Reference CPU time for ACT, seconds");
  audit_cmd->add_flag("--json", want_json, "JSON output");

  auto* bench = app.add_subcommand("bench", "Run a benchmark suite directory");
  bench->add_option("suite-dir", suite_dir, "Directory holding suite.json")->required();

  auto* replicate = app.add_subcommand("replicate", "Write an n-fold replicated case");
  replicate->add_option("case", case_path, "Case file")->required();
  replicate->add_option("-n", copies, "Number of copies")->required()->check(CLI::PositiveNumber);
  replicate->add_option("-o", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(case_path, out, err);
    if (*solve_cmd) return cmd_solve(case_path, flags, want_json, out, err);
    if (*audit_cmd) return cmd_audit(case_path, rows_path, act_ref, want_json, out, err);
    if (*bench) return cmd_bench(suite_dir, out, err);
    if (*replicate) return cmd_replicate(case_path, copies, out_path, out, err);
  } catch (const DispatchError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace zd::cli
