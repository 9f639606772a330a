#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "cli.hpp"
#include "zd/error.hpp"
#include "zd/search.hpp"

using namespace zd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "zd_unit_tests";
  fs::create_directories(d);
  return d;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "zonedispatch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

ErrorKind parse_kind(const std::string& text) {
  try {
    parse_case(text);
  } catch (const DispatchError& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::NotConverged;
}

const char* kMinimalCase = R"({
  "schema_version": 1, "name": "m", "demand_mw": "50",
  "units": [{"id": "u", "a": "0.01", "b": "2", "c": "1", "p_min": "10", "p_max": "80", "zones": [["10", "80"]]}]
})";

}  // namespace

TEST_CASE("decimal strings are read exactly") {
  CHECK(parse_decimal("0.0056", "x") == 0.0056);
  CHECK(parse_decimal(" 1e-3 ", "x") == 1e-3);
  CHECK_THROWS_AS(parse_decimal("1.2.3", "x"), DispatchError);
  CHECK_THROWS_AS(parse_decimal("", "x"), DispatchError);
  CHECK_THROWS_AS(parse_decimal("inf", "x"), DispatchError);
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0056}) CHECK(parse_decimal(format_decimal(v), "x") == v);
}

TEST_CASE("every bundled case survives a write/read round trip") {
  for (const auto& name : zdtest::bundled_cases()) {
    CAPTURE(name);
    const SystemCase sc = zdtest::load(name);
    CHECK(parse_case(case_to_json(sc)) == sc);
    const fs::path p = scratch_dir() / (name + ".case");
    write_case(sc, p);
    CHECK(load_case(p) == sc);
  }
}

TEST_CASE("missing loss block means no loss model") {
  const SystemCase sc = parse_case(kMinimalCase);
  CHECK(!sc.loss);
  CHECK(sc.units[0].ramp_up == kUnbounded);
  CHECK(sc.units[0].reserve_cap == kUnbounded);
}

TEST_CASE("parse errors name the field") {
  CHECK(parse_kind("{ not json") == ErrorKind::ParseError);
  CHECK(parse_kind(R"({"units": []})") == ErrorKind::ParseError);
  std::string bad = kMinimalCase;
  bad.replace(bad.find("\"0.01\""), 6, "\"abc\"");
  try {
    parse_case(bad);
    FAIL("expected ParseError");
  } catch (const DispatchError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("units[0].a") != std::string::npos);
  }
}

TEST_CASE("malformed zone pair is a validation error") {
  std::string bad = kMinimalCase;
  bad.replace(bad.find(R"([["10", "80"]])"), 14, R"([["50", "10"]])");
  CHECK(is_validation_error(parse_kind(bad)));
}

TEST_CASE("replicate_case") {
  const SystemCase base = zdtest::load("40unit_block");
  CHECK(replicate_case(base, 1) == base);
  const SystemCase big = replicate_case(base, 250);
  CHECK(big.size() == 10000);
  CHECK(big.demand == 1750000);
  CHECK(big.units[40].id == base.units[0].id + "#1");
  SystemCase one = parse_case(kMinimalCase);
  const SystemCase two = replicate_case(one, 2);
  CHECK(two.size() == 2);
  CHECK(two.demand == 100);
  try {
    replicate_case(zdtest::load("6unit"), 2);
    FAIL("expected HasLossModel");
  } catch (const DispatchError& e) {
    CHECK(e.kind() == ErrorKind::HasLossModel);
  }
}

TEST_CASE("audit of single rows") {
  const SystemCase sc = zdtest::load("6unit");
  const auto rt = load_reported(zdtest::data_path("reported/table1.rows"));
  REQUIRE(rt.rows.size() == 32);
  const ReportedDispatch& tsa = rt.rows.front();
  REQUIRE(tsa.method == "TSA [33]");
  const AuditReport r = audit_dispatch(sc, tsa);
  CHECK(std::abs(r.calc_loss - 12.8533) <= 5e-4);
  // Output 1277.3448 against 1275.8533 required: a surplus, positive by convention.
  CHECK(std::abs(r.violation - 1.4915) <= 5e-4);
  CHECK(r.violation == r.output_sum - r.required);
  for (const auto& row : rt.rows) {
    if (row.method == "PSO [49]") CHECK(std::abs(audit_dispatch(sc, row).violation) <= 5e-5);
  }
  ReportedDispatch short_row{"x", {1, 2}, {}, {}, {}, {}};
  CHECK_THROWS_AS(audit_dispatch(sc, short_row), DispatchError);
}

TEST_CASE("audit of the 15-unit MIQCQP row") {
  const SystemCase sc = zdtest::load("15unit");
  const auto rt = load_reported(zdtest::data_path("reported/table3.rows"));
  const AuditReport r = audit_dispatch(sc, rt.rows.front());
  CHECK(std::abs(r.calc_loss - 30.6635) <= 5e-4);
  CHECK(std::abs(std::abs(r.violation) - 0.0065) <= 5e-4);
}

TEST_CASE("audit flags capacity and prohibited-zone violations") {
  const SystemCase sc = zdtest::load("6unit");
  ReportedDispatch rd{"x", {225, 173, 263, 139, 165, 200}, {}, {}, {}, {}};
  const AuditReport r = audit_dispatch(sc, rd);
  REQUIRE(r.bound_violations.size() == 2);
  CHECK(r.bound_violations[0].reason == "inside prohibited zone");
  CHECK(r.bound_violations[1].reason == "outside capacity");
}

TEST_CASE("adjusted CPU time") {
  CHECK(adjusted_cpu_time(2.67, 0.5, 0.5) == doctest::Approx(1.0));
  CHECK(adjusted_cpu_time(2.67, 1.0, 0.5) == doctest::Approx(2.0));
  try {
    adjusted_cpu_time(2.67, 1.0, 0.0);
    FAIL("expected NonPositiveReference");
  } catch (const DispatchError& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveReference);
  }
}

TEST_CASE("audit table ordering") {
  const SystemCase sc = zdtest::load("6unit");
  const auto rt = load_reported(zdtest::data_path("reported/table1.rows"));
  const AuditTable t = audit_table(sc, rt.rows, 0.031);
  REQUIRE(t.rows.size() == rt.rows.size());
  CHECK(t.errors.empty());
  CHECK(t.rows.front().method == "TSA [33]");
  const auto ref = std::find_if(t.rows.begin(), t.rows.end(), [](const AuditReport& r) { return r.method == "MINLP reference"; });
  REQUIRE(ref != t.rows.end());
  REQUIRE(ref->act);
  CHECK(*ref->act == doctest::Approx(1.0));
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(std::abs(t.rows[i - 1].violation) >= std::abs(t.rows[i].violation));
  }
  CHECK(audit_table(sc, {}).rows.empty());
  CHECK(audit_table(sc, std::span(rt.rows).first(1)).rows.size() == 1);
}

TEST_CASE("audit sort is stable for equal violations") {
  const SystemCase sc = zdtest::load("6unit");
  const auto rt = load_reported(zdtest::data_path("reported/table1.rows"));
  std::vector<ReportedDispatch> rows;
  for (int k = 0; k < 4; ++k) {
    ReportedDispatch r = rt.rows.back();
    r.method = "copy" + std::to_string(k);
    rows.push_back(r);
  }
  const AuditTable t = audit_table(sc, rows);
  for (int k = 0; k < 4; ++k) CHECK(t.rows[static_cast<std::size_t>(k)].method == "copy" + std::to_string(k));
}

TEST_CASE("audit table collects row errors") {
  const SystemCase sc = zdtest::load("6unit");
  std::vector<ReportedDispatch> rows{{"bad", {1, 2, 3}, {}, {}, {}, {}}};
  const AuditTable t = audit_table(sc, rows);
  CHECK(t.rows.empty());
  REQUIRE(t.errors.size() == 1);
  CHECK(t.errors[0].first == "bad");
}

TEST_CASE("engine output audits clean") {
  for (const auto& name : zdtest::bundled_cases()) {
    CAPTURE(name);
    const SystemCase sc = zdtest::load(name);
    const DispatchSolution s = solve(sc);
    ReportedDispatch rd{"self", s.p, {}, {}, {}, {}};
    const AuditReport a = audit_dispatch(sc, rd);
    CHECK(std::abs(a.violation) <= 1e-4);
    CHECK(std::abs(a.recomputed_cost - s.cost) <= 1e-4);
    CHECK(a.bound_violations.empty());
  }
}

TEST_CASE("cli validate and solve") {
  const std::string six = zdtest::data_path("cases/6unit.case");
  CliRun r = run_cli({"validate", six});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("18 operating zones") != std::string::npos);

  r = run_cli({"solve", six, "--json"});
  REQUIRE(r.code == cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["solution"]["cost"].get<double>() - 15449.89) <= 0.05);
  CHECK(std::abs(j["self_audit"]["violation_mw"].get<double>()) <= 1e-4);
  CHECK(j["conditions"]["loss"] == true);

  r = run_cli({"solve", six, "--no-loss", "--text"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("loss off") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  const fs::path bad = scratch_dir() / "bad.case";
  {
    std::ofstream(bad) << "{ \"units\": ";
  }
  CHECK(run_cli({"validate", bad.string()}).code == cli::kInvalidInput);
  CHECK(run_cli({"solve", (scratch_dir() / "missing.case").string()}).code == cli::kInvalidInput);

  const fs::path infeasible = scratch_dir() / "infeasible.case";
  {
    std::ofstream(infeasible) << R"({"schema_version": 1, "name": "i", "demand_mw": "15",
      "units": [{"id": "u", "a": "0.01", "b": "2", "c": "1", "p_min": "0", "p_max": "30",
                 "zones": [["0", "10"], ["20", "30"]]}]})";
  }
  CHECK(run_cli({"solve", infeasible.string()}).code == cli::kInfeasible);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
}

TEST_CASE("cli audit, replicate and bench") {
  CliRun r = run_cli({"audit", zdtest::data_path("cases/6unit.case"), zdtest::data_path("reported/table1.rows"),
                      "--act-ref", "0.031"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("TSA [33]") < r.out.find("MINLP reference"));

  const fs::path out = scratch_dir() / "block_x2.case";
  r = run_cli({"replicate", zdtest::data_path("cases/40unit_block.case"), "-n", "2", "-o", out.string()});
  CHECK(r.code == cli::kOk);
  CHECK(load_case(out).size() == 80);

  const fs::path suite = scratch_dir() / "suite";
  fs::create_directories(suite);
  {
    std::ofstream(suite / "suite.json") << R"({"seed": 7, "cases": [
      {"name": "toy", "case": ")" << zdtest::data_path("cases/toy2_loss.case")
                                       << R"(", "expected": {"cost": "437.96", "cost_tol": "0.01"}}]})";
  }
  const CliRun b1 = run_cli({"bench", suite.string()});
  const CliRun b2 = run_cli({"bench", suite.string()});
  CHECK(b1.code == cli::kOk);
  CHECK(b1.out.find("match") != std::string::npos);
  // Identical apart from the timing column.
  auto strip_time = [](std::string s) {
    const auto pos = s.find("toy");
    return s.substr(pos, 60);
  };
  CHECK(strip_time(b1.out) == strip_time(b2.out));
}
