#include "zd/case_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "zd/error.hpp"

namespace zd {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::string_view field, const std::string& msg) {
  throw DispatchError(ErrorKind::ParseError, std::string(field) + ": " + msg);
}

double number_at(const json& j, const std::string& field) {
  if (j.is_string()) return parse_decimal(j.get_ref<const std::string&>(), field);
  if (j.is_number()) return j.get<double>();
  parse_fail(field, "expected a decimal string or number");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where + "." + key, "missing");
  return *it;
}

double number_field(const json& obj, const char* key, const std::string& where) {
  return number_at(require(obj, key, where), where + "." + key);
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return number_at(*it, where + "." + key);
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) parse_fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

const json& array_field(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) parse_fail(where + "." + key, "expected an array");
  return v;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the message.
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i) line += text[i] == '\n';
    std::ostringstream os;
    os << "line " << line << ": " << e.what();
    throw DispatchError(ErrorKind::ParseError, os.str());
  }
}

Unit parse_unit(const json& ju, std::size_t idx) {
  const std::string where = "units[" + std::to_string(idx) + "]";
  if (!ju.is_object()) parse_fail(where, "expected an object");
  Unit u;
  u.id = string_field(ju, "id", where);
  u.a = number_field(ju, "a", where);
  u.b = number_field(ju, "b", where);
  u.c = number_field(ju, "c", where);
  u.e = optional_number(ju, "e", where).value_or(0.0);
  u.f = optional_number(ju, "f", where).value_or(0.0);
  u.p_min = number_field(ju, "p_min", where);
  u.p_max = number_field(ju, "p_max", where);
  u.p_prev = optional_number(ju, "p_prev", where);
  u.ramp_up = optional_number(ju, "ramp_up", where).value_or(kUnbounded);
  u.ramp_down = optional_number(ju, "ramp_down", where).value_or(kUnbounded);
  u.reserve_cap = optional_number(ju, "reserve_cap", where).value_or(kUnbounded);
  const json& zones = array_field(ju, "zones", where);
  for (std::size_t k = 0; k < zones.size(); ++k) {
    const std::string zw = where + ".zones[" + std::to_string(k) + "]";
    if (!zones[k].is_array() || zones[k].size() != 2) parse_fail(zw, "expected [lower, upper]");
    u.zones.push_back({number_at(zones[k][0], zw + "[0]"), number_at(zones[k][1], zw + "[1]")});
  }
  return u;
}

LossModel parse_loss(const json& jl) {
  const std::string where = "loss";
  if (!jl.is_object()) parse_fail(where, "expected an object");
  LossModel lm;
  lm.base_mva = number_field(jl, "base_mva", where);
  const json& rows = array_field(jl, "B", where);
  lm.n = rows.size();
  lm.B.reserve(lm.n * lm.n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string rw = where + ".B[" + std::to_string(i) + "]";
    if (!rows[i].is_array()) parse_fail(rw, "expected an array");
    if (rows[i].size() != lm.n) {
      std::ostringstream os;
      os << "row " << i << " has " << rows[i].size() << " entries, expected " << lm.n;
      throw DispatchError(ErrorKind::DimensionMismatch, os.str());
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      lm.B.push_back(number_at(rows[i][j], rw + "[" + std::to_string(j) + "]"));
    }
  }
  const json& b0 = array_field(jl, "B0", where);
  for (std::size_t i = 0; i < b0.size(); ++i) lm.B0.push_back(number_at(b0[i], "loss.B0[" + std::to_string(i) + "]"));
  lm.B00 = number_field(jl, "B00", where);
  return lm;
}

json decimal(double v) { return format_decimal(v); }

}  // namespace

std::string format_decimal(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_decimal(std::string_view text, std::string_view field) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(field, "'" + std::string(text) + "' is not a finite decimal number");
  }
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DispatchError(ErrorKind::ParseError, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemCase parse_case(std::string_view json_text, std::vector<std::string>* warnings) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) parse_fail("case", "expected a JSON object");
  if (const auto it = doc.find("schema_version"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() != kCaseSchemaVersion) {
      parse_fail("schema_version", "unsupported version");
    }
  }
  SystemCase sc;
  sc.name = doc.value("name", std::string{});
  sc.demand = number_field(doc, "demand_mw", "case");
  sc.reserve_req = optional_number(doc, "reserve_mw", "case").value_or(0.0);
  if (const auto it = doc.find("provenance"); it != doc.end() && it->is_object()) {
    for (const auto& [k, v] : it->items()) {
      if (v.is_string()) sc.provenance[k] = v.get<std::string>();
    }
  }
  const json& units = array_field(doc, "units", "case");
  for (std::size_t i = 0; i < units.size(); ++i) sc.units.push_back(parse_unit(units[i], i));
  if (const auto it = doc.find("loss"); it != doc.end() && !it->is_null()) {
    sc.loss = parse_loss(*it);
  }
  return validate_case(std::move(sc), warnings);
}

SystemCase load_case(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const std::string text = read_text_file(path);
  try {
    return parse_case(text, warnings);
  } catch (const DispatchError& e) {
    if (e.kind() != ErrorKind::ParseError) throw;
    throw DispatchError(ErrorKind::ParseError, path.string() + ": " + e.detail());
  }
}

std::string case_to_json(const SystemCase& sc) {
  json doc = json::object();
  doc["schema_version"] = kCaseSchemaVersion;
  doc["name"] = sc.name;
  doc["demand_mw"] = decimal(sc.demand);
  doc["reserve_mw"] = decimal(sc.reserve_req);
  if (!sc.provenance.empty()) doc["provenance"] = sc.provenance;
  json units = json::array();
  for (const Unit& u : sc.units) {
    json ju = json::object();
    ju["id"] = u.id;
    ju["a"] = decimal(u.a);
    ju["b"] = decimal(u.b);
    ju["c"] = decimal(u.c);
    if (u.e != 0.0) ju["e"] = decimal(u.e);
    if (u.f != 0.0) ju["f"] = decimal(u.f);
    ju["p_min"] = decimal(u.p_min);
    ju["p_max"] = decimal(u.p_max);
    if (u.p_prev) ju["p_prev"] = decimal(*u.p_prev);
    if (std::isfinite(u.ramp_up)) ju["ramp_up"] = decimal(u.ramp_up);
    if (std::isfinite(u.ramp_down)) ju["ramp_down"] = decimal(u.ramp_down);
    if (std::isfinite(u.reserve_cap)) ju["reserve_cap"] = decimal(u.reserve_cap);
    json zones = json::array();
    for (const auto& z : u.zones) zones.push_back(json::array({decimal(z.lower), decimal(z.upper)}));
    ju["zones"] = std::move(zones);
    units.push_back(std::move(ju));
  }
  doc["units"] = std::move(units);
  if (sc.loss) {
    const LossModel& lm = *sc.loss;
    json jl = json::object();
    jl["base_mva"] = decimal(lm.base_mva);
    json rows = json::array();
    for (std::size_t i = 0; i < lm.n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < lm.n; ++j) row.push_back(decimal(lm.b(i, j)));
      rows.push_back(std::move(row));
    }
    jl["B"] = std::move(rows);
    json b0 = json::array();
    for (double v : lm.B0) b0.push_back(decimal(v));
    jl["B0"] = std::move(b0);
    jl["B00"] = decimal(lm.B00);
    doc["loss"] = std::move(jl);
  }
  return doc.dump(2) + "\n";
}

void write_case(const SystemCase& sc, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DispatchError(ErrorKind::ParseError, tmp.string() + ": cannot write file");
    out << case_to_json(sc);
    if (!out) throw DispatchError(ErrorKind::ParseError, tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

SystemCase replicate_case(const SystemCase& sc, int n) {
  if (sc.loss) throw DispatchError(ErrorKind::HasLossModel, "cannot replicate a case with a loss model");
  if (n < 1) throw std::invalid_argument("replication count must be at least 1");
  if (n == 1) return sc;
  SystemCase out;
  out.name = sc.name + "_x" + std::to_string(n);
  out.demand = sc.demand * n;
  out.reserve_req = sc.reserve_req * n;
  out.provenance = sc.provenance;
  out.provenance["replication"] = std::to_string(n) + " copies of " + sc.name;
  out.units.reserve(sc.units.size() * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    for (const Unit& u : sc.units) {
      Unit c = u;
      if (k > 0) c.id = u.id + "#" + std::to_string(k);
      out.units.push_back(std::move(c));
    }
  }
  return out;
}

ReportedTable parse_reported(std::string_view json_text) {
  const json doc = parse_json(json_text);
  ReportedTable t;
  const json* rows = &doc;
  if (doc.is_object()) {
    t.case_name = doc.value("case", std::string{});
    t.source = doc.value("source", std::string{});
    rows = &array_field(doc, "rows", "reported");
  } else if (!doc.is_array()) {
    parse_fail("reported", "expected an object with rows or an array");
  }
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const json& jr = (*rows)[i];
    const std::string where = "rows[" + std::to_string(i) + "]";
    if (!jr.is_object()) parse_fail(where, "expected an object");
    ReportedDispatch rd;
    rd.method = string_field(jr, "method", where);
    const json& p = array_field(jr, "p_mw", where);
    for (std::size_t k = 0; k < p.size(); ++k) {
      rd.p.push_back(number_at(p[k], where + ".p_mw[" + std::to_string(k) + "]"));
    }
    rd.reported_loss = optional_number(jr, "loss_mw", where);
    rd.reported_cost = optional_number(jr, "cost", where);
    rd.cpu_ghz = optional_number(jr, "cpu_ghz", where);
    rd.cpu_time_s = optional_number(jr, "cpu_time_s", where);
    t.rows.push_back(std::move(rd));
  }
  return t;
}

ReportedTable load_reported(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_reported(text);
  } catch (const DispatchError& e) {
    if (e.kind() != ErrorKind::ParseError) throw;
    throw DispatchError(ErrorKind::ParseError, path.string() + ": " + e.detail());
  }
}

}  // namespace zd
