#pragma once

// JSON case files and reported-dispatch files.
//
// Numeric fields are decimal strings ("0.0056") so published values are read
// with a single correctly rounded conversion; plain JSON numbers are accepted
// too. Writing uses the shortest representation that reads back bit-exactly.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "zd/audit.hpp"
#include "zd/model.hpp"

namespace zd {

inline constexpr int kCaseSchemaVersion = 1;

/// Parses and validates. Throws ParseError naming the field, or the
/// validation error kinds from validate_case.
SystemCase parse_case(std::string_view json_text, std::vector<std::string>* warnings = nullptr);
SystemCase load_case(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

std::string case_to_json(const SystemCase& sc);
void write_case(const SystemCase& sc, const std::filesystem::path& path);

/// n copies of every unit with demand and reserve scaled by n. Copy k > 0 of
/// unit "u" gets the id "u#k". Throws HasLossModel for lossy cases.
SystemCase replicate_case(const SystemCase& sc, int n);

struct ReportedTable {
  std::string case_name;
  std::string source;
  std::vector<ReportedDispatch> rows;
};

ReportedTable parse_reported(std::string_view json_text);
ReportedTable load_reported(const std::filesystem::path& path);

/// Shortest round-trip decimal form of v.
std::string format_decimal(double v);
/// Exact decimal parse; throws ParseError mentioning `field` on bad input.
double parse_decimal(std::string_view text, std::string_view field);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace zd
