#pragma once

// Report serialization. Reports are JSON objects with the top-level keys
// config_echo, iterates, ledger, suites and version; floats are written with
// 17 significant digits and object keys in sorted order, so equal inputs give
// byte-identical files. See docs/report-schema.md.

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

#include "vsoliton/cli/config.hpp"
#include "vsoliton/solver.hpp"

namespace vsoliton::cli {

using Json = nlohmann::json;

inline constexpr const char* kReportVersion = "vsoliton-report/1";

/// Deterministic text form: sorted keys, two-space indent, %.17g floats,
/// non-finite floats as null.
std::string dump_json(const Json& value);

Json config_to_json(const RunConfig& config);
Json iterates_to_json(const SolveReport& report);
Json ledger_to_json(const EstimateLedger& ledger);
/// Outcome of one solve, including the estimate ledger when present.
Json run_to_json(const SolveReport& report);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  // "<=", ">=" or ">"
  bool passed = false;
  std::string detail;
};

CheckResult check_le(std::string name, double value, double threshold, std::string detail = {});
CheckResult check_ge(std::string name, double value, double threshold, std::string detail = {});
CheckResult check_gt(std::string name, double value, double threshold, std::string detail = {});

Json checks_to_json(const std::vector<CheckResult>& checks);

/// Column order of the iterate history CSV.
const std::vector<std::string>& iterate_csv_columns();
/// Column order of the sweep ledger CSV.
const std::vector<std::string>& ledger_csv_columns();

std::string iterates_csv(const std::vector<SolveReport>& reports);
std::string ledger_csv(const std::vector<SolveReport>& reports);

/// %.17g, or the empty string for a missing value.
std::string format_number(std::optional<double> value);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace vsoliton::cli
