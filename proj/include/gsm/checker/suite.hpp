#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gsm/checker/check.hpp"

namespace gsm::checker {

struct SuiteEntry {
  std::string id;
  std::string formula;
  int line = 0;
  int column = 1;  // where the formula starts
};

/// A line that could not be parsed, resolved or checked.
struct SuiteError {
  std::string id;  // empty when the line has no `id:` prefix
  int line = 0;
  int column = 0;
  std::string message;
};

struct PropertyFile {
  std::vector<SuiteEntry> entries;
  std::vector<SuiteError> errors;
};

/// One `id: formula` per line; blank lines and `#` comments are skipped.
PropertyFile parse_property_file(std::string_view text);

struct SuiteReport {
  std::string model;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::vector<Verdict> verdicts;
  std::vector<SuiteError> errors;

  /// Every verdict holds (A[] reading where present) and nothing failed.
  bool all_satisfied() const;
};

/// Checks every property of the file; a failing line never stops the run.
SuiteReport check_suite(const StateSpace& space, std::string_view property_file, const CheckOptions& options = {});

nlohmann::json to_json(const Trace& trace);
nlohmann::json to_json(const Verdict& verdict);
/// Without timings when `timings` is false, so reports can be compared.
nlohmann::json to_json(const SuiteReport& report, const StateSpace& space, bool timings = true);

}  // namespace gsm::checker
