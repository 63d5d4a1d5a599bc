#pragma once

#include "rtcx/executive.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rtcx {

/// One timed scenario command:
///   <time_ms> <verb> <args...>
/// Verbs: load enable disable start stop uninstall suspend resume set sleep
/// expect-state. Lines starting with '#' and blank lines are skipped.
struct ScenarioStep {
  std::int64_t at_ms = 0;
  std::string verb;
  std::vector<std::string> args;
  int line = 0;
};

struct ScenarioScript {
  std::vector<ScenarioStep> steps;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

ScenarioScript parse_scenario(std::istream& in);           // times must be non-decreasing
ScenarioScript parse_scenario_text(std::string_view text);
ScenarioScript parse_scenario_file(const std::string& path);

struct ScenarioOutcome {
  int exit_code = 0;  // 0 iff every expect-state held and no command failed hard
  std::vector<std::string> failures;
};

/// Executes the script against the executive. In virtual mode the clock is
/// advanced to each step's time; in wall-clock mode the runner sleeps.
/// Every state change is written to `out` as a transcript line.
ScenarioOutcome run_scenario(Executive& exec, const ScenarioScript& script, std::ostream& out);

}  // namespace rtcx
