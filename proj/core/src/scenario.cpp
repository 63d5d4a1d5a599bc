#include "rtcx/scenario.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace rtcx {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

std::string join_from(const std::vector<std::string>& args, std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < args.size(); ++i) {
    if (i > first) out += ' ';
    out += args[i];
  }
  return out;
}

const std::set<std::string> kVerbs = {
    "load",      "enable", "disable", "start", "stop",        "uninstall",
    "suspend",   "resume", "set",     "sleep", "expect-state"};

}  // namespace

ScenarioScript parse_scenario(std::istream& in) {
  ScenarioScript script;
  std::string line;
  int line_no = 0;
  std::int64_t previous = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = tokenize(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() < 2)
      throw ScenarioError("line " + std::to_string(line_no) + ": expected '<time_ms> <command>'");

    ScenarioStep step;
    step.line = line_no;
    const auto& t = tokens.front();
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), step.at_ms);
    if (ec != std::errc{} || ptr != t.data() + t.size() || step.at_ms < 0)
      throw ScenarioError("line " + std::to_string(line_no) + ": bad time '" + t + "'");
    if (step.at_ms < previous)
      throw ScenarioError("line " + std::to_string(line_no) + ": times must be non-decreasing");
    previous = step.at_ms;

    step.verb = tokens[1];
    if (!kVerbs.count(step.verb))
      throw ScenarioError("line " + std::to_string(line_no) + ": unknown verb '" + step.verb +
                          "'");
    step.args.assign(tokens.begin() + 2, tokens.end());
    script.steps.push_back(std::move(step));
  }
  return script;
}

ScenarioScript parse_scenario_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_scenario(in);
}

ScenarioScript parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open script: " + path);
  return parse_scenario(in);
}

ScenarioOutcome run_scenario(Executive& exec, const ScenarioScript& script, std::ostream& out) {
  ScenarioOutcome outcome;
  const bool virtual_mode = exec.config().mode == rtsim::TimingMode::Virtual;
  const auto wall_start = std::chrono::steady_clock::now();

  auto print_changes = [&out](const std::vector<StateChange>& changes) {
    for (const auto& c : changes)
      out << "  " << c.name << ": " << to_string(c.from) << " -> " << to_string(c.to) << " ("
          << c.reason << ")\n";
  };

  auto handle_of = [&exec](const std::string& name) { return exec.find(name); };

  for (const auto& step : script.steps) {
    if (virtual_mode)
      exec.advance_virtual_to(step.at_ms * 1'000'000);
    else
      std::this_thread::sleep_until(wall_start + std::chrono::milliseconds(step.at_ms));

    out << "[" << step.at_ms << "ms] " << step.verb;
    for (const auto& a : step.args) out << ' ' << a;
    out << '\n';

    try {
      if (step.verb == "load") {
        if (step.args.empty()) throw ScenarioError("load: missing file");
        std::ifstream file(step.args[0]);
        if (!file) throw ScenarioError("load: cannot open " + step.args[0]);
        std::stringstream buffer;
        buffer << file.rdbuf();
        auto d = parse_descriptor(buffer.str());
        auto [id, changes] = exec.install(d);
        print_changes(changes);
      } else if (step.verb == "sleep") {
        const std::int64_t ms = step.args.empty() ? 0 : std::stoll(step.args[0]);
        if (virtual_mode)
          exec.advance_virtual_by(ms * 1'000'000);
        else
          std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      } else if (step.verb == "expect-state") {
        if (step.args.size() != 2) throw ScenarioError("expect-state: <name> <STATE>");
        auto expected = lifecycle_state_from(step.args[1]);
        if (!expected) throw ScenarioError("expect-state: unknown state " + step.args[1]);
        const Handle id = handle_of(step.args[0]);
        std::string actual =
            id == kNoHandle ? "UNINSTALLED" : std::string(to_string(exec.state_of(id)));
        if (actual == to_string(*expected)) {
          out << "  ok: " << step.args[0] << " is " << actual << '\n';
        } else {
          const std::string failure = "line " + std::to_string(step.line) + ": expected " +
                                      step.args[0] + " in " + step.args[1] + ", found " + actual;
          outcome.failures.push_back(failure);
          out << "  EXPECTATION FAILED: " << failure << '\n';
        }
      } else {
        if (step.args.empty()) throw ScenarioError(step.verb + ": missing component name");
        const Handle id = handle_of(step.args[0]);
        if (id == kNoHandle)
          throw ExecError(ExecError::Code::UnknownId, "component '" + step.args[0] + "'");
        std::vector<StateChange> changes;
        if (step.verb == "enable") changes = exec.enable(id);
        else if (step.verb == "disable") changes = exec.disable(id);
        else if (step.verb == "start") changes = exec.start(id);
        else if (step.verb == "stop") changes = exec.stop(id);
        else if (step.verb == "uninstall") changes = exec.uninstall(id);
        else if (step.verb == "suspend") changes = exec.suspend(id);
        else if (step.verb == "resume") changes = exec.resume(id);
        else if (step.verb == "set") {
          if (step.args.size() < 3) throw ScenarioError("set: <name> <property> <value>");
          changes = exec.set_property(id, step.args[1], join_from(step.args, 2));
        }
        print_changes(changes);
      }
    } catch (const ExecError& e) {
      out << "  error: " << e.code_string() << ": " << e.what() << '\n';
    } catch (const ParseError& e) {
      out << "  error: parse: " << e.what() << '\n';
    } catch (const ScenarioError& e) {
      out << "  error: " << e.what() << '\n';
      outcome.failures.push_back("line " + std::to_string(step.line) + ": " + e.what());
    }
  }

  outcome.exit_code = outcome.failures.empty() ? 0 : 1;
  return outcome;
}

}  // namespace rtcx
