#include "rtcx/shell.hpp"

#include "rtcx/stats.hpp"

#include <fstream>
#include <sstream>

namespace rtcx {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

void print_changes(std::ostream& out, const std::vector<StateChange>& changes) {
  for (const auto& c : changes)
    out << c.name << ": " << to_string(c.from) << " -> " << to_string(c.to) << " (" << c.reason
        << ")\n";
}

void print_instance(std::ostream& out, const ComponentInstance& inst) {
  out << inst.descriptor.name << "  id=" << inst.id << "  state=" << to_string(inst.state)
      << "  enabled=" << (inst.enabled ? "true" : "false")
      << "  cpuusage=" << inst.descriptor.cpu_usage << '\n';
  for (const auto& b : inst.bindings)
    out << "  bound: " << b.consumer_port << " <- #" << b.provider << "." << b.provider_port
        << '\n';
  for (const auto& [key, value] : inst.properties)
    out << "  property: " << key << " = " << value << '\n';
}

}  // namespace

int run_shell(Executive& exec, std::istream& in, std::ostream& out,
              const ParseOptions& parse_opts) {
  std::string line;
  int last_status = 0;

  auto usage = [&out] {
    out << "commands: load <file> | enable <name> | disable <name> | start <name> | "
           "stop <name> | uninstall <name> | suspend <name> | resume <name> | "
           "set <name> <prop> <value> | status [name] | stats <name> | quit\n";
  };

  while (std::getline(in, line)) {
    auto tokens = tokenize(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const std::string& cmd = tokens.front();
    last_status = 0;

    try {
      if (cmd == "quit" || cmd == "exit") {
        return 0;
      } else if (cmd == "load") {
        if (tokens.size() != 2) throw std::invalid_argument("load <file>");
        std::ifstream file(tokens[1]);
        if (!file) throw std::invalid_argument("cannot open " + tokens[1]);
        std::stringstream buffer;
        buffer << file.rdbuf();
        std::vector<std::string> warnings;
        auto d = parse_descriptor(buffer.str(), parse_opts, &warnings);
        for (const auto& w : warnings) out << "warning: " << w << '\n';
        auto [id, changes] = exec.install(d);
        print_changes(out, changes);
      } else if (cmd == "status") {
        auto reg = exec.snapshot();
        if (tokens.size() >= 2) {
          const Handle id = reg.find_by_name(tokens[1]);
          if (id == kNoHandle) throw ExecError(ExecError::Code::UnknownId, tokens[1]);
          print_instance(out, reg.at(id));
        } else {
          for (const auto& [id, inst] : reg.instances()) print_instance(out, inst);
        }
      } else if (cmd == "stats") {
        if (tokens.size() != 2) throw std::invalid_argument("stats <name>");
        const Handle id = exec.find(tokens[1]);
        if (id == kNoHandle) throw ExecError(ExecError::Code::UnknownId, tokens[1]);
        auto samples = exec.collect_latency(id);
        out << format_stats_table({{tokens[1], compute_stats(samples)}});
      } else if (cmd == "set") {
        if (tokens.size() < 4) throw std::invalid_argument("set <name> <prop> <value>");
        const Handle id = exec.find(tokens[1]);
        if (id == kNoHandle) throw ExecError(ExecError::Code::UnknownId, tokens[1]);
        std::string value = tokens[3];
        for (std::size_t i = 4; i < tokens.size(); ++i) value += " " + tokens[i];
        print_changes(out, exec.set_property(id, tokens[2], value));
        out << "ok\n";
      } else if (cmd == "enable" || cmd == "disable" || cmd == "start" || cmd == "stop" ||
                 cmd == "uninstall" || cmd == "suspend" || cmd == "resume") {
        if (tokens.size() != 2) throw std::invalid_argument(cmd + " <name>");
        const Handle id = exec.find(tokens[1]);
        if (id == kNoHandle)
          throw ExecError(ExecError::Code::UnknownId, "component '" + tokens[1] + "'");
        std::vector<StateChange> changes;
        if (cmd == "enable") changes = exec.enable(id);
        else if (cmd == "disable") changes = exec.disable(id);
        else if (cmd == "start") changes = exec.start(id);
        else if (cmd == "stop") changes = exec.stop(id);
        else if (cmd == "uninstall") changes = exec.uninstall(id);
        else if (cmd == "suspend") changes = exec.suspend(id);
        else changes = exec.resume(id);
        print_changes(out, changes);
      } else {
        out << "unknown command: " << cmd << '\n';
        usage();
        last_status = 2;
      }
    } catch (const ExecError& e) {
      out << "error: " << e.code_string() << ": " << e.what() << '\n';
      last_status = 1;
    } catch (const ParseError& e) {
      out << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
      last_status = 1;
    } catch (const rtsim::SimError& e) {
      out << "error: " << e.what() << '\n';
      last_status = 1;
    } catch (const std::invalid_argument& e) {
      out << "usage: " << e.what() << '\n';
      last_status = 2;
    }
  }
  return last_status;
}

}  // namespace rtcx
