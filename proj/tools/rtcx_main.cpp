#include "rtcx/executive.hpp"
#include "rtcx/experiment.hpp"
#include "rtcx/resolving_service.hpp"
#include "rtcx/scenario.hpp"
#include "rtcx/shell.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct GlobalOptions {
  std::string mode = "virtual";
  double cap = 1.0;
  std::string policy = "util";
  std::string resolver;
  std::string log_path;
  bool strict_six = false;
  bool lenient = false;
};

rtcx::ExecutiveConfig make_config(const GlobalOptions& opts) {
  rtcx::ExecutiveConfig cfg;
  cfg.mode = opts.mode == "wall" ? rtcx::rtsim::TimingMode::WallClock
                                 : rtcx::rtsim::TimingMode::Virtual;
  cfg.cpu_cap = opts.cap;
  cfg.policy = opts.policy == "rm" ? rtcx::AdmissionPolicy::RateMonotonic
                                   : rtcx::AdmissionPolicy::Utilization;
  cfg.event_log_path = opts.log_path;
  if (!opts.resolver.empty())
    cfg.external_resolver = rtcx::make_resolving_service(opts.resolver);
  return cfg;
}

rtcx::ParseOptions make_parse_options(const GlobalOptions& opts) {
  rtcx::ParseOptions parse;
  parse.mode = opts.lenient ? rtcx::ParseMode::Lenient : rtcx::ParseMode::Strict;
  parse.strict_six = opts.strict_six;
  return parse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtcx - declarative real-time component executive"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--mode", opts.mode, "Timing mode")->check(CLI::IsMember({"wall", "virtual"}));
  app.add_option("--cap", opts.cap, "Per-CPU admission cap (fraction)")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--policy", opts.policy, "Internal admission policy")
      ->check(CLI::IsMember({"util", "rm"}));
  app.add_option("--resolver", opts.resolver, "External resolving service name");
  app.add_option("--log", opts.log_path, "Event log file (JSON lines)");
  app.add_flag("--strict-six", opts.strict_six, "Enforce six-character component names");
  app.add_flag("--lenient", opts.lenient, "Accept unknown descriptor elements as warnings");

  auto* shell_cmd = app.add_subcommand("shell", "Interactive operator shell");

  std::string script_path;
  auto* run_cmd = app.add_subcommand("run", "Run a timed scenario script");
  run_cmd->add_option("script", script_path, "Script file")->required();

  rtcx::ExperimentConfig exp;
  std::string load = "light";
  auto* latency_cmd = app.add_subcommand("latency", "Run the calculation/display experiment");
  latency_cmd->add_option("--calc-hz", exp.calc_hz, "Calculation task rate");
  latency_cmd->add_option("--display-hz", exp.display_hz, "Display task rate");
  latency_cmd->add_option("--duration", exp.duration_s, "Run time in seconds");
  latency_cmd->add_option("--load", load, "System load")->check(CLI::IsMember({"light", "stress"}));
  latency_cmd->add_option("--stress-threads", exp.stress_threads,
                          "Busy workers in stress mode (0 = core count)");
  latency_cmd->add_option("--csv", exp.csv_path, "Write samples as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (shell_cmd->parsed()) {
      rtcx::Executive exec(make_config(opts));
      return rtcx::run_shell(exec, std::cin, std::cout, make_parse_options(opts));
    }
    if (run_cmd->parsed()) {
      rtcx::Executive exec(make_config(opts));
      auto script = rtcx::parse_scenario_file(script_path);
      auto outcome = rtcx::run_scenario(exec, script, std::cout);
      for (const auto& failure : outcome.failures)
        std::cerr << "expectation failed: " << failure << '\n';
      return outcome.exit_code;
    }
    if (latency_cmd->parsed()) {
      exp.stress = load == "stress";
      // The experiment measures host scheduling latency; wall-clock is the
      // default unless a mode was asked for explicitly.
      exp.mode = (app.count("--mode") == 0 || opts.mode == "wall")
                     ? rtcx::rtsim::TimingMode::WallClock
                     : rtcx::rtsim::TimingMode::Virtual;
      rtcx::run_latency_experiment(exp, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
