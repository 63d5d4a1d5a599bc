#pragma once

#include "rtcx/executive.hpp"
#include "rtcx/stats.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rtcx {

/// Two-component latency experiment: a calculation task publishes its own
/// scheduling latency through a shared-memory port and a display task reads
/// it. Latency statistics are reported per task in the four-column table
/// format plus full-precision CSV.
struct ExperimentConfig {
  double calc_hz = 1000.0;
  double display_hz = 4.0;
  double duration_s = 10.0;
  bool stress = false;     // background busy-loop workers at ~100% CPU
  int stress_threads = 0;  // 0 = one per hardware thread
  rtsim::TimingMode mode = rtsim::TimingMode::WallClock;
  std::vector<std::int64_t> injected_latency_ns;  // virtual mode test hook (calc task)
  std::string csv_path;                           // write CSV here when non-empty
};

struct ExperimentResult {
  LatencyStats calc;
  LatencyStats display;
  std::size_t calc_samples = 0;
  std::size_t display_samples = 0;
  std::string table;
  std::string csv;
};

ExperimentResult run_latency_experiment(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace rtcx
