#include "rtcx/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>
#include <vector>

namespace rtcx {

namespace {

ComponentDescriptor calc_descriptor(double hz) {
  ComponentDescriptor d;
  d.name = "calc";
  d.desc = "periodic computation publishing its scheduling latency";
  d.task_type = TaskType::Periodic;
  d.enabled = true;
  d.cpu_usage = 0.0;
  d.bincode = "rtcx.builtin.Calculation";
  d.task = PeriodicTaskSpec{hz, 0, 1};
  d.outports.push_back(
      PortSpec{"latdat", PortDirection::Out, PortInterface::SharedMemory,
               PortDataType::Integer, 2});
  return d;
}

ComponentDescriptor display_descriptor(double hz) {
  ComponentDescriptor d;
  d.name = "display";
  d.desc = "reads the latency port";
  d.task_type = TaskType::Periodic;
  d.enabled = true;
  d.cpu_usage = 0.0;
  d.bincode = "rtcx.builtin.Display";
  d.task = PeriodicTaskSpec{hz, 0, 2};
  d.inports.push_back(
      PortSpec{"latdat", PortDirection::In, PortInterface::SharedMemory,
               PortDataType::Integer, 2});
  return d;
}

}  // namespace

ExperimentResult run_latency_experiment(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.calc_hz <= 0 || cfg.display_hz <= 0 || cfg.duration_s <= 0)
    throw std::invalid_argument("experiment rates and duration must be positive");

  ExecutiveConfig exec_cfg;
  exec_cfg.mode = cfg.mode;
  Executive exec(exec_cfg);

  auto [calc_id, calc_changes] = exec.install(calc_descriptor(cfg.calc_hz));
  auto [display_id, display_changes] = exec.install(display_descriptor(cfg.display_hz));
  exec.start(calc_id);
  exec.start(display_id);

  if (cfg.mode == rtsim::TimingMode::Virtual && !cfg.injected_latency_ns.empty())
    exec.container().set_injected_latency(calc_id, cfg.injected_latency_ns);

  // Stress mode: saturate the host with busy loops for the whole run.
  std::vector<std::jthread> burners;
  if (cfg.stress && cfg.mode == rtsim::TimingMode::WallClock) {
    const int n = cfg.stress_threads > 0
                      ? cfg.stress_threads
                      : std::max(1u, std::thread::hardware_concurrency());
    for (int i = 0; i < n; ++i) {
      burners.emplace_back([](std::stop_token st) {
        std::atomic<std::uint64_t> sink{0};
        while (!st.stop_requested()) sink.fetch_add(1, std::memory_order_relaxed);
      });
    }
  }

  const auto duration_ns = static_cast<std::int64_t>(std::llround(cfg.duration_s * 1e9));
  if (cfg.mode == rtsim::TimingMode::Virtual)
    exec.advance_virtual_by(duration_ns);
  else
    std::this_thread::sleep_for(std::chrono::nanoseconds(duration_ns));

  auto calc_samples = exec.collect_latency(calc_id);
  auto display_samples = exec.collect_latency(display_id);

  exec.stop(display_id);
  exec.stop(calc_id);
  for (auto& b : burners) b.request_stop();
  burners.clear();

  ExperimentResult result;
  result.calc = compute_stats(calc_samples);
  result.display = compute_stats(display_samples);
  result.calc_samples = calc_samples.size();
  result.display_samples = display_samples.size();

  const std::string mode_label = cfg.stress ? " (stress)" : " (light)";
  result.table = format_stats_table({{"calc" + mode_label, result.calc},
                                     {"display" + mode_label, result.display}});

  auto all_samples = calc_samples;
  all_samples.insert(all_samples.end(), display_samples.begin(), display_samples.end());
  result.csv = samples_to_csv(all_samples);
  if (!cfg.csv_path.empty()) {
    std::ofstream csv(cfg.csv_path);
    csv << result.csv;
  }

  out << result.table;
  out << "samples: calc=" << result.calc_samples << " display=" << result.display_samples
      << '\n';
  return result;
}

}  // namespace rtcx
