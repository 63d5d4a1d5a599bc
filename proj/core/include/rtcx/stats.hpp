#pragma once

#include "rtcx/rtsim/container.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rtcx {

/// AVERAGE/AVEDEV/MIN/MAX summary of scheduling-latency samples, in ns.
/// AVEDEV is the mean absolute deviation from the mean. With count == 0 the
/// remaining fields are meaningless.
struct LatencyStats {
  double average_ns = 0.0;
  double avedev_ns = 0.0;
  std::int64_t min_ns = 0;
  std::int64_t max_ns = 0;
  std::size_t count = 0;
};

LatencyStats compute_stats(std::span<const rtsim::LatencySample> samples);
LatencyStats compute_stats_values(std::span<const std::int64_t> latencies_ns);

/// Human table, values in microseconds with one decimal. The header names
/// the four statistic columns AVERAGE, AVEDEV, MIN, MAX.
std::string format_stats_table(
    const std::vector<std::pair<std::string, LatencyStats>>& rows);

/// CSV export, full nanosecond precision:
/// task,release_expected_ns,release_actual_ns,latency_ns
std::string samples_to_csv(std::span<const rtsim::LatencySample> samples);

}  // namespace rtcx
