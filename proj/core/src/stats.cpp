#include "rtcx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rtcx {

LatencyStats compute_stats_values(std::span<const std::int64_t> latencies_ns) {
  LatencyStats stats;
  stats.count = latencies_ns.size();
  if (latencies_ns.empty()) return stats;

  // Exact integer first pass; the sum of int64 samples needs 128 bits.
  __int128 sum = 0;
  std::int64_t min = latencies_ns.front();
  std::int64_t max = latencies_ns.front();
  for (std::int64_t v : latencies_ns) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }
  const double mean = double(static_cast<long double>(sum) / latencies_ns.size());

  double dev_sum = 0.0;
  for (std::int64_t v : latencies_ns) dev_sum += std::abs(double(v) - mean);

  stats.average_ns = mean;
  stats.avedev_ns = dev_sum / double(latencies_ns.size());
  stats.min_ns = min;
  stats.max_ns = max;
  return stats;
}

LatencyStats compute_stats(std::span<const rtsim::LatencySample> samples) {
  std::vector<std::int64_t> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.latency_ns);
  return compute_stats_values(values);
}

std::string format_stats_table(
    const std::vector<std::pair<std::string, LatencyStats>>& rows) {
  std::size_t label_width = 4;
  for (const auto& [label, stats] : rows) label_width = std::max(label_width, label.size());

  auto us = [](double ns) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", ns / 1000.0);
    return std::string(buf);
  };

  std::ostringstream out;
  out << std::string(label_width, ' ');
  for (const char* col : {"AVERAGE", "AVEDEV", "MIN", "MAX"}) {
    out << ' ';
    out.width(12);
    out << col;
  }
  out << '\n';

  for (const auto& [label, stats] : rows) {
    out << label << std::string(label_width - label.size(), ' ');
    const bool empty = stats.count == 0;
    for (const std::string& cell :
         {empty ? std::string("-") : us(stats.average_ns),
          empty ? std::string("-") : us(stats.avedev_ns),
          empty ? std::string("-") : us(double(stats.min_ns)),
          empty ? std::string("-") : us(double(stats.max_ns))}) {
      out << ' ';
      out.width(12);
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

std::string samples_to_csv(std::span<const rtsim::LatencySample> samples) {
  std::string out = "task,release_expected_ns,release_actual_ns,latency_ns\n";
  for (const auto& s : samples) {
    out += std::to_string(s.task);
    out += ',';
    out += std::to_string(s.release_expected);
    out += ',';
    out += std::to_string(s.release_actual);
    out += ',';
    out += std::to_string(s.latency_ns);
    out += '\n';
  }
  return out;
}

}  // namespace rtcx
