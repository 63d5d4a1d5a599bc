#pragma once

#include "rtcx/descriptor.hpp"
#include "rtcx/executive.hpp"
#include "rtcx/resolver.hpp"
#include "rtcx/stats.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace rtcx::test {

// The sample configuration, with the historical runoncup attribute spelling.
inline constexpr const char* kCameraXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<dr:component name="camera" desc="this is a smart camera controller" type="periodic" enabled="true" cpuusage="0.1">
  <implementation bincode="ua.pats.demo.smartcamera.RTComponent"/>
  <periodictask frequency="100" runoncup="0" priority="2"/>
  <outport name="images" interface="RTAI.SHM" type="Byte" size="400"/>
  <inport name="xysize" interface="RTAI.SHM" type="Integer" size="400"/>
  <property name="prox00" type="Integer" value="6"/>
</dr:component>
)";

inline ComponentDescriptor camera_descriptor() { return parse_descriptor(kCameraXml); }

inline ComponentDescriptor minimal_aperiodic(const std::string& name = "worker") {
  ComponentDescriptor d;
  d.name = name;
  d.task_type = TaskType::Aperiodic;
  d.bincode = "rtcx.builtin.Noop";
  return d;
}

inline ComponentDescriptor periodic(const std::string& name, double hz = 100, int cpu = 0,
                                    int priority = 0, double cpu_usage = 0.0) {
  ComponentDescriptor d;
  d.name = name;
  d.task_type = TaskType::Periodic;
  d.bincode = "rtcx.builtin.Noop";
  d.cpu_usage = cpu_usage;
  d.task = PeriodicTaskSpec{hz, cpu, priority};
  return d;
}

inline PortSpec inport(const std::string& name,
                       PortInterface iface = PortInterface::SharedMemory,
                       PortDataType type = PortDataType::Integer, std::uint32_t size = 4) {
  return PortSpec{name, PortDirection::In, iface, type, size};
}

inline PortSpec outport(const std::string& name,
                        PortInterface iface = PortInterface::SharedMemory,
                        PortDataType type = PortDataType::Integer, std::uint32_t size = 4) {
  return PortSpec{name, PortDirection::Out, iface, type, size};
}

// ---------------------------------------------------------------------------
// Random descriptor generator for round-trip and parser property tests
// ---------------------------------------------------------------------------

class DescriptorGen {
 public:
  explicit DescriptorGen(std::uint64_t seed) : rng_(seed) {}

  ComponentDescriptor next() {
    ComponentDescriptor d;
    d.name = identifier(1 + pick(9));
    d.desc = pick(3) == 0 ? "" : text(pick(40));
    d.enabled = pick(2) == 0;
    d.cpu_usage = pick(4) == 0 ? 0.0 : fraction();
    d.bincode = identifier(3) + "." + identifier(5) + "." + identifier(4);
    if (pick(2) == 0) {
      d.task_type = TaskType::Periodic;
      d.task = PeriodicTaskSpec{frequency(), int(pick(4)), int(pick(10))};
    } else {
      d.task_type = TaskType::Aperiodic;
    }
    std::set<std::string> port_names;
    const int n_out = int(pick(3));
    const int n_in = int(pick(3));
    for (int i = 0; i < n_out; ++i) d.outports.push_back(port(port_names, PortDirection::Out));
    for (int i = 0; i < n_in; ++i) d.inports.push_back(port(port_names, PortDirection::In));
    const int n_props = int(pick(4));
    for (int i = 0; i < n_props; ++i) d.properties.push_back(property());
    return d;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::uint64_t pick(std::uint64_t n) { return rng_() % n; }

  std::string identifier(std::size_t len) {
    static constexpr char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    s += alphabet[pick(26)];  // leading letter
    for (std::size_t i = 1; i < len; ++i) s += alphabet[pick(sizeof alphabet - 1)];
    return s;
  }

  // Printable text including every XML-escaped character.
  std::string text(std::size_t len) {
    static constexpr char alphabet[] =
        "abc XYZ019&<>\"'._-:;/()!?";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[pick(sizeof alphabet - 1)];
    return s;
  }

  double fraction() { return double(pick(1000001)) / 1e6; }

  double frequency() {
    switch (pick(3)) {
      case 0: return double(1 + pick(10000));
      case 1: return 0.5 + double(pick(100)) / 7.0;
      default: return 1000.0;
    }
  }

  PortSpec port(std::set<std::string>& taken, PortDirection dir) {
    PortSpec p;
    do {
      p.name = identifier(1 + pick(6));
    } while (!taken.insert(p.name).second);
    p.direction = dir;
    p.interface = pick(2) == 0 ? PortInterface::SharedMemory : PortInterface::Mailbox;
    p.data_type = pick(2) == 0 ? PortDataType::Integer : PortDataType::Byte;
    p.size = std::uint32_t(1 + pick(1000));
    return p;
  }

  PropertySpec property() {
    PropertySpec p;
    p.name = identifier(1 + pick(8));
    switch (pick(4)) {
      case 0:
        p.type = PropertyType::Integer;
        p.value = std::to_string(std::int64_t(rng_()) % 100000);
        break;
      case 1: {
        p.type = PropertyType::Float;
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fraction() * 100.0);
        p.value.assign(buf, ptr);
        break;
      }
      case 2:
        p.type = PropertyType::Boolean;
        p.value = pick(2) == 0 ? "true" : "false";
        break;
      default:
        p.type = PropertyType::String;
        p.value = text(pick(30));
        break;
    }
    return p;
  }

  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force cascade oracle: repeatedly re-resolves every providing
/// instance against the shrinking provider set until nothing else fails.
/// One round collects all failures (ascending id), then they all leave.
inline std::vector<Handle> cascade_oracle(const Registry& view, Handle departed) {
  std::vector<Handle> order;
  std::set<Handle> gone{departed};
  for (;;) {
    std::vector<Handle> round;
    for (const auto& [id, inst] : view.instances()) {
      if (gone.count(id) || !inst.provides()) continue;
      bool ok = true;
      for (const auto& port : inst.descriptor.inports) {
        bool found = false;
        for (const auto& [pid, pinst] : view.instances()) {
          if (gone.count(pid) || pid == id || !pinst.provides()) continue;
          for (const auto& out : pinst.descriptor.outports)
            if (ports_compatible(port, out)) found = true;
        }
        if (!found) {
          ok = false;
          break;
        }
      }
      if (!ok) round.push_back(id);
    }
    if (round.empty()) break;
    for (Handle id : round) {
      gone.insert(id);
      order.push_back(id);
    }
  }
  return order;
}

/// Exact-rational stats oracle: avedev = sum |n*x_i - S| / n^2 computed in
/// 128-bit integers, converted to double only at the end.
inline LatencyStats stats_oracle(const std::vector<std::int64_t>& values) {
  LatencyStats s;
  s.count = values.size();
  if (values.empty()) return s;
  __int128 sum = 0;
  std::int64_t min = values.front(), max = values.front();
  for (auto v : values) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }
  const auto n = static_cast<__int128>(values.size());
  __int128 dev_num = 0;
  for (auto v : values) {
    __int128 diff = n * static_cast<__int128>(v) - sum;
    dev_num += diff < 0 ? -diff : diff;
  }
  s.average_ns = double(static_cast<long double>(sum) / static_cast<long double>(n));
  s.avedev_ns = double(static_cast<long double>(dev_num) / (static_cast<long double>(n) *
                                                            static_cast<long double>(n)));
  s.min_ns = min;
  s.max_ns = max;
  return s;
}

/// Distinct consecutive states a component went through, starting from the
/// `to` state of its first recorded change.
inline std::vector<LifecycleState> trajectory(const std::vector<LogRecord>& log,
                                              const std::string& name) {
  std::vector<LifecycleState> states;
  for (const auto& rec : log)
    for (const auto& c : rec.changes)
      if (c.name == name && (states.empty() || states.back() != c.to))
        states.push_back(c.to);
  return states;
}

}  // namespace rtcx::test
