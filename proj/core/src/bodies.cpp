#include "rtcx/bodies.hpp"

#include <atomic>
#include <chrono>
#include <cstring>

namespace rtcx {

using rtsim::TaskBody;
using rtsim::TaskContext;

void pack_latency(std::int64_t ns, std::int32_t out[2]) {
  out[0] = static_cast<std::int32_t>(static_cast<std::uint64_t>(ns) & 0xffffffffu);
  out[1] = static_cast<std::int32_t>(static_cast<std::uint64_t>(ns) >> 32);
}

std::int64_t unpack_latency(const std::int32_t in[2]) {
  const std::uint64_t lo = static_cast<std::uint32_t>(in[0]);
  const std::uint64_t hi = static_cast<std::uint32_t>(in[1]);
  return static_cast<std::int64_t>(lo | (hi << 32));
}

namespace {

class NoopBody final : public TaskBody {
 public:
  void step(TaskContext&) override {}
};

// Simulated computing job: spins for "spin_us" microseconds (default 0) and
// publishes the current release's scheduling latency on its latency outport.
class CalculationBody final : public TaskBody {
 public:
  void init(TaskContext& ctx) override {
    spin_us_ = std::strtol(ctx.property("spin_us", "0").c_str(), nullptr, 10);
    port_ = ctx.property("latport", "latdat");
  }

  void step(TaskContext& ctx) override {
    if (spin_us_ > 0) {
      const auto until =
          std::chrono::steady_clock::now() + std::chrono::microseconds(spin_us_);
      while (std::chrono::steady_clock::now() < until) {
        // busy work stands in for the control computation
        sink_.fetch_add(1, std::memory_order_relaxed);
      }
    }
    if (auto shm = ctx.shm_port(port_); shm && shm->size_elems() >= 2) {
      const std::int64_t latency = ctx.release_actual() - ctx.release_expected();
      std::vector<std::int32_t> slot(shm->size_elems(), 0);
      pack_latency(latency, slot.data());
      shm->write_i32(slot);
    }
  }

 private:
  long spin_us_ = 0;
  std::string port_;
  std::atomic<std::uint64_t> sink_{0};
};

// Reads the latency port each period and keeps the freshest value.
class DisplayBody final : public TaskBody {
 public:
  void init(TaskContext& ctx) override { port_ = ctx.property("latport", "latdat"); }

  void step(TaskContext& ctx) override {
    auto shm = ctx.shm_port(port_);
    if (!shm) return;
    if (auto values = shm->read_i32(); values && values->size() >= 2) {
      last_seen_ns_ = unpack_latency(values->data());
      ++reads_;
    }
  }

 private:
  std::string port_;
  std::int64_t last_seen_ns_ = 0;
  std::uint64_t reads_ = 0;
};

}  // namespace

BodyFactory builtin_body_factory() {
  return [](const ComponentDescriptor& d) -> std::shared_ptr<TaskBody> {
    if (d.bincode == "rtcx.builtin.Calculation") return std::make_shared<CalculationBody>();
    if (d.bincode == "rtcx.builtin.Display") return std::make_shared<DisplayBody>();
    return std::make_shared<NoopBody>();
  };
}

}  // namespace rtcx
