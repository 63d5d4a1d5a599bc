#pragma once

#include "rtcx/bodies.hpp"
#include "rtcx/event_log.hpp"
#include "rtcx/lifecycle.hpp"
#include "rtcx/registry.hpp"
#include "rtcx/resolver.hpp"
#include "rtcx/rtsim/container.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace rtcx {

class ExecError : public std::runtime_error {
 public:
  enum class Code { UnknownId, WrongState, DuplicateName, ParseFailure };

  ExecError(Code code, const std::string& what);
  Code code() const { return code_; }
  std::string_view code_string() const;

 private:
  Code code_;
};

struct ExecutiveConfig {
  rtsim::TimingMode mode = rtsim::TimingMode::Virtual;
  double cpu_cap = 1.0;
  AdmissionPolicy policy = AdmissionPolicy::Utilization;
  /// Re-activate a previously started component automatically once its
  /// dependencies reappear (sticky start intent).
  bool auto_restart = true;
  std::shared_ptr<ResolvingService> external_resolver;
  std::chrono::milliseconds external_timeout{100};
  std::size_t mailbox_capacity = rtsim::MailboxChannel::kDefaultCapacity;
  std::string event_log_path;  // append JSONL records when non-empty
  BodyFactory body_factory;    // defaults to builtin_body_factory()
  int aperiodic_priority = 1000000;  // scheduling priority of aperiodic tasks
};

/// The component executive: owns the registry, the lifecycle state machine,
/// the CPU budget ledger and the simulated real-time container. All events
/// are processed atomically on one logical event loop; concurrent callers
/// are serialized and totally ordered by sequence number.
class Executive {
 public:
  explicit Executive(ExecutiveConfig cfg = {});
  ~Executive();

  Executive(const Executive&) = delete;
  Executive& operator=(const Executive&) = delete;

  // Each operation dispatches exactly one event and returns the ordered
  // state changes it caused, including cascades and re-resolutions.
  std::pair<Handle, std::vector<StateChange>> install(const ComponentDescriptor& d);
  std::vector<StateChange> enable(Handle id);
  std::vector<StateChange> disable(Handle id);
  std::vector<StateChange> start(Handle id);
  std::vector<StateChange> stop(Handle id);
  std::vector<StateChange> suspend(Handle id);
  std::vector<StateChange> resume(Handle id);
  std::vector<StateChange> uninstall(Handle id);
  std::vector<StateChange> set_property(Handle id, const std::string& key,
                                        const std::string& value);

  std::vector<StateChange> dispatch(const LifecycleEvent& event);
  /// Asynchronous submission; events are still processed one at a time in
  /// the order the loop accepts them.
  std::future<std::vector<StateChange>> submit(LifecycleEvent event);

  // Views (snapshot copies; safe from any thread).
  Handle find(std::string_view name) const;
  LifecycleState state_of(Handle id) const;
  Registry snapshot() const;
  CpuBudgetLedger ledger_snapshot() const;
  std::vector<LogRecord> log_snapshot() const;
  std::string log_text() const;

  // Management interface pass-throughs.
  std::future<rtsim::TaskStatusReport> query_status_async(Handle id);
  std::vector<rtsim::LatencySample> collect_latency(Handle id);

  rtsim::Container& container() { return container_; }
  const ExecutiveConfig& config() const { return cfg_; }

  // Virtual-time control, serialized with event processing.
  void advance_virtual_to(std::int64_t t_ns);
  void advance_virtual_by(std::int64_t dt_ns);
  std::int64_t virtual_now() const;

 private:
  std::vector<StateChange> apply(LifecycleEvent& event);
  ComponentInstance& instance_for(const LifecycleEvent& event);
  void evaluate_resolution(ComponentInstance& inst, LifecycleState from,
                           std::vector<StateChange>& out);
  bool try_activate(ComponentInstance& inst, const char* reason,
                    std::vector<StateChange>& out);
  void deactivate_running(ComponentInstance& inst, LifecycleState to, const std::string& reason,
                          std::vector<StateChange>& out);
  void do_stop(ComponentInstance& inst, const LifecycleEvent& event,
               std::vector<StateChange>& out);
  void reconcile(std::vector<StateChange>& out);
  void record(ComponentInstance& inst, LifecycleState to, std::string reason,
              std::vector<StateChange>& out);
  void append_log(LogRecord record);
  rtsim::PortTable build_ports(const ComponentInstance& inst);

  ExecutiveConfig cfg_;
  rtsim::Container container_;
  Registry registry_;
  CpuBudgetLedger ledger_;
  std::vector<LogRecord> log_;
  std::ofstream log_file_;
  std::uint64_t next_seq_ = 1;
  std::set<Handle> restart_attempted_;  // one auto-restart try per dispatch

  mutable std::mutex mu_;  // the logical event loop
};

}  // namespace rtcx
