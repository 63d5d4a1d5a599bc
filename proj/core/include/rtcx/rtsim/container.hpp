#pragma once

#include "rtcx/descriptor.hpp"
#include "rtcx/rtsim/channel.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

namespace rtcx::rtsim {

enum class TimingMode { Virtual, WallClock };

enum class TaskStatus { Running, Suspended, Terminating, Terminated };
std::string_view to_string(TaskStatus s);

/// Scheduling contract of one container task.
struct TaskControlBlock {
  Handle component_id = kNoHandle;
  std::string name;
  bool periodic = true;
  std::int64_t period_ns = 0;  // > 0 for periodic tasks
  int priority = 0;            // lower value = more urgent
  int cpu = 0;                 // advisory in simulation
  std::string trigger_port;    // aperiodic: inport whose mailbox triggers steps
};

/// One scheduling-latency observation. Expected release times are computed
/// from the initial release (t0 + k * period), never from actual wake times,
/// so the series carries no drift.
struct LatencySample {
  Handle task = kNoHandle;
  std::int64_t release_expected = 0;  // ns
  std::int64_t release_actual = 0;    // ns
  std::int64_t latency_ns = 0;        // actual - expected

  bool operator==(const LatencySample&) const = default;
};

struct TaskStatusReport {
  TaskStatus status = TaskStatus::Running;
  std::map<std::string, std::string> properties;
  std::optional<LatencySample> last_sample;
};

/// Asynchronous management command, drained by the task at period
/// boundaries with a non-blocking read.
struct ManagementCommand {
  enum class Kind { Suspend, Resume, SetProperty, QueryStatus, Terminate };

  Kind kind = Kind::QueryStatus;
  std::string property;  // SetProperty
  std::string value;     // SetProperty
  std::function<void(const TaskStatusReport&)> reply;  // QueryStatus
};

std::string_view to_string(ManagementCommand::Kind k);

/// A task's view of one of its ports: the consumer/provider spec plus the
/// channel behind it.
struct PortView {
  PortSpec spec;
  std::shared_ptr<ShmChannel> shm;
  std::shared_ptr<MailboxChannel> mailbox;
};

using PortTable = std::map<std::string, PortView, std::less<>>;

struct TaskRecord;
class Container;

/// Handed to a task body on every hook invocation. Valid only for the
/// duration of the call.
class TaskContext {
 public:
  Handle self() const;
  const std::string& task_name() const;

  std::int64_t release_expected() const { return expected_; }
  std::int64_t release_actual() const { return actual_; }
  std::uint64_t step_index() const { return step_; }

  /// Sample of the previous completed period, if any.
  std::optional<LatencySample> previous_sample() const;

  /// Aperiodic tasks: the mailbox message that triggered this step.
  const std::vector<std::byte>* trigger_message() const {
    return trigger_ ? &*trigger_ : nullptr;
  }

  std::shared_ptr<ShmChannel> shm_port(std::string_view port) const;
  std::shared_ptr<MailboxChannel> mailbox_port(std::string_view port) const;

  std::string property(const std::string& key, const std::string& fallback = "") const;

 private:
  friend class Container;
  explicit TaskContext(TaskRecord* task) : task_(task) {}

  TaskRecord* task_;
  std::int64_t expected_ = 0;
  std::int64_t actual_ = 0;
  std::uint64_t step_ = 0;
  std::optional<std::vector<std::byte>> trigger_;
};

/// Functional body of a component task. init/uninit are invoked exclusively
/// by the container when the executive activates/deactivates the component.
class TaskBody {
 public:
  virtual ~TaskBody() = default;

  virtual void init(TaskContext&) {}
  virtual void step(TaskContext&) = 0;
  virtual void uninit(TaskContext&) {}
};

struct TraceRecord {
  std::int64_t t_ns = 0;
  Handle task = kNoHandle;
  std::string action;  // spawn release step-begin step-end drain command ...
  std::string detail;
};

class SimError : public std::runtime_error {
 public:
  enum class Code { UnknownTask, CommandQueueFull, SpawnFailure, WrongMode };

  SimError(Code code, const std::string& what);
  Code code() const { return code_; }

 private:
  Code code_;
};

/// The simulated real-time container: executes tasks as fixed-priority
/// periodic workers, owns the data-path channels, and records latency
/// samples plus a dispatch trace.
///
/// Two timing backends: Virtual advances a logical clock deterministically
/// on the caller's thread (ties broken by release time, then priority, then
/// task id); WallClock runs each task on its own thread against the host's
/// steady clock.
class Container {
 public:
  static constexpr std::size_t kCommandQueueCapacity = 64;

  explicit Container(TimingMode mode, std::size_t mailbox_capacity = MailboxChannel::kDefaultCapacity);
  ~Container();

  Container(const Container&) = delete;
  Container& operator=(const Container&) = delete;

  TimingMode mode() const { return mode_; }

  // Data-path channels, keyed by providing component and outport name.
  std::shared_ptr<ShmChannel> create_shm_channel(Handle provider, const PortSpec& port);
  std::shared_ptr<MailboxChannel> create_mailbox_channel(Handle provider, const PortSpec& port);
  std::shared_ptr<ShmChannel> find_shm_channel(Handle provider, std::string_view port) const;
  std::shared_ptr<MailboxChannel> find_mailbox_channel(Handle provider,
                                                       std::string_view port) const;
  void drop_channels(Handle provider);

  void spawn_task(const TaskControlBlock& tcb, std::shared_ptr<TaskBody> body, PortTable ports,
                  std::map<std::string, std::string> properties);
  /// Stops a task: no further steps run after this returns. Wall-clock
  /// workers are joined; the record remains until remove_task.
  void terminate_task(Handle id);
  void remove_task(Handle id);
  bool has_task(Handle id) const;
  TaskStatus task_status(Handle id) const;

  /// Swaps the channel behind a consumer inport (provider change).
  void rebind_inport(Handle consumer, const std::string& port, PortView view);

  void post_command(Handle id, ManagementCommand cmd);

  /// Samples recorded since the last collection, ordered by expected release.
  std::vector<LatencySample> collect_latency(Handle id);
  std::optional<LatencySample> last_sample(Handle id) const;

  /// Virtual mode test hook: latency injected on the k-th release.
  void set_injected_latency(Handle id, std::vector<std::int64_t> latencies_ns);

  std::int64_t now_ns() const;
  void advance_to(std::int64_t t_ns);
  void advance_by(std::int64_t dt_ns);

  std::vector<TraceRecord> trace_snapshot() const;
  std::string trace_text() const;
  void clear_trace();

 private:
  struct ChannelKey {
    Handle provider;
    std::string port;
    auto operator<=>(const ChannelKey&) const = default;
  };

  TaskRecord* find_task(Handle id) const;
  void trace(std::int64_t t, Handle task, std::string_view action, std::string detail = {});
  void drain_commands(TaskRecord& task, TaskContext& ctx, std::int64_t now);
  void run_periodic_release(TaskRecord& task, std::int64_t expected);
  void run_aperiodic_step(TaskRecord& task, std::vector<std::byte> message);
  void finalize_task(TaskRecord& task);
  void wall_worker(std::stop_token st, TaskRecord* task);
  void wall_worker_aperiodic(std::stop_token st, TaskRecord* task);
  std::int64_t wall_now_ns() const;

  TimingMode mode_;
  std::size_t mailbox_capacity_;
  std::chrono::steady_clock::time_point wall_start_;

  mutable std::mutex mu_;  // tasks_, channels, trace_, virtual clock
  std::map<Handle, std::unique_ptr<TaskRecord>> tasks_;
  std::map<ChannelKey, std::shared_ptr<ShmChannel>> shm_channels_;
  std::map<ChannelKey, std::shared_ptr<MailboxChannel>> mailbox_channels_;
  std::vector<TraceRecord> trace_;
  std::int64_t virtual_now_ = 0;
};

}  // namespace rtcx::rtsim
