#include "rtcx/rtsim/container.hpp"

#include <algorithm>
#include <condition_variable>
#include <sstream>
#include <thread>

namespace rtcx::rtsim {

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Running: return "RUNNING";
    case TaskStatus::Suspended: return "SUSPENDED";
    case TaskStatus::Terminating: return "TERMINATING";
    case TaskStatus::Terminated: return "TERMINATED";
  }
  return "RUNNING";
}

std::string_view to_string(ManagementCommand::Kind k) {
  switch (k) {
    case ManagementCommand::Kind::Suspend: return "suspend";
    case ManagementCommand::Kind::Resume: return "resume";
    case ManagementCommand::Kind::SetProperty: return "set-property";
    case ManagementCommand::Kind::QueryStatus: return "query-status";
    case ManagementCommand::Kind::Terminate: return "terminate";
  }
  return "query-status";
}

namespace {

std::string_view to_string(SimError::Code c) {
  switch (c) {
    case SimError::Code::UnknownTask: return "unknown-task";
    case SimError::Code::CommandQueueFull: return "command-queue-full";
    case SimError::Code::SpawnFailure: return "spawn-failure";
    case SimError::Code::WrongMode: return "wrong-mode";
  }
  return "sim-error";
}

}  // namespace

SimError::SimError(Code code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

/// Mutable runtime record of one container task. The record address is
/// stable for the task's whole life; `mu` guards everything that the task
/// worker and the container may touch concurrently in wall-clock mode.
struct TaskRecord {
  TaskControlBlock tcb;
  std::shared_ptr<TaskBody> body;
  PortTable ports;
  std::map<std::string, std::string> properties;
  TaskStatus status = TaskStatus::Running;

  std::int64_t t0 = 0;    // first release
  std::uint64_t k = 0;    // next release index; releases at t0 + k * period
  std::uint64_t steps = 0;

  std::deque<ManagementCommand> commands;
  std::vector<LatencySample> samples;  // not yet collected
  std::optional<LatencySample> last;
  std::vector<std::int64_t> injected;  // virtual-mode latency injection per k

  std::shared_ptr<MailboxChannel> trigger;  // aperiodic trigger inport

  std::jthread worker;  // wall-clock mode only
  mutable std::mutex mu;
  std::condition_variable_any cv;
};

Handle TaskContext::self() const { return task_->tcb.component_id; }

const std::string& TaskContext::task_name() const { return task_->tcb.name; }

std::optional<LatencySample> TaskContext::previous_sample() const {
  std::lock_guard lock(task_->mu);
  return task_->last;
}

std::shared_ptr<ShmChannel> TaskContext::shm_port(std::string_view port) const {
  std::lock_guard lock(task_->mu);
  auto it = task_->ports.find(port);
  return it == task_->ports.end() ? nullptr : it->second.shm;
}

std::shared_ptr<MailboxChannel> TaskContext::mailbox_port(std::string_view port) const {
  std::lock_guard lock(task_->mu);
  auto it = task_->ports.find(port);
  return it == task_->ports.end() ? nullptr : it->second.mailbox;
}

std::string TaskContext::property(const std::string& key, const std::string& fallback) const {
  std::lock_guard lock(task_->mu);
  auto it = task_->properties.find(key);
  return it == task_->properties.end() ? fallback : it->second;
}

Container::Container(TimingMode mode, std::size_t mailbox_capacity)
    : mode_(mode), mailbox_capacity_(mailbox_capacity),
      wall_start_(std::chrono::steady_clock::now()) {}

Container::~Container() {
  std::vector<Handle> ids;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, task] : tasks_) ids.push_back(id);
  }
  for (Handle id : ids) {
    try {
      terminate_task(id);
    } catch (const SimError&) {
    }
  }
}

std::int64_t Container::wall_now_ns() const {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              wall_start_)
      .count();
}

std::int64_t Container::now_ns() const {
  if (mode_ == TimingMode::Virtual) {
    std::lock_guard lock(mu_);
    return virtual_now_;
  }
  return wall_now_ns();
}

void Container::trace(std::int64_t t, Handle task, std::string_view action, std::string detail) {
  std::lock_guard lock(mu_);
  trace_.push_back(TraceRecord{t, task, std::string(action), std::move(detail)});
}

// Appends without taking mu_; used on paths that already hold it.
static void trace_into(std::vector<TraceRecord>& out, std::int64_t t, Handle task,
                       std::string_view action, std::string detail = {}) {
  out.push_back(TraceRecord{t, task, std::string(action), std::move(detail)});
}

std::shared_ptr<ShmChannel> Container::create_shm_channel(Handle provider, const PortSpec& port) {
  std::lock_guard lock(mu_);
  auto key = ChannelKey{provider, port.name};
  auto it = shm_channels_.find(key);
  if (it != shm_channels_.end()) return it->second;
  auto ch = std::make_shared<ShmChannel>(port.name, port.data_type, port.size);
  shm_channels_.emplace(std::move(key), ch);
  return ch;
}

std::shared_ptr<MailboxChannel> Container::create_mailbox_channel(Handle provider,
                                                                  const PortSpec& port) {
  std::lock_guard lock(mu_);
  auto key = ChannelKey{provider, port.name};
  auto it = mailbox_channels_.find(key);
  if (it != mailbox_channels_.end()) return it->second;
  auto ch = std::make_shared<MailboxChannel>(port.name, port.data_type, port.size,
                                             mailbox_capacity_);
  mailbox_channels_.emplace(std::move(key), ch);
  return ch;
}

std::shared_ptr<ShmChannel> Container::find_shm_channel(Handle provider,
                                                        std::string_view port) const {
  std::lock_guard lock(mu_);
  auto it = shm_channels_.find(ChannelKey{provider, std::string(port)});
  return it == shm_channels_.end() ? nullptr : it->second;
}

std::shared_ptr<MailboxChannel> Container::find_mailbox_channel(Handle provider,
                                                                std::string_view port) const {
  std::lock_guard lock(mu_);
  auto it = mailbox_channels_.find(ChannelKey{provider, std::string(port)});
  return it == mailbox_channels_.end() ? nullptr : it->second;
}

void Container::drop_channels(Handle provider) {
  std::lock_guard lock(mu_);
  std::erase_if(shm_channels_, [&](const auto& kv) { return kv.first.provider == provider; });
  std::erase_if(mailbox_channels_, [&](const auto& kv) { return kv.first.provider == provider; });
}

TaskRecord* Container::find_task(Handle id) const {
  auto it = tasks_.find(id);
  return it == tasks_.end() ? nullptr : it->second.get();
}

void Container::spawn_task(const TaskControlBlock& tcb, std::shared_ptr<TaskBody> body,
                           PortTable ports, std::map<std::string, std::string> properties) {
  if (tcb.periodic && tcb.period_ns <= 0)
    throw SimError(SimError::Code::SpawnFailure, "periodic task '" + tcb.name +
                                                     "' needs a positive period");
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    auto it = tasks_.find(tcb.component_id);
    if (it != tasks_.end()) {
      if (it->second->status != TaskStatus::Terminated)
        throw SimError(SimError::Code::SpawnFailure, "task '" + tcb.name + "' already running");
      tasks_.erase(it);
    }
    auto record = std::make_unique<TaskRecord>();
    record->tcb = tcb;
    record->body = std::move(body);
    record->ports = std::move(ports);
    record->properties = std::move(properties);
    if (!tcb.trigger_port.empty()) {
      auto pit = record->ports.find(tcb.trigger_port);
      if (pit != record->ports.end()) record->trigger = pit->second.mailbox;
    }
    const std::int64_t now = mode_ == TimingMode::Virtual ? virtual_now_ : wall_now_ns();
    record->t0 = tcb.periodic ? now + tcb.period_ns : now;
    task = record.get();
    tasks_.emplace(tcb.component_id, std::move(record));
    trace_into(trace_, now, tcb.component_id, "spawn",
               tcb.periodic ? "period=" + std::to_string(tcb.period_ns) : "aperiodic");
  }

  if (mode_ == TimingMode::Virtual) {
    TaskContext ctx(task);
    task->body->init(ctx);
    return;
  }

  try {
    task->worker = tcb.periodic
                       ? std::jthread([this, task](std::stop_token st) { wall_worker(st, task); })
                       : std::jthread([this, task](std::stop_token st) {
                           wall_worker_aperiodic(st, task);
                         });
  } catch (const std::system_error& e) {
    std::lock_guard lock(mu_);
    tasks_.erase(tcb.component_id);
    throw SimError(SimError::Code::SpawnFailure, e.what());
  }
}

void Container::finalize_task(TaskRecord& task) {
  TaskContext ctx(&task);
  task.body->uninit(ctx);
  std::lock_guard lock(task.mu);
  task.status = TaskStatus::Terminated;
}

void Container::terminate_task(Handle id) {
  if (mode_ == TimingMode::Virtual) {
    std::lock_guard lock(mu_);
    TaskRecord* task = find_task(id);
    if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
    if (task->status == TaskStatus::Terminated) return;
    finalize_task(*task);
    trace_into(trace_, virtual_now_, id, "terminate");
    return;
  }

  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  {
    std::lock_guard lock(task->mu);
    if (task->status == TaskStatus::Terminated) return;
    task->status = TaskStatus::Terminating;
  }
  task->worker.request_stop();
  task->cv.notify_all();
  if (task->trigger) task->trigger->notify_waiters();
  if (task->worker.joinable()) task->worker.join();
  trace(wall_now_ns(), id, "terminate");
}

void Container::remove_task(Handle id) {
  terminate_task(id);
  std::lock_guard lock(mu_);
  tasks_.erase(id);
}

bool Container::has_task(Handle id) const {
  std::lock_guard lock(mu_);
  return find_task(id) != nullptr;
}

TaskStatus Container::task_status(Handle id) const {
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  std::lock_guard lock(task->mu);
  return task->status;
}

void Container::rebind_inport(Handle consumer, const std::string& port, PortView view) {
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(consumer);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(consumer));
  std::lock_guard lock(task->mu);
  task->ports[port] = std::move(view);
  if (task->tcb.trigger_port == port) task->trigger = task->ports[port].mailbox;
}

void Container::post_command(Handle id, ManagementCommand cmd) {
  TaskRecord* task = nullptr;
  std::int64_t now = 0;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
    now = mode_ == TimingMode::Virtual ? virtual_now_ : wall_now_ns();
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  const auto kind = cmd.kind;
  {
    std::lock_guard lock(task->mu);
    if (task->status == TaskStatus::Terminated)
      throw SimError(SimError::Code::UnknownTask,
                     "task " + std::to_string(id) + " already terminated");
    if (task->commands.size() >= kCommandQueueCapacity)
      throw SimError(SimError::Code::CommandQueueFull, task->tcb.name);
    task->commands.push_back(std::move(cmd));
  }
  trace(now, id, "post", std::string(to_string(kind)));
  task->cv.notify_all();
  if (task->trigger) task->trigger->notify_waiters();
}

std::vector<LatencySample> Container::collect_latency(Handle id) {
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  std::lock_guard lock(task->mu);
  std::vector<LatencySample> out;
  out.swap(task->samples);
  return out;
}

std::optional<LatencySample> Container::last_sample(Handle id) const {
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  std::lock_guard lock(task->mu);
  return task->last;
}

void Container::set_injected_latency(Handle id, std::vector<std::int64_t> latencies_ns) {
  TaskRecord* task = nullptr;
  {
    std::lock_guard lock(mu_);
    task = find_task(id);
  }
  if (!task) throw SimError(SimError::Code::UnknownTask, std::to_string(id));
  std::lock_guard lock(task->mu);
  task->injected = std::move(latencies_ns);
}

void Container::drain_commands(TaskRecord& task, TaskContext& ctx, std::int64_t now) {
  (void)ctx;
  std::deque<ManagementCommand> commands;
  {
    std::lock_guard lock(task.mu);
    commands.swap(task.commands);
  }
  for (auto& cmd : commands) {
    if (mode_ == TimingMode::Virtual)
      trace_into(trace_, now, task.tcb.component_id, "command",
                 std::string(to_string(cmd.kind)));
    else
      trace(now, task.tcb.component_id, "command", std::string(to_string(cmd.kind)));

    switch (cmd.kind) {
      case ManagementCommand::Kind::Suspend: {
        std::lock_guard lock(task.mu);
        if (task.status == TaskStatus::Running) task.status = TaskStatus::Suspended;
        break;
      }
      case ManagementCommand::Kind::Resume: {
        std::lock_guard lock(task.mu);
        if (task.status == TaskStatus::Suspended) task.status = TaskStatus::Running;
        break;
      }
      case ManagementCommand::Kind::SetProperty: {
        std::lock_guard lock(task.mu);
        task.properties[cmd.property] = cmd.value;
        break;
      }
      case ManagementCommand::Kind::QueryStatus: {
        TaskStatusReport report;
        {
          std::lock_guard lock(task.mu);
          report.status = task.status;
          report.properties = task.properties;
          report.last_sample = task.last;
        }
        if (cmd.reply) cmd.reply(report);
        break;
      }
      case ManagementCommand::Kind::Terminate: {
        std::lock_guard lock(task.mu);
        task.status = TaskStatus::Terminating;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Virtual-time engine
// ---------------------------------------------------------------------------

void Container::advance_by(std::int64_t dt_ns) {
  advance_to(now_ns() + dt_ns);
}

void Container::advance_to(std::int64_t t_ns) {
  if (mode_ != TimingMode::Virtual)
    throw SimError(SimError::Code::WrongMode, "advance_to requires virtual timing");

  std::unique_lock lock(mu_);
  if (t_ns < virtual_now_) return;

  for (;;) {
    struct Candidate {
      std::int64_t t;
      int priority;
      Handle id;
    };
    std::optional<Candidate> best;
    for (auto& [id, ptr] : tasks_) {
      TaskRecord& task = *ptr;
      if (task.status == TaskStatus::Terminated || task.status == TaskStatus::Terminating)
        continue;
      std::optional<Candidate> cand;
      if (task.tcb.periodic) {
        if (task.status == TaskStatus::Suspended) {
          if (task.commands.empty()) continue;  // fully idle while suspended
          // Commands are drained at grid points; skip the grid forward so a
          // resumed task carries no catch-up burst.
          std::int64_t next = task.t0 + std::int64_t(task.k) * task.tcb.period_ns;
          if (next < virtual_now_) {
            const std::int64_t missed =
                (virtual_now_ - task.t0 + task.tcb.period_ns - 1) / task.tcb.period_ns;
            task.k = std::uint64_t(missed);
            next = task.t0 + std::int64_t(task.k) * task.tcb.period_ns;
          }
          if (next <= t_ns) cand = Candidate{next, task.tcb.priority, id};
        } else {
          const std::int64_t next = task.t0 + std::int64_t(task.k) * task.tcb.period_ns;
          if (next <= t_ns) cand = Candidate{next, task.tcb.priority, id};
        }
      } else {
        const bool triggered =
            task.status == TaskStatus::Running && task.trigger && task.trigger->pending() > 0;
        if (triggered || !task.commands.empty())
          cand = Candidate{virtual_now_, task.tcb.priority, id};
      }
      if (cand && (!best || std::tie(cand->t, cand->priority, cand->id) <
                                std::tie(best->t, best->priority, best->id)))
        best = cand;
    }
    if (!best) break;

    TaskRecord& task = *tasks_.at(best->id);
    if (task.tcb.periodic) {
      const std::int64_t expected = best->t;
      if (task.status == TaskStatus::Running) {
        const std::int64_t inject =
            task.k < task.injected.size() ? task.injected[task.k] : 0;
        const std::int64_t actual = expected + inject;
        virtual_now_ = std::max(virtual_now_, actual);
        LatencySample sample{best->id, expected, actual, actual - expected};
        {
          std::lock_guard tl(task.mu);
          task.samples.push_back(sample);
          task.last = sample;
        }
        trace_into(trace_, actual, best->id, "release", "k=" + std::to_string(task.k));
        TaskContext ctx(&task);
        ctx.expected_ = expected;
        ctx.actual_ = actual;
        ctx.step_ = task.steps;
        trace_into(trace_, actual, best->id, "step-begin");
        task.body->step(ctx);
        trace_into(trace_, virtual_now_, best->id, "step-end");
        ++task.steps;
        drain_commands(task, ctx, virtual_now_);
      } else {
        // Suspended: the grid point only drains commands.
        virtual_now_ = std::max(virtual_now_, expected);
        TaskContext ctx(&task);
        drain_commands(task, ctx, expected);
      }
      if (task.status == TaskStatus::Terminating) {
        finalize_task(task);
        trace_into(trace_, virtual_now_, best->id, "terminate");
      }
      ++task.k;
    } else {
      TaskContext ctx(&task);
      if (task.status == TaskStatus::Running && task.trigger) {
        if (auto msg = task.trigger->recv()) {
          ctx.trigger_ = std::move(msg);
          ctx.expected_ = ctx.actual_ = virtual_now_;
          ctx.step_ = task.steps;
          trace_into(trace_, virtual_now_, best->id, "release", "trigger");
          task.body->step(ctx);
          ++task.steps;
        }
      }
      drain_commands(task, ctx, virtual_now_);
      if (task.status == TaskStatus::Terminating) {
        finalize_task(task);
        trace_into(trace_, virtual_now_, best->id, "terminate");
      }
    }
  }

  virtual_now_ = std::max(virtual_now_, t_ns);
}

// ---------------------------------------------------------------------------
// Wall-clock workers
// ---------------------------------------------------------------------------

void Container::wall_worker(std::stop_token st, TaskRecord* task) {
  TaskContext ctx(task);
  task->body->init(ctx);
  while (!st.stop_requested()) {
    const std::int64_t expected = task->t0 + std::int64_t(task->k) * task->tcb.period_ns;
    {
      std::unique_lock lock(task->mu);
      task->cv.wait_until(lock, st, wall_start_ + std::chrono::nanoseconds(expected),
                          [] { return false; });
    }
    if (st.stop_requested()) break;

    TaskStatus status;
    {
      std::lock_guard lock(task->mu);
      status = task->status;
    }
    if (status == TaskStatus::Running) {
      const std::int64_t actual = wall_now_ns();
      LatencySample sample{task->tcb.component_id, expected, actual, actual - expected};
      {
        std::lock_guard lock(task->mu);
        task->samples.push_back(sample);
        task->last = sample;
      }
      trace(actual, task->tcb.component_id, "release", "k=" + std::to_string(task->k));
      ctx.expected_ = expected;
      ctx.actual_ = actual;
      ctx.step_ = task->steps;
      ctx.trigger_.reset();
      task->body->step(ctx);
      ++task->steps;
    }
    drain_commands(*task, ctx, wall_now_ns());
    {
      std::lock_guard lock(task->mu);
      if (task->status == TaskStatus::Terminating) break;
    }
    ++task->k;
  }
  task->body->uninit(ctx);
  std::lock_guard lock(task->mu);
  task->status = TaskStatus::Terminated;
}

void Container::wall_worker_aperiodic(std::stop_token st, TaskRecord* task) {
  TaskContext ctx(task);
  task->body->init(ctx);
  auto has_commands = [task] {
    std::lock_guard lock(task->mu);
    return !task->commands.empty();
  };
  while (!st.stop_requested()) {
    TaskStatus status;
    {
      std::lock_guard lock(task->mu);
      status = task->status;
    }
    bool have_message = false;
    if (status == TaskStatus::Running && task->trigger) {
      have_message =
          task->trigger->wait_for_message([&] { return st.stop_requested() || has_commands(); });
    } else {
      std::unique_lock lock(task->mu);
      task->cv.wait(lock, st, [&] { return !task->commands.empty(); });
    }
    if (st.stop_requested()) break;

    {
      std::lock_guard lock(task->mu);
      status = task->status;
    }
    if (status == TaskStatus::Running && have_message && task->trigger) {
      if (auto msg = task->trigger->recv()) {
        ctx.trigger_ = std::move(msg);
        ctx.expected_ = ctx.actual_ = wall_now_ns();
        ctx.step_ = task->steps;
        trace(ctx.actual_, task->tcb.component_id, "release", "trigger");
        task->body->step(ctx);
        ++task->steps;
      }
    }
    drain_commands(*task, ctx, wall_now_ns());
    {
      std::lock_guard lock(task->mu);
      if (task->status == TaskStatus::Terminating) break;
    }
  }
  task->body->uninit(ctx);
  std::lock_guard lock(task->mu);
  task->status = TaskStatus::Terminated;
}

// ---------------------------------------------------------------------------
// Instrumentation
// ---------------------------------------------------------------------------

std::vector<TraceRecord> Container::trace_snapshot() const {
  std::lock_guard lock(mu_);
  return trace_;
}

std::string Container::trace_text() const {
  auto records = trace_snapshot();
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.t_ns << ' ' << r.task << ' ' << r.action;
    if (!r.detail.empty()) out << ' ' << r.detail;
    out << '\n';
  }
  return out.str();
}

void Container::clear_trace() {
  std::lock_guard lock(mu_);
  trace_.clear();
}

}  // namespace rtcx::rtsim
