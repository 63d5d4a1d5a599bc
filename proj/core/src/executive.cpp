#include "rtcx/executive.hpp"

#include <algorithm>
#include <sstream>

namespace rtcx {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string_view ExecError::code_string() const {
  switch (code_) {
    case Code::UnknownId: return "unknown-id";
    case Code::WrongState: return "wrong-state";
    case Code::DuplicateName: return "duplicate-name";
    case Code::ParseFailure: return "parse-failure";
  }
  return "exec-error";
}

ExecError::ExecError(Code code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

Executive::Executive(ExecutiveConfig cfg)
    : cfg_(std::move(cfg)),
      container_(cfg_.mode, cfg_.mailbox_capacity),
      ledger_(cfg_.cpu_cap, cfg_.policy) {
  if (!cfg_.body_factory) cfg_.body_factory = builtin_body_factory();
  if (!cfg_.event_log_path.empty())
    log_file_.open(cfg_.event_log_path, std::ios::out | std::ios::app);
}

Executive::~Executive() = default;

// ---------------------------------------------------------------------------
// Event intake
// ---------------------------------------------------------------------------

std::vector<StateChange> Executive::dispatch(const LifecycleEvent& event) {
  std::lock_guard lock(mu_);
  LifecycleEvent accepted = event;
  accepted.sequence_no = next_seq_++;
  restart_attempted_.clear();

  LogRecord record;
  record.seq = accepted.sequence_no;
  try {
    record.changes = apply(accepted);
    record.event = accepted;
  } catch (const ExecError& err) {
    record.event = accepted;
    record.error = std::string(err.code_string());
    append_log(std::move(record));
    throw;
  }
  auto changes = record.changes;
  append_log(std::move(record));
  return changes;
}

std::future<std::vector<StateChange>> Executive::submit(LifecycleEvent event) {
  return std::async(std::launch::async,
                    [this, e = std::move(event)] { return dispatch(e); });
}

std::pair<Handle, std::vector<StateChange>> Executive::install(const ComponentDescriptor& d) {
  auto changes = dispatch(make_install_event(d));
  return {changes.empty() ? kNoHandle : changes.front().id, changes};
}

std::vector<StateChange> Executive::enable(Handle id) {
  return dispatch(make_event(EventKind::Enable, id));
}
std::vector<StateChange> Executive::disable(Handle id) {
  return dispatch(make_event(EventKind::Disable, id));
}
std::vector<StateChange> Executive::start(Handle id) {
  return dispatch(make_event(EventKind::Start, id));
}
std::vector<StateChange> Executive::stop(Handle id) {
  return dispatch(make_event(EventKind::Stop, id));
}
std::vector<StateChange> Executive::suspend(Handle id) {
  return dispatch(make_event(EventKind::Suspend, id));
}
std::vector<StateChange> Executive::resume(Handle id) {
  return dispatch(make_event(EventKind::Resume, id));
}
std::vector<StateChange> Executive::uninstall(Handle id) {
  return dispatch(make_event(EventKind::Uninstall, id));
}

std::vector<StateChange> Executive::set_property(Handle id, const std::string& key,
                                                 const std::string& value) {
  auto e = make_event(EventKind::SetProperty, id);
  e.property = key;
  e.value = value;
  return dispatch(e);
}

// ---------------------------------------------------------------------------
// Event application (single-threaded; mu_ held)
// ---------------------------------------------------------------------------

ComponentInstance& Executive::instance_for(const LifecycleEvent& event) {
  Handle id = event.subject;
  if (id == kNoHandle && !event.subject_name.empty())
    id = registry_.find_by_name(event.subject_name);
  if (id == kNoHandle || !registry_.contains(id))
    throw ExecError(ExecError::Code::UnknownId,
                    event.subject_name.empty() ? "handle " + std::to_string(event.subject)
                                               : "component '" + event.subject_name + "'");
  return registry_.at(id);
}

void Executive::record(ComponentInstance& inst, LifecycleState to, std::string reason,
                       std::vector<StateChange>& out) {
  const LifecycleState from = inst.state;
  if (!transition_legal(from, to))
    throw std::logic_error("illegal transition " + std::string(to_string(from)) + " -> " +
                           std::string(to_string(to)) + " for '" + inst.descriptor.name + "'");
  inst.state = to;
  out.push_back(StateChange{inst.id, inst.descriptor.name, from, to, std::move(reason)});
}

void Executive::evaluate_resolution(ComponentInstance& inst, LifecycleState,
                                    std::vector<StateChange>& out) {
  auto rr = resolve_functional(registry_, inst.id);
  if (!rr.satisfied()) {
    inst.bindings.clear();
    record(inst, LifecycleState::Unsatisfied, "unresolved: missing [" + join(rr.unmatched) + "]",
           out);
    return;
  }
  auto decision =
      admit(registry_, inst.id, ledger_, cfg_.external_resolver.get(), cfg_.external_timeout);
  if (!decision.admitted) {
    inst.bindings.clear();
    record(inst, LifecycleState::Unsatisfied, decision.reason, out);
    return;
  }
  inst.bindings = rr.bindings;
  record(inst, LifecycleState::Satisfied, "resolved", out);
}

rtsim::PortTable Executive::build_ports(const ComponentInstance& inst) {
  rtsim::PortTable ports;
  for (const auto& port : inst.descriptor.outports) {
    rtsim::PortView view;
    view.spec = port;
    if (port.interface == PortInterface::SharedMemory)
      view.shm = container_.create_shm_channel(inst.id, port);
    else
      view.mailbox = container_.create_mailbox_channel(inst.id, port);
    ports[port.name] = std::move(view);
  }
  for (const auto& binding : inst.bindings) {
    const PortSpec* spec = inst.descriptor.find_inport(binding.consumer_port);
    if (!spec) continue;
    rtsim::PortView view;
    view.spec = *spec;
    if (binding.channel_kind == PortInterface::SharedMemory)
      view.shm = container_.find_shm_channel(binding.provider, binding.provider_port);
    else
      view.mailbox = container_.find_mailbox_channel(binding.provider, binding.provider_port);
    ports[binding.consumer_port] = std::move(view);
  }
  return ports;
}

bool Executive::try_activate(ComponentInstance& inst, const char* reason,
                             std::vector<StateChange>& out) {
  auto rr = resolve_functional(registry_, inst.id);
  if (!rr.satisfied()) {
    inst.bindings.clear();
    record(inst, LifecycleState::Unsatisfied, "unresolved: missing [" + join(rr.unmatched) + "]",
           out);
    return false;
  }
  auto decision =
      admit(registry_, inst.id, ledger_, cfg_.external_resolver.get(), cfg_.external_timeout);
  if (!decision.admitted) {
    inst.bindings.clear();
    record(inst, LifecycleState::Unsatisfied, decision.reason, out);
    return false;
  }

  inst.bindings = rr.bindings;
  const int cpu = budget_cpu(inst);
  const bool periodic = inst.descriptor.task_type == TaskType::Periodic;
  ledger_.commit(cpu, inst.descriptor.cpu_usage, periodic);

  rtsim::TaskControlBlock tcb;
  tcb.component_id = inst.id;
  tcb.name = inst.descriptor.name;
  if (inst.descriptor.task) {
    tcb.periodic = true;
    tcb.period_ns = inst.descriptor.task->period_ns();
    tcb.priority = inst.descriptor.task->priority;
    tcb.cpu = inst.descriptor.task->run_on_cpu;
  } else {
    tcb.periodic = false;
    tcb.priority = cfg_.aperiodic_priority;
    tcb.cpu = 0;
    for (const auto& port : inst.descriptor.inports) {
      if (port.interface == PortInterface::Mailbox) {
        tcb.trigger_port = port.name;
        break;
      }
    }
  }

  try {
    container_.spawn_task(tcb, cfg_.body_factory(inst.descriptor), build_ports(inst),
                          inst.properties);
  } catch (const rtsim::SimError& err) {
    ledger_.release(cpu, inst.descriptor.cpu_usage, periodic);
    inst.bindings.clear();
    record(inst, LifecycleState::Unsatisfied, std::string("spawn-failure: ") + err.what(), out);
    return false;
  }
  record(inst, LifecycleState::Active, reason, out);
  return true;
}

void Executive::deactivate_running(ComponentInstance& inst, LifecycleState to,
                                   const std::string& reason, std::vector<StateChange>& out) {
  if (container_.has_task(inst.id)) container_.terminate_task(inst.id);
  container_.drop_channels(inst.id);
  ledger_.release(budget_cpu(inst), inst.descriptor.cpu_usage,
                  inst.descriptor.task_type == TaskType::Periodic);
  inst.bindings.clear();
  record(inst, to, reason, out);
}

void Executive::do_stop(ComponentInstance& inst, const LifecycleEvent& event,
                        std::vector<StateChange>& out) {
  // Consumers are deactivated before their provider's task goes away, so no
  // running consumer ever reads a dead channel.
  auto cascade =
      cascade_unsatisfied(registry_, inst.id, cfg_.external_resolver.get(), &event);
  for (Handle dep_id : cascade) {
    auto& dep = registry_.at(dep_id);
    deactivate_running(dep, LifecycleState::Unsatisfied,
                       "cascade: provider '" + inst.descriptor.name + "' departed", out);
  }

  auto rr = resolve_functional(registry_, inst.id);
  const auto to = rr.satisfied() ? LifecycleState::Satisfied : LifecycleState::Unsatisfied;
  deactivate_running(inst, to, "stopped", out);
  if (to == LifecycleState::Satisfied) inst.bindings = rr.bindings;

  reconcile(out);
}

void Executive::reconcile(std::vector<StateChange>& out) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Handle> ids;
    ids.reserve(registry_.size());
    for (const auto& [id, inst] : registry_.instances()) ids.push_back(id);

    for (Handle id : ids) {
      if (!registry_.contains(id)) continue;
      auto& inst = registry_.at(id);
      switch (inst.state) {
        case LifecycleState::Satisfied: {
          auto rr = resolve_functional(registry_, id);
          if (!rr.satisfied()) {
            inst.bindings.clear();
            record(inst, LifecycleState::Unsatisfied,
                   "unresolved: missing [" + join(rr.unmatched) + "]", out);
            changed = true;
          } else if (inst.bindings != rr.bindings) {
            inst.bindings = rr.bindings;  // keep bindings canonical (lowest id)
          }
          break;
        }
        case LifecycleState::Unsatisfied: {
          if (!inst.enabled) break;
          auto rr = resolve_functional(registry_, id);
          if (!rr.satisfied()) break;
          auto decision = admit(registry_, id, ledger_, cfg_.external_resolver.get(),
                                cfg_.external_timeout);
          if (!decision.admitted) break;
          inst.bindings = rr.bindings;
          record(inst, LifecycleState::Satisfied, "resolved", out);
          changed = true;
          if (cfg_.auto_restart && inst.start_requested && !restart_attempted_.count(id)) {
            restart_attempted_.insert(id);
            try_activate(inst, "auto-restart", out);
          }
          break;
        }
        case LifecycleState::Active:
        case LifecycleState::Suspended: {
          auto rr = resolve_functional(registry_, id);
          if (rr.satisfied() && inst.bindings != rr.bindings) {
            inst.bindings = rr.bindings;
            for (const auto& binding : inst.bindings) {
              const PortSpec* spec = inst.descriptor.find_inport(binding.consumer_port);
              if (!spec) continue;
              rtsim::PortView view;
              view.spec = *spec;
              if (binding.channel_kind == PortInterface::SharedMemory)
                view.shm = container_.find_shm_channel(binding.provider, binding.provider_port);
              else
                view.mailbox =
                    container_.find_mailbox_channel(binding.provider, binding.provider_port);
              container_.rebind_inport(id, binding.consumer_port, std::move(view));
            }
          }
          break;
        }
        default:
          break;
      }
    }
  }
}

std::vector<StateChange> Executive::apply(LifecycleEvent& event) {
  std::vector<StateChange> out;
  switch (event.kind) {
    case EventKind::Install: {
      ComponentDescriptor d;
      try {
        d = parse_descriptor(event.descriptor_xml);
      } catch (const ParseError& pe) {
        throw ExecError(ExecError::Code::ParseFailure, pe.what());
      }
      ComponentInstance* inst = nullptr;
      try {
        inst = &registry_.add(d);
      } catch (const RegistryError&) {
        throw ExecError(ExecError::Code::DuplicateName, "component '" + d.name + "'");
      }
      event.subject = inst->id;
      event.subject_name = d.name;
      if (inst->enabled)
        evaluate_resolution(*inst, LifecycleState::Registered, out);
      else
        record(*inst, LifecycleState::Registered, "installed (disabled)", out);
      break;
    }

    case EventKind::Enable: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      if (inst.state != LifecycleState::Registered)
        throw ExecError(ExecError::Code::WrongState,
                        "enable '" + inst.descriptor.name + "': state " +
                            std::string(to_string(inst.state)));
      inst.enabled = true;
      evaluate_resolution(inst, LifecycleState::Registered, out);
      break;
    }

    case EventKind::Disable: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      inst.start_requested = false;
      if (inst.provides()) do_stop(inst, event, out);
      inst.enabled = false;
      inst.bindings.clear();
      record(inst, LifecycleState::Registered, "disabled", out);
      break;
    }

    case EventKind::Start: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      if (inst.state == LifecycleState::Unsatisfied && inst.enabled) {
        // The start intent sticks so the component auto-restarts once its
        // dependencies appear, but the operation itself is rejected.
        inst.start_requested = true;
        throw ExecError(ExecError::Code::WrongState,
                        "start '" + inst.descriptor.name + "': state UNSATISFIED");
      }
      if (inst.state != LifecycleState::Satisfied)
        throw ExecError(ExecError::Code::WrongState,
                        "start '" + inst.descriptor.name + "': state " +
                            std::string(to_string(inst.state)));
      inst.start_requested = true;
      if (try_activate(inst, "started", out)) reconcile(out);
      break;
    }

    case EventKind::Stop: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      if (!inst.provides())
        throw ExecError(ExecError::Code::WrongState,
                        "stop '" + inst.descriptor.name + "': state " +
                            std::string(to_string(inst.state)));
      inst.start_requested = false;
      do_stop(inst, event, out);
      break;
    }

    case EventKind::Suspend: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      if (inst.state != LifecycleState::Active)
        throw ExecError(ExecError::Code::WrongState,
                        "suspend '" + inst.descriptor.name + "': state " +
                            std::string(to_string(inst.state)));
      rtsim::ManagementCommand cmd;
      cmd.kind = rtsim::ManagementCommand::Kind::Suspend;
      container_.post_command(inst.id, std::move(cmd));
      record(inst, LifecycleState::Suspended, "suspended", out);
      break;
    }

    case EventKind::Resume: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      if (inst.state != LifecycleState::Suspended)
        throw ExecError(ExecError::Code::WrongState,
                        "resume '" + inst.descriptor.name + "': state " +
                            std::string(to_string(inst.state)));
      rtsim::ManagementCommand cmd;
      cmd.kind = rtsim::ManagementCommand::Kind::Resume;
      container_.post_command(inst.id, std::move(cmd));
      record(inst, LifecycleState::Active, "resumed", out);
      break;
    }

    case EventKind::Uninstall: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      inst.start_requested = false;
      if (inst.provides()) {
        auto cascade =
            cascade_unsatisfied(registry_, inst.id, cfg_.external_resolver.get(), &event);
        for (Handle dep_id : cascade) {
          auto& dep = registry_.at(dep_id);
          deactivate_running(dep, LifecycleState::Unsatisfied,
                             "cascade: provider '" + inst.descriptor.name + "' departed", out);
        }
        deactivate_running(inst, LifecycleState::Uninstalled, "uninstalled", out);
      } else {
        inst.bindings.clear();
        record(inst, LifecycleState::Uninstalled, "uninstalled", out);
      }
      registry_.remove(event.subject);
      reconcile(out);
      break;
    }

    case EventKind::SetProperty: {
      auto& inst = instance_for(event);
      event.subject = inst.id;
      event.subject_name = inst.descriptor.name;
      inst.properties[event.property] = event.value;
      if (container_.has_task(inst.id) &&
          container_.task_status(inst.id) != rtsim::TaskStatus::Terminated) {
        rtsim::ManagementCommand cmd;
        cmd.kind = rtsim::ManagementCommand::Kind::SetProperty;
        cmd.property = event.property;
        cmd.value = event.value;
        container_.post_command(inst.id, std::move(cmd));
      }
      break;
    }

    case EventKind::ProviderAppeared:
    case EventKind::ProviderDeparted: {
      reconcile(out);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Views & pass-throughs
// ---------------------------------------------------------------------------

Handle Executive::find(std::string_view name) const {
  std::lock_guard lock(mu_);
  return registry_.find_by_name(name);
}

LifecycleState Executive::state_of(Handle id) const {
  std::lock_guard lock(mu_);
  if (!registry_.contains(id))
    throw ExecError(ExecError::Code::UnknownId, "handle " + std::to_string(id));
  return registry_.at(id).state;
}

Registry Executive::snapshot() const {
  std::lock_guard lock(mu_);
  return registry_;
}

CpuBudgetLedger Executive::ledger_snapshot() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

std::vector<LogRecord> Executive::log_snapshot() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::string Executive::log_text() const { return to_text(log_snapshot()); }

void Executive::append_log(LogRecord record) {
  if (log_file_.is_open()) {
    log_file_ << to_json_line(record) << '\n';
    log_file_.flush();
  }
  log_.push_back(std::move(record));
}

std::future<rtsim::TaskStatusReport> Executive::query_status_async(Handle id) {
  auto promise = std::make_shared<std::promise<rtsim::TaskStatusReport>>();
  auto future = promise->get_future();
  rtsim::ManagementCommand cmd;
  cmd.kind = rtsim::ManagementCommand::Kind::QueryStatus;
  cmd.reply = [promise](const rtsim::TaskStatusReport& report) { promise->set_value(report); };
  container_.post_command(id, std::move(cmd));
  return future;
}

std::vector<rtsim::LatencySample> Executive::collect_latency(Handle id) {
  return container_.collect_latency(id);
}

void Executive::advance_virtual_to(std::int64_t t_ns) {
  std::lock_guard lock(mu_);
  container_.advance_to(t_ns);
}

void Executive::advance_virtual_by(std::int64_t dt_ns) {
  std::lock_guard lock(mu_);
  container_.advance_by(dt_ns);
}

std::int64_t Executive::virtual_now() const { return container_.now_ns(); }

}  // namespace rtcx
