#include "rtcx/lifecycle.hpp"

namespace rtcx {

std::string_view to_string(LifecycleState s) {
  switch (s) {
    case LifecycleState::Registered: return "REGISTERED";
    case LifecycleState::Unsatisfied: return "UNSATISFIED";
    case LifecycleState::Satisfied: return "SATISFIED";
    case LifecycleState::Active: return "ACTIVE";
    case LifecycleState::Suspended: return "SUSPENDED";
    case LifecycleState::Uninstalled: return "UNINSTALLED";
  }
  return "REGISTERED";
}

std::optional<LifecycleState> lifecycle_state_from(std::string_view text) {
  if (text == "REGISTERED") return LifecycleState::Registered;
  if (text == "UNSATISFIED") return LifecycleState::Unsatisfied;
  if (text == "SATISFIED") return LifecycleState::Satisfied;
  if (text == "ACTIVE") return LifecycleState::Active;
  if (text == "SUSPENDED") return LifecycleState::Suspended;
  if (text == "UNINSTALLED") return LifecycleState::Uninstalled;
  return std::nullopt;
}

bool transition_legal(LifecycleState from, LifecycleState to) {
  using S = LifecycleState;
  if (from == to) return true;  // no-op record
  switch (from) {
    case S::Registered:
      return to == S::Satisfied || to == S::Unsatisfied || to == S::Uninstalled;
    case S::Unsatisfied:
      return to == S::Satisfied || to == S::Registered || to == S::Uninstalled;
    case S::Satisfied:
      return to == S::Active || to == S::Unsatisfied || to == S::Registered ||
             to == S::Uninstalled;
    case S::Active:
      return to == S::Suspended || to == S::Satisfied || to == S::Unsatisfied ||
             to == S::Uninstalled;
    case S::Suspended:
      return to == S::Active || to == S::Satisfied || to == S::Unsatisfied ||
             to == S::Uninstalled;
    case S::Uninstalled:
      return false;
  }
  return false;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Install: return "install";
    case EventKind::Enable: return "enable";
    case EventKind::Disable: return "disable";
    case EventKind::Start: return "start";
    case EventKind::Stop: return "stop";
    case EventKind::Uninstall: return "uninstall";
    case EventKind::ProviderAppeared: return "provider-appeared";
    case EventKind::ProviderDeparted: return "provider-departed";
    case EventKind::SetProperty: return "set-property";
    case EventKind::Suspend: return "suspend";
    case EventKind::Resume: return "resume";
  }
  return "install";
}

std::optional<EventKind> event_kind_from(std::string_view text) {
  if (text == "install") return EventKind::Install;
  if (text == "enable") return EventKind::Enable;
  if (text == "disable") return EventKind::Disable;
  if (text == "start") return EventKind::Start;
  if (text == "stop") return EventKind::Stop;
  if (text == "uninstall") return EventKind::Uninstall;
  if (text == "provider-appeared") return EventKind::ProviderAppeared;
  if (text == "provider-departed") return EventKind::ProviderDeparted;
  if (text == "set-property") return EventKind::SetProperty;
  if (text == "suspend") return EventKind::Suspend;
  if (text == "resume") return EventKind::Resume;
  return std::nullopt;
}

LifecycleEvent make_install_event(const ComponentDescriptor& d) {
  LifecycleEvent e;
  e.kind = EventKind::Install;
  e.subject_name = d.name;
  e.descriptor_xml = serialize_descriptor(d);
  return e;
}

LifecycleEvent make_event(EventKind kind, Handle subject, std::string subject_name) {
  LifecycleEvent e;
  e.kind = kind;
  e.subject = subject;
  e.subject_name = std::move(subject_name);
  return e;
}

}  // namespace rtcx
