#pragma once

#include "rtcx/descriptor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rtcx {

/// Component lifecycle states owned by the executive. REGISTERED covers both
/// "freshly installed" and "installed but disabled"; UNINSTALLED is terminal.
enum class LifecycleState {
  Registered,
  Unsatisfied,
  Satisfied,
  Active,
  Suspended,
  Uninstalled,
};

std::string_view to_string(LifecycleState s);
std::optional<LifecycleState> lifecycle_state_from(std::string_view text);

/// True when `from` -> `to` is an edge of the lifecycle state machine.
/// Self-loops are permitted as no-op records (e.g. installing disabled).
bool transition_legal(LifecycleState from, LifecycleState to);

enum class EventKind {
  Install,
  Enable,
  Disable,
  Start,
  Stop,
  Uninstall,
  ProviderAppeared,
  ProviderDeparted,
  SetProperty,
  Suspend,
  Resume,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from(std::string_view text);

/// One serializable executive event. Events are totally ordered by
/// sequence_no, assigned when the executive accepts the event.
struct LifecycleEvent {
  EventKind kind = EventKind::Install;
  Handle subject = kNoHandle;   // unused for Install (the descriptor names it)
  std::string subject_name;
  std::string descriptor_xml;   // Install only: canonical descriptor form
  std::string property;         // SetProperty only
  std::string value;            // SetProperty only
  std::uint64_t sequence_no = 0;

  bool operator==(const LifecycleEvent&) const = default;
};

LifecycleEvent make_install_event(const ComponentDescriptor& d);
LifecycleEvent make_event(EventKind kind, Handle subject, std::string subject_name = {});

/// One audited state transition, in the order it was applied.
struct StateChange {
  Handle id = kNoHandle;
  std::string name;
  LifecycleState from = LifecycleState::Registered;
  LifecycleState to = LifecycleState::Registered;
  std::string reason;

  bool operator==(const StateChange&) const = default;
};

}  // namespace rtcx
