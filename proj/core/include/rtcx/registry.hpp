#pragma once

#include "rtcx/descriptor.hpp"
#include "rtcx/lifecycle.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtcx {

/// A resolved wire from a provider outport to a consumer inport.
struct Binding {
  Handle consumer = kNoHandle;
  std::string consumer_port;
  Handle provider = kNoHandle;
  std::string provider_port;
  PortInterface channel_kind = PortInterface::SharedMemory;

  bool operator==(const Binding&) const = default;
};

/// A registered component with its lifecycle state and resolved bindings.
struct ComponentInstance {
  Handle id = kNoHandle;
  ComponentDescriptor descriptor;
  LifecycleState state = LifecycleState::Registered;
  std::vector<Binding> bindings;  // empty unless SATISFIED or beyond
  bool enabled = true;
  std::map<std::string, std::string> properties;  // runtime values
  bool start_requested = false;  // sticky start intent, drives auto-restart

  bool provides() const {
    return state == LifecycleState::Active || state == LifecycleState::Suspended;
  }
};

/// Published management-service record for a resolvable instance.
struct ServiceRecord {
  Handle component_id = kNoHandle;
  std::map<std::string, std::string> properties;
};

class RegistryError : public std::runtime_error {
 public:
  enum class Code { DuplicateName, UnknownId, StillActive };

  RegistryError(Code code, const std::string& what);
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view to_string(RegistryError::Code c);

/// The executive's global view: every installed component, keyed by handle.
/// Owned by the executive's event loop; copies serve as read-only snapshots.
class Registry {
 public:
  /// Creates an instance in state REGISTERED. Names are unique per registry.
  ComponentInstance& add(const ComponentDescriptor& d);

  /// Removes an instance. The executive must have driven it out of
  /// ACTIVE/SUSPENDED first.
  void remove(Handle id);

  bool contains(Handle id) const { return instances_.count(id) != 0; }
  ComponentInstance& at(Handle id);
  const ComponentInstance& at(Handle id) const;
  Handle find_by_name(std::string_view name) const;  // kNoHandle when absent

  std::size_t size() const { return instances_.size(); }
  const std::map<Handle, ComponentInstance>& instances() const { return instances_; }
  std::map<Handle, ComponentInstance>& instances() { return instances_; }

  /// Records of instances in SATISFIED/ACTIVE/SUSPENDED whose property maps
  /// contain every (key, value) pair of the filter. Empty filter: all records.
  std::vector<ServiceRecord> query(
      const std::vector<std::pair<std::string, std::string>>& filter) const;

  /// All (provider handle, outport) pairs compatible with the required
  /// inport. Providers are instances in ACTIVE or SUSPENDED state.
  std::vector<std::pair<Handle, PortSpec>> find_provider(
      const PortSpec& required, const std::set<Handle>& excluded = {}) const;

 private:
  std::map<Handle, ComponentInstance> instances_;
  Handle next_id_ = 1;
};

/// Published property map of one instance: runtime properties plus the
/// reserved keys "name" and "type".
std::map<std::string, std::string> service_properties(const ComponentInstance& inst);

}  // namespace rtcx
