#include "rtcx/registry.hpp"

#include "rtcx/resolver.hpp"

namespace rtcx {

std::string_view to_string(RegistryError::Code c) {
  switch (c) {
    case RegistryError::Code::DuplicateName: return "duplicate-name";
    case RegistryError::Code::UnknownId: return "unknown-id";
    case RegistryError::Code::StillActive: return "still-active";
  }
  return "registry-error";
}

RegistryError::RegistryError(Code code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

ComponentInstance& Registry::add(const ComponentDescriptor& d) {
  if (find_by_name(d.name) != kNoHandle)
    throw RegistryError(RegistryError::Code::DuplicateName, d.name);
  ComponentInstance inst;
  inst.id = next_id_++;
  inst.descriptor = d;
  inst.state = LifecycleState::Registered;
  inst.enabled = d.enabled;
  for (const auto& p : d.properties) inst.properties[p.name] = p.value;
  auto [it, inserted] = instances_.emplace(inst.id, std::move(inst));
  return it->second;
}

void Registry::remove(Handle id) {
  auto it = instances_.find(id);
  if (it == instances_.end())
    throw RegistryError(RegistryError::Code::UnknownId, std::to_string(id));
  if (it->second.provides())
    throw RegistryError(RegistryError::Code::StillActive, it->second.descriptor.name);
  instances_.erase(it);
}

ComponentInstance& Registry::at(Handle id) {
  auto it = instances_.find(id);
  if (it == instances_.end())
    throw RegistryError(RegistryError::Code::UnknownId, std::to_string(id));
  return it->second;
}

const ComponentInstance& Registry::at(Handle id) const {
  auto it = instances_.find(id);
  if (it == instances_.end())
    throw RegistryError(RegistryError::Code::UnknownId, std::to_string(id));
  return it->second;
}

Handle Registry::find_by_name(std::string_view name) const {
  for (const auto& [id, inst] : instances_)
    if (inst.descriptor.name == name) return id;
  return kNoHandle;
}

std::map<std::string, std::string> service_properties(const ComponentInstance& inst) {
  auto props = inst.properties;
  props["name"] = inst.descriptor.name;
  props["type"] = std::string(to_string(inst.descriptor.task_type));
  return props;
}

std::vector<ServiceRecord> Registry::query(
    const std::vector<std::pair<std::string, std::string>>& filter) const {
  std::vector<ServiceRecord> out;
  for (const auto& [id, inst] : instances_) {
    if (inst.state != LifecycleState::Satisfied && !inst.provides()) continue;
    auto props = service_properties(inst);
    bool match = true;
    for (const auto& [key, value] : filter) {
      auto it = props.find(key);
      if (it == props.end() || it->second != value) {
        match = false;
        break;
      }
    }
    if (match) out.push_back(ServiceRecord{id, std::move(props)});
  }
  return out;
}

std::vector<std::pair<Handle, PortSpec>> Registry::find_provider(
    const PortSpec& required, const std::set<Handle>& excluded) const {
  std::vector<std::pair<Handle, PortSpec>> out;
  for (const auto& [id, inst] : instances_) {
    if (!inst.provides() || excluded.count(id)) continue;
    for (const auto& port : inst.descriptor.outports)
      if (ports_compatible(required, port)) out.emplace_back(id, port);
  }
  return out;
}

}  // namespace rtcx
