#include "rtcx/resolving_service.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace rtcx {

namespace {

class AcceptAll final : public ResolvingService {
 public:
  bool on_admit(const ComponentInstance&, const Registry&) override { return true; }
};

class RejectAll final : public ResolvingService {
 public:
  bool on_admit(const ComponentInstance&, const Registry&) override { return false; }
};

struct FactoryTable {
  std::mutex mu;
  std::map<std::string, ResolvingServiceFactory> factories;

  FactoryTable() {
    factories["accept-all"] = [] { return std::make_unique<AcceptAll>(); };
    factories["reject-all"] = [] { return std::make_unique<RejectAll>(); };
  }
};

FactoryTable& table() {
  static FactoryTable t;
  return t;
}

}  // namespace

void register_resolving_service(const std::string& name, ResolvingServiceFactory factory) {
  auto& t = table();
  std::lock_guard lock(t.mu);
  t.factories[name] = std::move(factory);
}

std::unique_ptr<ResolvingService> make_resolving_service(const std::string& name) {
  auto& t = table();
  std::lock_guard lock(t.mu);
  auto it = t.factories.find(name);
  if (it == t.factories.end())
    throw std::invalid_argument("unknown resolving service: " + name);
  return it->second();
}

std::vector<std::string> resolving_service_names() {
  auto& t = table();
  std::lock_guard lock(t.mu);
  std::vector<std::string> names;
  names.reserve(t.factories.size());
  for (const auto& [name, factory] : t.factories) names.push_back(name);
  return names;
}

}  // namespace rtcx
