#pragma once

#include "rtcx/resolver.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rtcx {

using ResolvingServiceFactory = std::function<std::unique_ptr<ResolvingService>()>;

/// Registers a resolving-service implementation under a name so it can be
/// selected from configuration (e.g. the --resolver flag).
void register_resolving_service(const std::string& name, ResolvingServiceFactory factory);

/// Instantiates a registered service; throws std::invalid_argument for an
/// unknown name. Built-ins: "accept-all", "reject-all".
std::unique_ptr<ResolvingService> make_resolving_service(const std::string& name);

std::vector<std::string> resolving_service_names();

}  // namespace rtcx
