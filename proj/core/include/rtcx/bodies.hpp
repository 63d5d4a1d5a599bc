#pragma once

#include "rtcx/descriptor.hpp"
#include "rtcx/rtsim/container.hpp"

#include <cstdint>
#include <functional>
#include <memory>

namespace rtcx {

using BodyFactory =
    std::function<std::shared_ptr<rtsim::TaskBody>(const ComponentDescriptor&)>;

/// Packs a signed 64-bit latency into two i32 slot elements and back.
void pack_latency(std::int64_t ns, std::int32_t out[2]);
std::int64_t unpack_latency(const std::int32_t in[2]);

/// Maps bincode identifiers to builtin bodies:
///   rtcx.builtin.Calculation — busy-work step that publishes its own
///       scheduling latency on the outport named by property "latport"
///       (default "latdat", Integer size 2).
///   rtcx.builtin.Display     — reads that port and remembers the last value.
///   rtcx.builtin.Noop        — does nothing.
/// Unknown bincodes fall back to the no-op body.
BodyFactory builtin_body_factory();

}  // namespace rtcx
