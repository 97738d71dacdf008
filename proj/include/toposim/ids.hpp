#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

namespace topo {

/// Dense sensor index, assigned row-major on grids.
struct SensorId {
    std::uint32_t value = 0;

    constexpr SensorId() = default;
    constexpr explicit SensorId(std::uint32_t v) : value(v) {}

    auto operator<=>(const SensorId&) const = default;

    friend std::ostream& operator<<(std::ostream& os, SensorId id) { return os << id.value; }
};

/// (origin, event_number): origins never reuse numbers, so pairs are
/// globally unique and double-application of an update is detectable.
struct EventId {
    SensorId origin;
    std::uint32_t event_number = 0;

    auto operator<=>(const EventId&) const = default;

    std::string str() const {
        return std::to_string(origin.value) + ":" + std::to_string(event_number);
    }
};

/// Component identity: the sensor that named the component plus the event
/// that created it. Ordered lexicographically; "lowest ID wins" during
/// merge/split convergence uses exactly this order.
struct ComponentId {
    SensorId owner;
    EventId creating_event;

    auto operator<=>(const ComponentId&) const = default;

    std::string str() const { return std::to_string(owner.value) + ":" + creating_event.str(); }
};

/// Join of the ID semilattice. Associative, commutative, idempotent, which is
/// what makes component-ID convergence independent of delivery order.
inline ComponentId component_id_min(const ComponentId& a, const ComponentId& b) {
    return a < b ? a : b;
}

}  // namespace topo
