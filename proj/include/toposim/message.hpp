#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toposim/complex.hpp"
#include "toposim/ids.hpp"
#include "toposim/rational.hpp"

namespace topo {

enum class QueryPurpose : std::uint8_t { Event, SplitRecompute };

// ---------------------------------------------------------------------------
// Init protocol
// ---------------------------------------------------------------------------

struct CycleInit {
    SensorId initiator;
    std::vector<SensorId> path;  // walked so far, first element = start neighbor
    bool reply = false;          // walk result heading back to the initiator
    bool closed = false;         // the walk returned to its start
};

struct NeighborListExchange {
    std::vector<SensorId> neighbors;
};

// ---------------------------------------------------------------------------
// Ring query protocol
// ---------------------------------------------------------------------------

struct EventToken {
    SensorId origin;           // querying node
    int timestamp = 0;         // origin's last event interval
    std::uint64_t query = 0;   // unique per ring query
    QueryPurpose purpose = QueryPurpose::Event;
    bool probe = false;        // direct probe from the origin vs chain pass
    // The representative's neighbor this chain was launched toward; the origin
    // uses it to mark the run's positions without ambiguity.
    std::optional<SensorId> first_hop;
    // Positive event nodes the token has visited; recompute queries need them
    // for edge/face share corrections.
    std::vector<SensorId> positive_members;
};

enum class ChainEndCause : std::uint8_t { ZeroNode, CycleClosed, PathEnd };

/// What an inactive node knows about its own event this interval; served to
/// split-recompute queries so they can re-add a vanished neighbor's share.
struct NegativeEventData {
    SensorId node;
    bool normal_event = false;  // negative event that spread a normal update
    bool split_event = false;
    int inner_edges = 0;
    int outer_edges = 0;
};

struct ChainEndReport {
    std::uint64_t query = 0;
    std::optional<SensorId> last;  // absent: the chain never left its first node
    SensorId second_last;
    ChainEndCause cause = ChainEndCause::ZeroNode;
    std::optional<SensorId> first_hop;  // where this chain left the representative
    ComponentInfo reporter_info;
    std::optional<ComponentId> reporter_comp;
    std::vector<SensorId> positive_members;
    // Role data of the zero node that terminated the chain, if any.
    std::optional<NegativeEventData> terminator_role;
};

struct RingReject {
    std::uint64_t query = 0;
    std::optional<NegativeEventData> role;
};

struct BlockNotice {
    std::uint64_t query = 0;
};

// ---------------------------------------------------------------------------
// Region updates
// ---------------------------------------------------------------------------

struct UpdateNumbers {
    Rational dn, dm, df;
};

struct NormalUpdate {
    EventId event;
    UpdateNumbers delta;
};

struct MergeUpdate {
    EventId event;
    UpdateNumbers delta;      // numbers of the component `target`
    ComponentId target;       // which merged-in component these numbers are
    ComponentId new_id;       // owned by the merge event node
};

struct SplitUpdate {
    EventId event;
    UpdateNumbers delta;      // previous surrounding component, negated
    ComponentId target;       // the component that split
    ComponentId new_id;       // owned by the ring component's representative
};

struct SplitUpdateEvent {
    EventId event;
    UpdateNumbers delta;      // fractional recount share
};

struct SelfSplitNotice {
    EventId event;            // the split event being reclassified
    ComponentId lowered_from;
};

using MessageBody = std::variant<CycleInit, NeighborListExchange, EventToken, ChainEndReport,
                                 RingReject, BlockNotice, NormalUpdate, MergeUpdate, SplitUpdate,
                                 SplitUpdateEvent, SelfSplitNotice>;

struct Message {
    SensorId sender;
    SensorId receiver;
    MessageBody body;
};

inline bool is_update_kind(const Message& m) {
    return std::holds_alternative<NormalUpdate>(m.body) ||
           std::holds_alternative<MergeUpdate>(m.body) ||
           std::holds_alternative<SplitUpdate>(m.body) ||
           std::holds_alternative<SplitUpdateEvent>(m.body) ||
           std::holds_alternative<SelfSplitNotice>(m.body);
}

inline bool is_ring_kind(const Message& m) {
    return std::holds_alternative<EventToken>(m.body) ||
           std::holds_alternative<ChainEndReport>(m.body) ||
           std::holds_alternative<RingReject>(m.body) ||
           std::holds_alternative<BlockNotice>(m.body);
}

inline const char* kind_name(const Message& m) {
    struct Namer {
        const char* operator()(const CycleInit&) { return "CycleInit"; }
        const char* operator()(const NeighborListExchange&) { return "NeighborListExchange"; }
        const char* operator()(const EventToken&) { return "EventToken"; }
        const char* operator()(const ChainEndReport&) { return "ChainEndReport"; }
        const char* operator()(const RingReject&) { return "RingReject"; }
        const char* operator()(const BlockNotice&) { return "BlockNotice"; }
        const char* operator()(const NormalUpdate&) { return "NormalUpdate"; }
        const char* operator()(const MergeUpdate&) { return "MergeUpdate"; }
        const char* operator()(const SplitUpdate&) { return "SplitUpdate"; }
        const char* operator()(const SplitUpdateEvent&) { return "SplitUpdateEvent"; }
        const char* operator()(const SelfSplitNotice&) { return "SelfSplitNotice"; }
    };
    return std::visit(Namer{}, m.body);
}

/// One trace line per message:
/// interval,kind,sender,receiver,event_origin,event_number,dn,dm,df,target,new_id
/// with empty fields where a message kind has no such slot.
inline std::string trace_line(int interval, const Message& m) {
    std::string eid_origin, eid_num, dn, dm, df, target, new_id;
    const auto fill_update = [&](const EventId& e, const UpdateNumbers& u) {
        eid_origin = std::to_string(e.origin.value);
        eid_num = std::to_string(e.event_number);
        dn = u.dn.str();
        dm = u.dm.str();
        df = u.df.str();
    };
    if (const auto* n = std::get_if<NormalUpdate>(&m.body)) {
        fill_update(n->event, n->delta);
    } else if (const auto* g = std::get_if<MergeUpdate>(&m.body)) {
        fill_update(g->event, g->delta);
        target = g->target.str();
        new_id = g->new_id.str();
    } else if (const auto* s = std::get_if<SplitUpdate>(&m.body)) {
        fill_update(s->event, s->delta);
        target = s->target.str();
        new_id = s->new_id.str();
    } else if (const auto* e = std::get_if<SplitUpdateEvent>(&m.body)) {
        fill_update(e->event, e->delta);
    } else if (const auto* n = std::get_if<SelfSplitNotice>(&m.body)) {
        eid_origin = std::to_string(n->event.origin.value);
        eid_num = std::to_string(n->event.event_number);
        target = n->lowered_from.str();
    }
    std::string line = std::to_string(interval);
    for (const std::string& field :
         {std::string(kind_name(m)), std::to_string(m.sender.value),
          std::to_string(m.receiver.value), eid_origin, eid_num, dn, dm, df, target, new_id})
        line += "," + field;
    return line;
}

}  // namespace topo
