#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposim/complex.hpp"
#include "toposim/message.hpp"
#include "toposim/rational.hpp"
#include "toposim/ring.hpp"
#include "toposim/triangulation.hpp"

namespace topo {

enum class Fsm : std::uint8_t { Init, Sample, Event, Idle, Update };

constexpr int kNeverStamp = std::numeric_limits<int>::min();

// ---------------------------------------------------------------------------
// Ring query bookkeeping
// ---------------------------------------------------------------------------

struct ChainEnds {
    std::optional<SensorId> last;
    SensorId second_last;
};

struct QueryRun {
    SensorId representative;
    std::size_t rep_pos = 0;
    std::size_t length = 0;
    int path_end_tips = 0;
    ComponentInfo info;
    std::optional<ComponentId> comp;
    std::array<ChainEnds, 2> ends;
};

struct RingQueryState {
    std::uint64_t id = 0;
    QueryPurpose purpose = QueryPurpose::Event;

    std::vector<int> known;  // -1 unknown, else 0/1 per ring position
    std::size_t covered = 0;
    std::size_t cursor = 0;
    std::optional<std::size_t> pending_probe;

    struct PendingRun {
        std::size_t rep_pos = 0;
        SensorId rep;
        int reports = 0;
        std::array<ChainEndReport, 2> received;
    };
    std::optional<PendingRun> run;

    std::vector<QueryRun> runs;
    std::set<SensorId> positives;
    std::map<SensorId, NegativeEventData> negative_roles;
};

struct RingQueryResult {
    NeighborRing ring;
    RingAnalysis analysis;
    std::vector<QueryRun> runs;
    int distinct_comp_ids = 0;
    std::set<SensorId> positives;
    std::map<SensorId, NegativeEventData> negative_roles;
};

// ---------------------------------------------------------------------------
// Sensor state
// ---------------------------------------------------------------------------

struct TokenHold {
    SensorId from;    // who handed over the token; the origin for a representative
    SensorId origin;  // querying node
    int timestamp = 0;
    bool is_rep = false;
    QueryPurpose purpose = QueryPurpose::Event;
    std::optional<SensorId> first_hop;  // for mid-chain nodes: the chain's launch target
    std::vector<SensorId> positives;    // accumulated through this node
};

struct SensorState {
    SensorId id;
    Fsm fsm = Fsm::Init;

    double fi = 0.0;
    std::uint8_t binary = 0;
    std::uint8_t prev_binary = 0;

    Rational n, m, f;  // component information, exact
    std::optional<ComponentId> comp_id;
    std::optional<ComponentId> prev_comp_id;

    std::uint32_t event_counter = 0;
    std::set<EventId> known_events;
    std::set<ComponentId> merge_tokens;
    std::set<ComponentId> split_tokens;
    int last_event_interval = kNeverStamp;

    // Interval-scoped event bookkeeping.
    bool event_candidate = false;
    bool event_blocked = false;
    bool event_proceeded = false;
    int event_sign = 0;  // +1 / -1 while a candidate
    std::optional<NegativeEventData> own_negative_data;
    bool took_first_new_id = false;
    bool recompute_scheduled = false;
    bool recompute_done = false;

    std::optional<RingQueryState> query;
    std::optional<RingQueryResult> finished_query;
    std::map<std::uint64_t, TokenHold> held_tokens;
    NeighborRing neighbor_ring;

    ComponentInfo info_int() const { return {n.as_integer(), m.as_integer(), f.as_integer()}; }
    bool is_positive_event() const { return event_proceeded && event_sign > 0; }

    void set_info(const ComponentInfo& i) { n = i.n; m = i.m; f = i.f; }
    void add_delta(const UpdateNumbers& d) { n += d.dn; m += d.dm; f += d.df; }
};

struct NodeContext {
    const Triangulation* tri = nullptr;
    int interval = 0;
};

enum class MsgClass : std::uint8_t {
    Init,
    Probe,
    Chain,
    Report,
    Reject,
    Block,
    Update,
    IdPropagation  // component-ID re-lowering traffic and self-split notices
};

struct Outbox {
    struct Item {
        Message msg;
        MsgClass cls;
        std::uint64_t query = 0;
    };
    std::vector<Item> items;

    bool blocked_self = false;        // own event query was aborted
    bool query_completed = false;     // result now in state.finished_query
    bool schedule_recompute = false;  // ask the engine to queue phase-2 work

    void send(SensorId from, SensorId to, MessageBody body, MsgClass cls, std::uint64_t q = 0) {
        items.push_back(Item{Message{from, to, std::move(body)}, cls, q});
    }
};

// ---------------------------------------------------------------------------
// Event classification
// ---------------------------------------------------------------------------

struct EventClassification {
    int event_type = 0;  // 1..9
    bool positive = false;
    long long delta_beta0 = 0;
    long long delta_beta1 = 0;
    int self_merge_extra = 0;  // positive delta_beta1 carried by a merge node
    std::optional<EventId> primary_event;  // filled by classify_and_emit
};

/// Decision diagram over the neighbor-ring: empty ring -> (1,2); full cyclic
/// ring -> (4,3); several ring components -> merge/self-merge for positive
/// events, split (indistinguishable from self-split) for negative ones; a
/// single partial run -> invariance.
inline EventClassification classify_event(bool positive, const RingQueryResult& q, bool cyclic) {
    EventClassification c;
    c.positive = positive;
    const int rc = q.analysis.r_c;
    if (rc == 0) {
        c.event_type = positive ? 1 : 2;
        c.delta_beta0 = positive ? 1 : -1;
    } else if (q.analysis.full_cycle && cyclic) {
        c.event_type = positive ? 4 : 3;
        c.delta_beta1 = positive ? -1 : 1;
    } else if (rc >= 2) {
        if (positive) {
            const int ids = q.distinct_comp_ids;
            if (ids >= 2) {
                c.event_type = 5;
                c.delta_beta0 = -(ids - 1);
                c.delta_beta1 = rc - ids;
                c.self_merge_extra = rc - ids;
            } else {
                c.event_type = 7;
                c.delta_beta1 = rc - 1;
            }
        } else {
            // Split; a later SelfSplitNotice may turn this into type 8.
            c.event_type = 6;
            c.delta_beta0 = rc - 1;
        }
    } else {
        c.event_type = 9;
    }
    return c;
}

/// (dn, dm, df) an event node adds to its surrounding component; df uses the
/// true outer-edge count, which exceeds e_new - r_c by one on full cyclic
/// rings.
inline UpdateNumbers compute_local_deltas(bool positive, const RingAnalysis& a) {
    const std::int64_t s = positive ? 1 : -1;
    return UpdateNumbers{Rational(s), Rational(s * a.inner_edges()),
                         Rational(s * a.outer_edges())};
}

/// Sample-state transition: a changed binary value means an event; otherwise
/// idle or update depending on the new value.
inline Fsm sample_transition(const SensorState& st, double new_fi, double theta) {
    const std::uint8_t bin = new_fi >= theta ? 1 : 0;
    if (bin != st.prev_binary) return Fsm::Event;
    return bin ? Fsm::Update : Fsm::Idle;
}

// ---------------------------------------------------------------------------
// Ring query driver (state machine at the querying node)
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t ring_pos_of(const NodeContext& ctx, SensorId self, SensorId neighbor) {
    const auto& ring = ctx.tri->cyclic_order(self);
    for (std::size_t i = 0; i < ring.size(); ++i)
        if (ring[i] == neighbor) return i;
    throw std::logic_error("sensor " + std::to_string(neighbor.value) + " not adjacent to " +
                           std::to_string(self.value));
}

inline void mark_known(RingQueryState& q, std::size_t pos, int value) {
    if (q.known[pos] < 0) {
        q.known[pos] = value;
        ++q.covered;
    }
}

inline void send_next_probe(SensorState& st, const NodeContext& ctx, Outbox& out) {
    auto& q = *st.query;
    const auto& ring = ctx.tri->cyclic_order(st.id);
    const std::size_t k = ring.size();
    for (std::size_t step = 0; step < k && q.covered < k; ++step) {
        const std::size_t pos = q.cursor;
        if (q.known[pos] >= 0) {
            q.cursor = (q.cursor + 1) % k;
            continue;
        }
        q.pending_probe = pos;
        out.send(st.id, ring[pos],
                 EventToken{st.id, st.last_event_interval, q.id, q.purpose, true, std::nullopt,
                            {}},
                 MsgClass::Probe, q.id);
        return;
    }
    RingQueryResult res;
    res.ring.cyclic = ctx.tri->is_interior(st.id);
    for (std::size_t i = 0; i < k; ++i)
        res.ring.entries.push_back(static_cast<std::uint8_t>(q.known[i] == 1));
    res.analysis = analyze_ring(res.ring);
    res.runs = q.runs;
    res.positives = q.positives;
    res.negative_roles = q.negative_roles;
    std::set<ComponentId> ids;
    for (const auto& r : res.runs)
        if (r.comp) ids.insert(*r.comp);
    res.distinct_comp_ids = static_cast<int>(ids.size());
    st.neighbor_ring = res.ring;
    st.finished_query = std::move(res);
    st.query.reset();
    out.query_completed = true;
}

inline void record_role(RingQueryState& q, const std::optional<NegativeEventData>& role) {
    if (role && (role->normal_event || role->split_event)) q.negative_roles[role->node] = *role;
}

inline void integrate_chain_end(SensorState& st, const NodeContext& ctx,
                                const ChainEndReport& rep, Outbox& out) {
    auto& q = *st.query;
    if (!q.run) return;  // stale
    auto& pr = *q.run;
    pr.received[pr.reports] = rep;
    if (++pr.reports < 2) return;

    const bool cyclic = ctx.tri->is_interior(st.id);
    const std::size_t k = ctx.tri->cyclic_order(st.id).size();

    // Each chain covers the positions from the representative toward its
    // first hop up to the reported tip; the run is the union of both sides.
    // Tokens collide only when every ring sensor took one, so a cycle-closed
    // end means the run is the entire ring (a lapping chain can even collide
    // back at the representative, where tip arithmetic would undercount).
    const bool ring_closed = pr.received[0].cause == ChainEndCause::CycleClosed ||
                             pr.received[1].cause == ChainEndCause::CycleClosed;
    std::set<std::size_t> covered{pr.rep_pos};
    if (ring_closed)
        for (std::size_t i = 0; i < k; ++i) covered.insert(i);
    const auto cover_side = [&](const ChainEndReport& r) {
        if (ring_closed || !r.first_hop) return;  // nothing further to infer
        const std::size_t hop = ring_pos_of(ctx, st.id, *r.first_hop);
        const std::size_t tip = r.last ? ring_pos_of(ctx, st.id, *r.last) : pr.rep_pos;
        long long dir;
        if (cyclic)
            dir = ((pr.rep_pos + 1) % k == hop) ? 1 : -1;
        else
            dir = (hop == pr.rep_pos + 1) ? 1 : -1;
        std::size_t p = pr.rep_pos;
        for (std::size_t guard = 0; guard < k && p != tip; ++guard) {
            p = static_cast<std::size_t>((static_cast<long long>(p) + dir +
                                          static_cast<long long>(k)) %
                                         static_cast<long long>(k));
            covered.insert(p);
        }
    };

    QueryRun run;
    run.representative = pr.rep;
    run.rep_pos = pr.rep_pos;
    for (int i = 0; i < 2; ++i) {
        const auto& r = pr.received[i];
        cover_side(r);
        run.ends[i] = ChainEnds{r.last, r.second_last};
        if (r.cause == ChainEndCause::PathEnd) ++run.path_end_tips;
        if (r.cause == ChainEndCause::ZeroNode && r.terminator_role)
            mark_known(q, ring_pos_of(ctx, st.id, r.terminator_role->node), 0);
        record_role(q, r.terminator_role);
        for (SensorId p : r.positive_members) q.positives.insert(p);
    }
    run.length = covered.size();
    for (std::size_t pos : covered) mark_known(q, pos, 1);
    run.info = pr.received[0].reporter_info;
    run.comp = pr.received[0].reporter_comp;
    q.runs.push_back(std::move(run));
    q.run.reset();
    send_next_probe(st, ctx, out);
}

}  // namespace detail

inline void start_ring_query(SensorState& st, const NodeContext& ctx, QueryPurpose purpose,
                             std::uint64_t query_id, Outbox& out) {
    RingQueryState q;
    q.id = query_id;
    q.purpose = purpose;
    q.known.assign(ctx.tri->cyclic_order(st.id).size(), -1);
    st.query = std::move(q);
    st.finished_query.reset();
    detail::send_next_probe(st, ctx, out);
}

// ---------------------------------------------------------------------------
// Ring protocol handlers
// ---------------------------------------------------------------------------

inline void handle_event_token(SensorState& st, const NodeContext& ctx, const EventToken& tok,
                               const Message& msg, Outbox& out) {
    // Event-region reduction: same stamp, higher querying ID loses.
    if (tok.purpose == QueryPurpose::Event && st.last_event_interval == tok.timestamp &&
        tok.origin > st.id) {
        out.send(st.id, tok.origin, BlockNotice{tok.query}, MsgClass::Block, tok.query);
        return;
    }

    const bool active = tok.purpose == QueryPurpose::Event ? st.prev_binary != 0 : st.binary != 0;
    if (!active) {
        std::optional<NegativeEventData> role;
        if (st.own_negative_data)
            role = st.own_negative_data;
        else
            role = NegativeEventData{st.id, false, false, 0, 0};
        out.send(st.id, msg.sender, RingReject{tok.query, role}, MsgClass::Reject, tok.query);
        return;
    }

    // Component data only means something while the network is at its
    // previous-state values; recompute queries run mid-update.
    const auto make_report = [&](std::optional<SensorId> last, SensorId second, ChainEndCause why,
                                 std::optional<SensorId> first_hop,
                                 std::vector<SensorId> positives) {
        ChainEndReport rep;
        rep.query = tok.query;
        rep.last = last;
        rep.second_last = second;
        rep.cause = why;
        rep.first_hop = first_hop;
        if (tok.purpose == QueryPurpose::Event) {
            rep.reporter_info = st.info_int();
            rep.reporter_comp = st.comp_id;
        }
        rep.positive_members = std::move(positives);
        return rep;
    };

    if (st.held_tokens.count(tok.query)) {
        // Second token of the same query: the cyclic ring closed.
        auto positives = tok.positive_members;
        if (st.is_positive_event()) positives.push_back(st.id);
        out.send(st.id, tok.origin,
                 make_report(st.id, msg.sender, ChainEndCause::CycleClosed, tok.first_hop,
                             std::move(positives)),
                 MsgClass::Report, tok.query);
        return;
    }

    std::vector<SensorId> pos_acc = tok.positive_members;
    if (st.is_positive_event()) pos_acc.push_back(st.id);
    st.held_tokens[tok.query] = TokenHold{msg.sender,   tok.origin, tok.timestamp,
                                          tok.probe,    tok.purpose, tok.first_hop,
                                          pos_acc};

    const auto& shared = ctx.tri->shared_neighbors(st.id, tok.origin);
    const auto pass = [&](SensorId to, std::optional<SensorId> first_hop) {
        out.send(st.id, to,
                 EventToken{tok.origin, tok.timestamp, tok.query, tok.purpose, false, first_hop,
                            pos_acc},
                 MsgClass::Chain, tok.query);
    };

    if (tok.probe) {
        // Representative: one chain per neighbor shared with the origin; a
        // missing side (origin's ring is a path ending here) reports at once.
        const auto path_end = [&]() {
            out.send(st.id, tok.origin,
                     make_report(std::nullopt, st.id, ChainEndCause::PathEnd, std::nullopt,
                                 pos_acc),
                     MsgClass::Report, tok.query);
        };
        if (shared.empty()) {
            path_end();
            path_end();
        } else {
            for (SensorId s : shared) pass(s, s);
            if (shared.size() == 1) path_end();
        }
    } else {
        std::optional<SensorId> next;
        for (SensorId s : shared)
            if (s != msg.sender) next = s;
        if (next)
            pass(*next, tok.first_hop);
        else
            out.send(st.id, tok.origin,
                     make_report(st.id, msg.sender, ChainEndCause::PathEnd, tok.first_hop,
                                 pos_acc),
                     MsgClass::Report, tok.query);
    }
}

inline void handle_ring_reject(SensorState& st, const NodeContext& ctx, const RingReject& rej,
                               const Message& msg, Outbox& out) {
    if (st.query && st.query->id == rej.query) {
        // A direct probe came back rejected.
        auto& q = *st.query;
        if (q.pending_probe) {
            detail::mark_known(q, *q.pending_probe, 0);
            q.pending_probe.reset();
        }
        detail::record_role(q, rej.role);
        detail::send_next_probe(st, ctx, out);
        return;
    }
    const auto it = st.held_tokens.find(rej.query);
    if (it == st.held_tokens.end()) return;  // stale reply of an aborted query
    const TokenHold& hold = it->second;

    ChainEndReport rep;
    rep.query = rej.query;
    rep.cause = ChainEndCause::ZeroNode;
    if (hold.purpose == QueryPurpose::Event) {
        rep.reporter_info = st.info_int();
        rep.reporter_comp = st.comp_id;
    }
    rep.positive_members = hold.positives;
    rep.terminator_role = rej.role;
    if (hold.is_rep) {
        rep.last = std::nullopt;  // the chain never left the representative
        rep.second_last = st.id;
        rep.first_hop = msg.sender;  // the launch target was the rejecting zero node
    } else {
        rep.last = st.id;
        rep.second_last = hold.from;
        rep.first_hop = hold.first_hop;
    }
    out.send(st.id, hold.origin, rep, MsgClass::Report, rej.query);
}

inline void handle_chain_end(SensorState& st, const NodeContext& ctx, const ChainEndReport& rep,
                             Outbox& out) {
    if (!st.query || st.query->id != rep.query) return;  // stale
    auto& q = *st.query;
    if (q.pending_probe) {
        // First sign of life from the probed representative.
        RingQueryState::PendingRun pr;
        pr.rep_pos = *q.pending_probe;
        pr.rep = ctx.tri->cyclic_order(st.id)[pr.rep_pos];
        q.run = pr;
        q.pending_probe.reset();
    }
    detail::integrate_chain_end(st, ctx, rep, out);
}

inline void handle_block_notice(SensorState& st, const BlockNotice& notice, Outbox& out) {
    if (!st.query || st.query->id != notice.query) return;
    // Abort: the freshly sampled value is discarded, previous state kept; the
    // node retries next interval if the value still differs.
    st.query.reset();
    st.finished_query.reset();
    st.binary = st.prev_binary;
    st.fsm = st.binary ? Fsm::Update : Fsm::Idle;
    st.event_blocked = true;
    st.event_proceeded = false;
    out.blocked_self = true;
}

// ---------------------------------------------------------------------------
// Update application
// ---------------------------------------------------------------------------

namespace detail {

inline void forward_to_all(SensorState& st, const NodeContext& ctx, const MessageBody& body,
                           Outbox& out) {
    for (SensorId w : ctx.tri->cyclic_order(st.id)) out.send(st.id, w, body, MsgClass::Update);
}

/// First merge/split ID of the interval is adopted outright; afterwards only
/// lower values win. Returns the displaced ID on a re-lowering.
inline std::optional<ComponentId> adopt_new_id(SensorState& st, const ComponentId& incoming) {
    if (!st.took_first_new_id) {
        st.took_first_new_id = true;
        st.comp_id = incoming;
        return std::nullopt;
    }
    if (st.comp_id && incoming < *st.comp_id) {
        const ComponentId old = *st.comp_id;
        st.comp_id = incoming;
        return old;
    }
    return std::nullopt;
}

}  // namespace detail

inline void handle_normal_update(SensorState& st, const NodeContext& ctx, const EventId& ev,
                                 const UpdateNumbers& delta, const MessageBody& body,
                                 Outbox& out) {
    if (!st.binary) return;
    if (st.known_events.count(ev)) return;
    st.known_events.insert(ev);
    st.add_delta(delta);
    detail::forward_to_all(st, ctx, body, out);
}

inline void handle_merge_update(SensorState& st, const NodeContext& ctx, const MergeUpdate& mu,
                                const Message& msg, Outbox& out) {
    if (!st.binary) return;
    detail::adopt_new_id(st, mu.new_id);  // new IDs are processed even on known events
    if (st.known_events.count(mu.event)) return;
    st.known_events.insert(mu.event);
    detail::forward_to_all(st, ctx, msg.body, out);
    // Numbers only if this node was not part of the carried component and that
    // component has not been merged in already.
    if (st.prev_comp_id == mu.target) return;
    if (st.merge_tokens.count(mu.target)) return;
    st.merge_tokens.insert(mu.target);
    st.add_delta(mu.delta);
}

inline void handle_split_update(SensorState& st, const NodeContext& ctx, const SplitUpdate& su,
                                const Message& msg, Outbox& out) {
    if (!st.binary) return;
    const bool known = st.known_events.count(su.event) > 0;
    const auto replaced = detail::adopt_new_id(st, su.new_id);
    if (known && replaced && replaced->owner == st.id) {
        // Re-lowered after already handling this split: both sides are still
        // connected, which is a self-split. Tell the event node.
        out.send(st.id, su.event.origin, SelfSplitNotice{su.event, *replaced},
                 MsgClass::IdPropagation);
    }
    if (known) {
        if (replaced) {  // spread the lower ID onward
            for (SensorId w : ctx.tri->cyclic_order(st.id))
                out.send(st.id, w, msg.body, MsgClass::IdPropagation);
        }
        return;
    }
    st.known_events.insert(su.event);
    detail::forward_to_all(st, ctx, msg.body, out);
    if (!st.split_tokens.count(su.target)) {
        st.split_tokens.insert(su.target);
        st.add_delta(su.delta);
    }
    // Phase two: only nodes of the region that split recompute their numbers.
    if (st.prev_comp_id && su.target == *st.prev_comp_id && !st.recompute_scheduled &&
        !st.recompute_done) {
        st.recompute_scheduled = true;
        out.schedule_recompute = true;
    }
}

// ---------------------------------------------------------------------------
// Event emission (after a completed event query)
// ---------------------------------------------------------------------------

inline EventId consume_event_id(SensorState& st) {
    const EventId e{st.id, st.event_counter++};
    st.known_events.insert(e);
    return e;
}

/// Runs the decision diagram and spreads the matching update messages.
/// Returns the classification for the engine's event log.
inline EventClassification classify_and_emit(SensorState& st, Outbox& out) {
    const RingQueryResult& q = *st.finished_query;
    const bool positive = st.event_sign > 0;
    EventClassification cls = classify_event(positive, q, q.ring.cyclic);
    const UpdateNumbers delta = compute_local_deltas(positive, q.analysis);
    st.event_proceeded = true;

    switch (cls.event_type) {
        case 1: {  // region appearance: no neighbors, own ID
            const EventId e = consume_event_id(st);
            cls.primary_event = e;
            st.comp_id = ComponentId{st.id, e};
            st.took_first_new_id = true;
            st.set_info(ComponentInfo{1, 0, 0});
            break;
        }
        case 2:  // region disappearance: nothing to send, data cleared later
            break;
        case 4:
        case 9:
        case 3: {
            if (!positive) {
                st.own_negative_data = NegativeEventData{
                    st.id, true, false, q.analysis.inner_edges(), q.analysis.outer_edges()};
            }
            const EventId e = consume_event_id(st);
            cls.primary_event = e;
            const auto& run = q.runs.front();
            out.send(st.id, run.representative, NormalUpdate{e, delta}, MsgClass::Update);
            if (positive) {
                // Assume the surrounding component's identity and numbers.
                st.comp_id = run.comp;
                if (run.comp) st.merge_tokens.insert(*run.comp);
                st.set_info(run.info);
                st.add_delta(delta);
            }
            break;
        }
        case 5: {
            const EventId base = consume_event_id(st);
            cls.primary_event = base;
            const ComponentId new_id{st.id, base};
            std::set<ComponentId> surrounding;
            ComponentInfo sum;
            std::map<ComponentId, ComponentInfo> comp_infos;
            for (const auto& run : q.runs)
                if (run.comp && !comp_infos.count(*run.comp)) comp_infos[*run.comp] = run.info;
            for (const auto& [cid, info] : comp_infos) {
                surrounding.insert(cid);
                sum += info;
            }
            st.merge_tokens = surrounding;
            for (const auto& run : q.runs) {
                for (const auto& [cid, info] : comp_infos) {
                    if (run.comp && cid == *run.comp) continue;
                    const EventId e = consume_event_id(st);
                    out.send(st.id, run.representative,
                             MergeUpdate{e,
                                         UpdateNumbers{Rational(info.n), Rational(info.m),
                                                       Rational(info.f)},
                                         cid, new_id},
                             MsgClass::Update);
                }
                out.send(st.id, run.representative, NormalUpdate{base, delta}, MsgClass::Update);
            }
            st.comp_id = new_id;
            st.took_first_new_id = true;
            st.set_info(sum);
            st.add_delta(delta);
            break;
        }
        case 7: {
            const EventId e = consume_event_id(st);
            cls.primary_event = e;
            for (const auto& run : q.runs)
                out.send(st.id, run.representative, NormalUpdate{e, delta}, MsgClass::Update);
            const auto& run = q.runs.front();
            st.comp_id = run.comp;
            if (run.comp) st.merge_tokens.insert(*run.comp);
            st.set_info(run.info);
            st.add_delta(delta);
            break;
        }
        case 6: {
            st.own_negative_data = NegativeEventData{st.id, false, true,
                                                     q.analysis.inner_edges(),
                                                     q.analysis.outer_edges()};
            const EventId e = consume_event_id(st);
            cls.primary_event = e;
            const ComponentInfo prev = st.info_int();
            const ComponentId target = st.prev_comp_id.value();
            for (const auto& run : q.runs) {
                out.send(st.id, run.representative,
                         SplitUpdate{e,
                                     UpdateNumbers{Rational(-prev.n), Rational(-prev.m),
                                                   Rational(-prev.f)},
                                     target, ComponentId{run.representative, e}},
                         MsgClass::Update);
            }
            break;
        }
        default:
            throw std::logic_error("unclassifiable event");
    }
    return cls;
}

// ---------------------------------------------------------------------------
// Split recomputation (phase two of a split update)
// ---------------------------------------------------------------------------

/// Fractional recount: one vertex, half of each edge, a third of each face.
/// Edges and faces touching a positive event node are skipped (that node
/// already reported them whole); a vanished negative normal event neighbor
/// gets its over-subtracted share re-added, spread over its live neighbors.
inline UpdateNumbers compute_recompute_payload(const SensorState& st, const NodeContext& ctx,
                                               const RingQueryResult& q) {
    const auto& ring_ids = ctx.tri->cyclic_order(st.id);
    const std::size_t k = ring_ids.size();
    const auto active = [&](std::size_t pos) { return q.ring.entries[pos] != 0; };
    const auto positive = [&](std::size_t pos) {
        return active(pos) && q.positives.count(ring_ids[pos]) > 0;
    };

    int positive_neighbors = 0;
    for (std::size_t i = 0; i < k; ++i) positive_neighbors += positive(i);

    Rational dn(1);
    Rational dm(q.analysis.e_new - positive_neighbors, 2);

    int countable_pairs = 0;
    const std::size_t pairs = q.ring.cyclic ? k : (k > 0 ? k - 1 : 0);
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t a = i, b = (i + 1) % k;
        if (!active(a) || !active(b)) continue;
        if (positive(a) || positive(b)) continue;
        ++countable_pairs;
    }
    Rational df(countable_pairs, 3);

    for (const auto& entry : q.negative_roles) {
        const NegativeEventData& role = entry.second;
        if (!role.normal_event) continue;  // the split reset covered split event nodes
        dn += Rational(1, role.inner_edges);
        dm += Rational(1);
        df += Rational(role.outer_edges, role.inner_edges);
    }
    return UpdateNumbers{dn, dm, df};
}

/// Phase two of a split: flood the recount as a plain update to everyone.
inline std::pair<EventId, UpdateNumbers> emit_split_update_event(SensorState& st,
                                                                 const NodeContext& ctx,
                                                                 Outbox& out) {
    const UpdateNumbers payload = compute_recompute_payload(st, ctx, *st.finished_query);
    const EventId e = consume_event_id(st);
    st.add_delta(payload);  // own share; the node never processes its own flood
    for (SensorId w : ctx.tri->cyclic_order(st.id))
        out.send(st.id, w, SplitUpdateEvent{e, payload}, MsgClass::Update);
    st.recompute_done = true;
    st.recompute_scheduled = false;
    return {e, payload};
}

}  // namespace topo
