#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposim/complex.hpp"
#include "toposim/message.hpp"
#include "toposim/node.hpp"
#include "toposim/triangulation.hpp"

namespace topo {

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Instrumentation
// ---------------------------------------------------------------------------

struct QueryStats {
    SensorId origin;
    bool recompute = false;
    bool interior = false;
    bool completed = false;
    bool blocked = false;

    int probe_tokens = 0;
    int chain_tokens = 0;
    int reports = 0;
    int rejects_to_origin = 0;  // rejected direct probes
    int rejects_other = 0;      // rejections that terminated chains
    int blocks = 0;
    std::vector<std::pair<int, int>> runs;  // (length, path-end tips)

    // Messages the per-run accounting covers: probes that found a
    // representative, every token pass, and the chain-end reports.
    int measured_run_messages() const {
        return probe_tokens - rejects_to_origin + chain_tokens + reports;
    }
    int direct_probes() const { return rejects_to_origin; }
    // Every run costs (length + 4), less one per chain that died on a ring
    // boundary instead of probing a zero node.
    int expected_run_messages() const {
        int sum = 0;
        for (const auto& [len, tips] : runs) sum += len + 4 - tips;
        return sum;
    }
    int plain_formula_messages() const {  // run length + 4, boundary ignored
        int sum = 0;
        for (const auto& [len, tips] : runs) sum += len + 4;
        return sum;
    }
};

struct EventRecord {
    SensorId node;
    int event_type = 0;
    bool positive = false;
    long long delta_beta0 = 0;
    long long delta_beta1 = 0;
    std::string ring_bits;
    int r_c = 0;
    int distinct_comp_ids = 0;
    int self_merge_extra = 0;
    std::optional<EventId> event_id;
    bool upgraded = false;  // split reclassified as self-split by a notice
};

struct SueRecord {
    SensorId node;
    UpdateNumbers payload;
};

struct IntervalReport {
    int interval = 0;
    std::vector<EventRecord> events;
    long long ring_messages = 0;
    long long update_messages = 0;
    long long total_messages = 0;
    int blocked_nodes = 0;
    std::vector<QueryStats> queries;
    std::vector<SueRecord> sues;
    std::vector<std::pair<SensorId, RingQueryResult>> event_queries;
    BettiPair beta_before, beta_after;
    long long active_nodes = 0;
    long long affected_non_event_nodes = 0;  // n_c, measured
    long long id_propagation_messages = 0;   // re-lowering traffic, outside the cost model
    double average_degree = 0.0;             // mean degree over affected regions
    int nominal_degree = 0;                  // |N_s| of the triangulation (6 on hex grids)
    std::optional<bool> oracle_ok;
};

struct InitReport {
    long long messages = 0;
    int bootstrap_events = 0;
};

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

enum class DeliveryOrder : std::uint8_t { Fifo, Shuffled };

struct DeliveryPolicy {
    DeliveryOrder order = DeliveryOrder::Fifo;
    std::uint64_t seed = 0;
};

class Network {
public:
    std::shared_ptr<const Triangulation> tri;
    double theta = 0.5;
    std::vector<SensorState> states;
    int clock = 0;
    long long max_messages = 10'000'000;
    DeliveryPolicy delivery;
    std::ostream* trace = nullptr;
    InitReport init_report;

    const Triangulation& triangulation() const { return *tri; }

    std::vector<bool> active_bits() const {
        std::vector<bool> a(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) a[i] = states[i].binary != 0;
        return a;
    }

    SubComplex subcomplex() const { return SubComplex(*tri, active_bits()); }

    SensorState& state(SensorId id) { return states[id.value]; }
    const SensorState& state(SensorId id) const { return states[id.value]; }

    // engine internals, kept public for tests
    struct Queued {
        Message msg;
        MsgClass cls;
        std::uint64_t query = 0;
    };
    std::deque<Queued> queue;
    std::uint64_t next_query_id = 1;
    std::uint64_t shuffle_state = 0;

    bool queue_empty() const { return queue.empty(); }
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace engine_detail {

struct IntervalScratch {
    std::map<std::uint64_t, QueryStats> stats;
    std::set<SensorId> pending_recomputes;
    std::optional<SensorId> current_recompute;
    std::vector<EventRecord> events;
    std::vector<SueRecord> sues;
    std::set<std::pair<EventId, SensorId>> seen_notices;
    long long ring_messages = 0;
    long long update_messages = 0;
    long long id_propagation = 0;
    long long init_messages = 0;
    long long total = 0;
    std::set<SensorId> update_touched;  // active nodes that saw update traffic
    bool in_init = false;
};

inline std::uint64_t xorshift(std::uint64_t& s) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
}

inline Network::Queued pop_next(Network& net) {
    std::size_t idx = 0;
    if (net.delivery.order == DeliveryOrder::Shuffled && net.queue.size() > 1)
        idx = static_cast<std::size_t>(xorshift(net.shuffle_state) % net.queue.size());
    Network::Queued q = std::move(net.queue[idx]);
    net.queue.erase(net.queue.begin() + static_cast<std::ptrdiff_t>(idx));
    return q;
}

inline void flush_outbox(Network& net, IntervalScratch& sc, Outbox& out) {
    for (auto& item : out.items) {
        if (sc.stats.count(item.query)) {
            auto& st = sc.stats[item.query];
            switch (item.cls) {
                case MsgClass::Probe: ++st.probe_tokens; break;
                case MsgClass::Chain: ++st.chain_tokens; break;
                case MsgClass::Report: ++st.reports; break;
                case MsgClass::Reject:
                    if (item.msg.receiver == st.origin)
                        ++st.rejects_to_origin;
                    else
                        ++st.rejects_other;
                    break;
                case MsgClass::Block: ++st.blocks; break;
                default: break;
            }
        }
        net.queue.push_back(Network::Queued{std::move(item.msg), item.cls, item.query});
    }
    out.items.clear();
}

inline void handle_self_split_notice(IntervalScratch& sc, const Message& msg,
                                     const SelfSplitNotice& notice) {
    const auto key = std::make_pair(notice.event, notice.lowered_from.owner);
    if (sc.seen_notices.count(key)) return;
    sc.seen_notices.insert(key);
    for (auto& ev : sc.events) {
        if (ev.node != msg.receiver || !ev.event_id || *ev.event_id != notice.event) continue;
        if (ev.event_type != 6 && ev.event_type != 8) break;
        if (ev.delta_beta0 <= 0) break;
        ev.delta_beta0 -= 1;
        ev.delta_beta1 -= 1;
        ev.upgraded = true;
        if (ev.delta_beta0 == 0) ev.event_type = 8;
        break;
    }
}

inline void dispatch(Network& net, IntervalScratch& sc, const Network::Queued& qm) {
    ++sc.total;
    if (sc.total > net.max_messages)
        throw ProtocolError("message budget exceeded at interval " + std::to_string(net.clock) +
                            ": likely livelock");
    const Message& msg = qm.msg;
    if (net.trace) *net.trace << trace_line(net.clock, msg) << "\n";
    if (is_ring_kind(msg)) ++sc.ring_messages;
    if (is_update_kind(msg)) ++sc.update_messages;
    if (qm.cls == MsgClass::IdPropagation) ++sc.id_propagation;
    if (std::holds_alternative<CycleInit>(msg.body) ||
        std::holds_alternative<NeighborListExchange>(msg.body))
        ++sc.init_messages;

    SensorState& st = net.state(msg.receiver);
    if (is_update_kind(msg) && st.binary) sc.update_touched.insert(st.id);

    NodeContext ctx{net.tri.get(), net.clock};
    Outbox out;

    if (const auto* notice = std::get_if<SelfSplitNotice>(&msg.body)) {
        handle_self_split_notice(sc, msg, *notice);
        return;
    }
    if (const auto* tok = std::get_if<EventToken>(&msg.body)) {
        handle_event_token(st, ctx, *tok, msg, out);
    } else if (const auto* rej = std::get_if<RingReject>(&msg.body)) {
        handle_ring_reject(st, ctx, *rej, msg, out);
    } else if (const auto* rep = std::get_if<ChainEndReport>(&msg.body)) {
        handle_chain_end(st, ctx, *rep, out);
    } else if (const auto* blk = std::get_if<BlockNotice>(&msg.body)) {
        handle_block_notice(st, *blk, out);
    } else if (const auto* nu = std::get_if<NormalUpdate>(&msg.body)) {
        handle_normal_update(st, ctx, nu->event, nu->delta, msg.body, out);
    } else if (const auto* mu = std::get_if<MergeUpdate>(&msg.body)) {
        handle_merge_update(st, ctx, *mu, msg, out);
    } else if (const auto* su = std::get_if<SplitUpdate>(&msg.body)) {
        handle_split_update(st, ctx, *su, msg, out);
    } else if (const auto* sue = std::get_if<SplitUpdateEvent>(&msg.body)) {
        handle_normal_update(st, ctx, sue->event, sue->delta, msg.body, out);
    }

    if (out.schedule_recompute) sc.pending_recomputes.insert(st.id);
    if (out.query_completed && sc.current_recompute && *sc.current_recompute == st.id) {
        const UpdateNumbers payload = emit_split_update_event(st, ctx, out).second;
        sc.sues.push_back(SueRecord{st.id, payload});
        sc.current_recompute.reset();
    }
    flush_outbox(net, sc, out);
}

inline void drain(Network& net, IntervalScratch& sc) {
    while (!net.queue.empty()) dispatch(net, sc, pop_next(net));
}

inline void start_query(Network& net, IntervalScratch& sc, SensorId node, QueryPurpose purpose) {
    const std::uint64_t qid = net.next_query_id++;
    QueryStats stats;
    stats.origin = node;
    stats.recompute = purpose == QueryPurpose::SplitRecompute;
    stats.interior = net.triangulation().is_interior(node);
    sc.stats[qid] = stats;

    NodeContext ctx{net.tri.get(), net.clock};
    Outbox out;
    start_ring_query(net.state(node), ctx, purpose, qid, out);
    if (out.query_completed)
        sc.stats[qid].completed = true;  // node without unknown positions (never on grids)
    flush_outbox(net, sc, out);
}

inline void finish_query_stats(IntervalScratch& sc, const SensorState& st, std::uint64_t qid) {
    auto& stats = sc.stats[qid];
    if (st.finished_query) {
        stats.completed = true;
        for (const auto& run : st.finished_query->runs)
            stats.runs.emplace_back(static_cast<int>(run.length), run.path_end_tips);
    } else {
        stats.blocked = true;
    }
}

/// Interval-end reset; keeps data a node must serve during the next interval.
inline void interval_end_bookkeeping(Network& net) {
    for (auto& st : net.states) {
        if (st.binary && !(st.n.is_integer() && st.m.is_integer() && st.f.is_integer()))
            throw ProtocolError("non-integral component data at node " +
                                std::to_string(st.id.value) + " after interval " +
                                std::to_string(net.clock) + ": (" + st.n.str() + "," +
                                st.m.str() + "," + st.f.str() + ")");
        st.prev_binary = st.binary;
        if (!st.binary) {
            st.comp_id.reset();
            st.set_info(ComponentInfo{0, 0, 0});
        }
        st.prev_comp_id = st.comp_id;
        st.known_events.clear();
        st.merge_tokens.clear();
        st.split_tokens.clear();
        st.held_tokens.clear();
        st.query.reset();
        st.finished_query.reset();
        st.event_candidate = false;
        st.event_blocked = false;
        st.event_proceeded = false;
        st.event_sign = 0;
        st.own_negative_data.reset();
        st.took_first_new_id = false;
        st.recompute_scheduled = false;
        st.recompute_done = false;
        st.fsm = st.binary ? Fsm::Update : Fsm::Idle;
    }
}

}  // namespace engine_detail

// ---------------------------------------------------------------------------
// Interval execution
// ---------------------------------------------------------------------------

inline IntervalReport run_interval(Network& net, const std::vector<double>& values) {
    using namespace engine_detail;
    if (!net.queue.empty()) throw ProtocolError("interval started with messages in flight");
    if (values.size() != net.states.size())
        throw std::invalid_argument("field does not cover all sensors");

    ++net.clock;
    IntervalScratch sc;
    IntervalReport report;
    report.interval = net.clock;
    report.beta_before = betti(net.subcomplex());

    // Phase 1: synchronized sampling.
    std::vector<SensorId> candidates;
    for (auto& st : net.states) {
        st.fsm = Fsm::Sample;
        st.fi = values[st.id.value];
        const std::uint8_t bin = st.fi >= net.theta ? 1 : 0;
        const Fsm target = sample_transition(st, st.fi, net.theta);
        st.binary = bin;
        st.fsm = target;
        if (target == Fsm::Event) {
            st.event_candidate = true;
            st.event_sign = bin ? 1 : -1;
            st.last_event_interval = net.clock;
            candidates.push_back(st.id);
        }
    }

    // Phase 2: ring queries in ascending sensor order, blocking included.
    for (SensorId c : candidates) {
        const std::uint64_t qid = net.next_query_id;
        start_query(net, sc, c, QueryPurpose::Event);
        drain(net, sc);
        finish_query_stats(sc, net.state(c), qid);
        if (net.state(c).event_blocked) ++report.blocked_nodes;
    }

    // Phase 3: classification and update emission by surviving event nodes.
    for (SensorId c : candidates) {
        SensorState& st = net.state(c);
        if (st.event_blocked || !st.finished_query) continue;
        report.event_queries.emplace_back(c, *st.finished_query);
        Outbox out;
        const EventClassification cls = classify_and_emit(st, out);
        flush_outbox(net, sc, out);
        EventRecord rec;
        rec.node = c;
        rec.event_type = cls.event_type;
        rec.positive = cls.positive;
        rec.delta_beta0 = cls.delta_beta0;
        rec.delta_beta1 = cls.delta_beta1;
        rec.self_merge_extra = cls.self_merge_extra;
        rec.ring_bits = st.neighbor_ring.bits();
        rec.r_c = st.finished_query->analysis.r_c;
        rec.distinct_comp_ids = st.finished_query->distinct_comp_ids;
        rec.event_id = cls.primary_event;
        sc.events.push_back(rec);
    }

    // Phase 4: deliver to quiescence; split recomputations run as they become
    // due, one at a time, each followed by its own flood.
    while (true) {
        drain(net, sc);
        if (sc.pending_recomputes.empty()) break;
        const SensorId r = *sc.pending_recomputes.begin();
        sc.pending_recomputes.erase(sc.pending_recomputes.begin());
        SensorState& st = net.state(r);
        if (!st.binary || st.recompute_done) continue;
        sc.current_recompute = r;
        const std::uint64_t qid = net.next_query_id;
        start_query(net, sc, r, QueryPurpose::SplitRecompute);
        drain(net, sc);
        finish_query_stats(sc, st, qid);
    }

    // Phase 5: bookkeeping and the report.
    report.beta_after = betti(net.subcomplex());
    report.events = sc.events;
    report.sues = sc.sues;
    report.ring_messages = sc.ring_messages;
    report.update_messages = sc.update_messages;
    report.id_propagation_messages = sc.id_propagation;
    report.total_messages = sc.total;
    for (auto& [qid, stats] : sc.stats) report.queries.push_back(stats);
    for (const auto& st : net.states) report.active_nodes += st.binary ? 1 : 0;
    for (const auto& st : net.states)
        report.nominal_degree = std::max(
            report.nominal_degree,
            static_cast<int>(net.triangulation().cyclic_order(st.id).size()));

    long long degree_sum = 0;
    for (SensorId touched : sc.update_touched) {
        // Blocked candidates reverted to plain update nodes; only sensors
        // whose event actually happened stay out of the n_c count.
        if (net.state(touched).event_proceeded) continue;
        ++report.affected_non_event_nodes;
        degree_sum +=
            static_cast<long long>(net.triangulation().cyclic_order(touched).size());
    }
    report.average_degree = report.affected_non_event_nodes
                                ? static_cast<double>(degree_sum) /
                                      static_cast<double>(report.affected_non_event_nodes)
                                : 0.0;

    engine_detail::interval_end_bookkeeping(net);
    return report;
}

// ---------------------------------------------------------------------------
// Network initialization
// ---------------------------------------------------------------------------

namespace engine_detail {

inline bool same_up_to_rotation_reflection(const std::vector<SensorId>& derived,
                                           const std::vector<SensorId>& stored, bool cyclic) {
    if (derived.size() != stored.size()) return false;
    std::vector<SensorId> fwd = derived;
    std::vector<SensorId> rev(derived.rbegin(), derived.rend());
    if (!cyclic) return fwd == stored || rev == stored;
    const std::size_t k = stored.size();
    for (const auto& base : {fwd, rev}) {
        for (std::size_t r = 0; r < k; ++r) {
            bool ok = true;
            for (std::size_t i = 0; i < k && ok; ++i) ok = base[(r + i) % k] == stored[i];
            if (ok) return true;
        }
    }
    return false;
}

/// Walks a cycle message around one node's neighborhood: every hop moves to
/// the next neighbor shared with the initiator.
struct WalkResult {
    std::vector<SensorId> path;
    bool closed = false;
    long long messages = 0;
};

inline WalkResult run_cycle_walk(Network& net, SensorId initiator, SensorId start,
                                 std::optional<SensorId> avoid) {
    const auto& tri = net.triangulation();
    WalkResult wr;
    wr.path.push_back(start);
    ++wr.messages;  // initiator -> start
    if (net.trace)
        *net.trace << trace_line(0, Message{initiator, start, CycleInit{initiator, wr.path}})
                   << "\n";
    std::optional<SensorId> prev;
    SensorId cur = start;
    for (std::size_t guard = 0; guard <= tri.cyclic_order(initiator).size() + 1; ++guard) {
        const auto& shared = tri.shared_neighbors(cur, initiator);
        std::optional<SensorId> next;
        for (SensorId s : shared) {
            if (prev && s == *prev) continue;
            if (!prev && avoid && s == *avoid) continue;
            if (!next || s < *next) next = s;
        }
        if (!next) break;
        if (*next == wr.path.front()) {
            wr.closed = true;
            break;
        }
        ++wr.messages;  // cur -> next carries the token
        if (net.trace)
            *net.trace << trace_line(0, Message{cur, *next, CycleInit{initiator, wr.path}})
                       << "\n";
        wr.path.push_back(*next);
        prev = cur;
        cur = *next;
    }
    ++wr.messages;  // report back to the initiator
    if (net.trace)
        *net.trace << trace_line(
                          0, Message{cur, initiator, CycleInit{initiator, wr.path, true, wr.closed}})
                   << "\n";
    return wr;
}

}  // namespace engine_detail

/// Distributed init: neighbor-list exchange, per-node cycle walks building
/// each ring order (checked against the triangulation), then component
/// bootstrap by replaying every initially active sensor as a positive event
/// in ascending sensor order.
inline Network init_network(std::shared_ptr<const Triangulation> tri,
                            const std::vector<double>& initial_values, double theta,
                            std::ostream* trace = nullptr) {
    using namespace engine_detail;
    Network net;
    net.tri = std::move(tri);
    net.theta = theta;
    net.trace = trace;
    const auto& t = net.triangulation();
    if (initial_values.size() != t.vertex_count())
        throw std::invalid_argument("initial field does not cover all sensors");

    net.states.resize(t.vertex_count());
    for (std::size_t i = 0; i < t.vertex_count(); ++i) {
        net.states[i].id = SensorId(static_cast<std::uint32_t>(i));
        net.states[i].fsm = Fsm::Init;
    }

    // Neighbor-list exchange: both endpoints of every edge learn their shared
    // neighbors; we verify the outcome matches the embedding.
    for (const auto& st : net.states) {
        for (SensorId w : t.cyclic_order(st.id)) {
            ++net.init_report.messages;
            if (net.trace)
                *net.trace << trace_line(
                                  0, Message{st.id, w,
                                             NeighborListExchange{t.cyclic_order(st.id)}})
                           << "\n";
            std::vector<SensorId> shared;
            for (SensorId x : t.cyclic_order(w))
                if (x != st.id && t.adjacent(x, st.id)) shared.push_back(x);
            std::sort(shared.begin(), shared.end());
            if (shared != t.shared_neighbors(st.id, w))
                throw ProtocolError("neighbor exchange disagrees with the embedding");
        }
    }

    // Cycle walks.
    for (const auto& st : net.states) {
        const auto& ring = t.cyclic_order(st.id);
        if (ring.size() == 1) continue;  // trivial ring, nothing to order
        SensorId start = *std::min_element(ring.begin(), ring.end());
        WalkResult w1 = run_cycle_walk(net, st.id, start, std::nullopt);
        net.init_report.messages += w1.messages;
        std::vector<SensorId> derived = w1.path;
        if (!w1.closed && derived.size() < ring.size()) {
            const std::optional<SensorId> avoid =
                derived.size() > 1 ? std::optional<SensorId>(derived[1]) : std::nullopt;
            WalkResult w2 = run_cycle_walk(net, st.id, start, avoid);
            net.init_report.messages += w2.messages;
            std::vector<SensorId> combined(w2.path.rbegin(), w2.path.rend());
            combined.insert(combined.end(), derived.begin() + 1, derived.end());
            derived = std::move(combined);
        }
        if (t.is_interior(st.id) && !w1.closed)
            throw ProtocolError("cycle message failed to close on interior sensor " +
                                std::to_string(st.id.value));
        if (!same_up_to_rotation_reflection(derived, ring, t.is_interior(st.id)))
            throw ProtocolError("protocol ring order of sensor " + std::to_string(st.id.value) +
                                " does not match the embedding");
    }

    // Bootstrap: replay initially active sensors as scripted positive events.
    std::vector<SensorId> initial;
    for (std::size_t i = 0; i < initial_values.size(); ++i)
        if (initial_values[i] >= theta) initial.push_back(SensorId(static_cast<std::uint32_t>(i)));

    int bootstrap_step = 0;
    for (SensorId v : initial) {
        IntervalScratch sc;
        sc.in_init = true;
        SensorState& st = net.state(v);
        st.fi = initial_values[v.value];
        st.binary = 1;
        st.event_candidate = true;
        st.event_sign = 1;
        st.last_event_interval = -(++bootstrap_step);  // unique, never collides

        const std::uint64_t qid = net.next_query_id;
        start_query(net, sc, v, QueryPurpose::Event);
        drain(net, sc);
        finish_query_stats(sc, st, qid);
        if (!st.finished_query) throw ProtocolError("bootstrap query failed");

        Outbox out;
        classify_and_emit(st, out);
        flush_outbox(net, sc, out);
        drain(net, sc);
        net.init_report.messages += sc.total;
        ++net.init_report.bootstrap_events;

        for (auto& s : net.states) {
            s.prev_binary = s.binary;
            s.prev_comp_id = s.comp_id;
            s.known_events.clear();
            s.merge_tokens.clear();
            s.split_tokens.clear();
            s.held_tokens.clear();
            s.query.reset();
            s.finished_query.reset();
            s.event_candidate = false;
            s.event_proceeded = false;
            s.event_sign = 0;
            s.took_first_new_id = false;
        }
    }

    for (auto& st : net.states) {
        st.fi = initial_values[st.id.value];
        st.fsm = st.binary ? Fsm::Update : Fsm::Idle;
    }
    return net;
}

}  // namespace topo
