#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <optional>
#include <vector>

#include "toposim/node.hpp"

using namespace topo;

namespace {

RingQueryResult make_result(std::initializer_list<int> bits, bool cyclic,
                            std::vector<ComponentId> run_ids = {}) {
    RingQueryResult r;
    for (int b : bits) r.ring.entries.push_back(static_cast<std::uint8_t>(b));
    r.ring.cyclic = cyclic;
    r.analysis = analyze_ring(r.ring);
    for (std::size_t i = 0; i < run_ids.size(); ++i) {
        QueryRun run;
        run.representative = SensorId(static_cast<std::uint32_t>(100 + i));
        run.comp = run_ids[i];
        r.runs.push_back(run);
    }
    std::set<ComponentId> distinct(run_ids.begin(), run_ids.end());
    r.distinct_comp_ids = static_cast<int>(distinct.size());
    return r;
}

ComponentId cid(std::uint32_t owner) {
    return ComponentId{SensorId(owner), EventId{SensorId(owner), 0}};
}

SensorState active_state(std::uint32_t id, ComponentInfo info, ComponentId c) {
    SensorState st;
    st.id = SensorId(id);
    st.binary = st.prev_binary = 1;
    st.set_info(info);
    st.comp_id = c;
    st.prev_comp_id = c;
    return st;
}

}  // namespace

TEST_CASE("sample transitions") {
    SensorState st;
    st.prev_binary = 0;
    CHECK(sample_transition(st, 1.0, 0.5) == Fsm::Event);  // 0 -> 1
    CHECK(sample_transition(st, 0.0, 0.5) == Fsm::Idle);   // stays 0
    st.prev_binary = 1;
    CHECK(sample_transition(st, 1.0, 0.5) == Fsm::Update);  // stays 1
    CHECK(sample_transition(st, 0.0, 0.5) == Fsm::Event);   // 1 -> 0
}

TEST_CASE("local deltas") {
    // Negative event with 4 inner and 3 outer edges.
    auto a = analyze_ring(NeighborRing{{1, 1, 1, 1, 0, 0}, true});
    CHECK(a.e_new == 4);
    CHECK(a.outer_edges() == 3);
    auto d = compute_local_deltas(false, a);
    CHECK(d.dn == Rational(-1));
    CHECK(d.dm == Rational(-4));
    CHECK(d.df == Rational(-3));

    // Isolated appearance.
    d = compute_local_deltas(true, analyze_ring(NeighborRing{{0, 0, 0, 0, 0, 0}, true}));
    CHECK(d.dn == Rational(1));
    CHECK(d.dm == Rational(0));
    CHECK(d.df == Rational(0));

    // Filling a hole: the full cyclic 6-ring has 6 outer edges, not 5.
    d = compute_local_deltas(true, analyze_ring(NeighborRing{{1, 1, 1, 1, 1, 1}, true}));
    CHECK(d.dn == Rational(1));
    CHECK(d.dm == Rational(6));
    CHECK(d.df == Rational(6));
}

TEST_CASE("event decision diagram") {
    auto c = classify_event(true, make_result({0, 0, 0, 0, 0, 0}, true), true);
    CHECK(c.event_type == 1);
    CHECK(c.delta_beta0 == 1);
    c = classify_event(false, make_result({0, 0, 0, 0, 0, 0}, true), true);
    CHECK(c.event_type == 2);
    CHECK(c.delta_beta0 == -1);

    c = classify_event(false, make_result({1, 1, 1, 1, 1, 1}, true, {cid(3)}), true);
    CHECK(c.event_type == 3);
    CHECK(c.delta_beta0 == 0);
    CHECK(c.delta_beta1 == 1);
    c = classify_event(true, make_result({1, 1, 1, 1, 1, 1}, true, {cid(3)}), true);
    CHECK(c.event_type == 4);
    CHECK(c.delta_beta1 == -1);

    // A boundary node with an all-ones path ring cannot see holes.
    c = classify_event(false, make_result({1, 1, 1}, false, {cid(3)}), false);
    CHECK(c.event_type == 9);

    c = classify_event(true, make_result({1, 1, 0, 1, 1, 0}, true, {cid(2), cid(5)}), true);
    CHECK(c.event_type == 5);
    CHECK(c.delta_beta0 == -1);
    CHECK(c.delta_beta1 == 0);

    // Combined merge/self-merge: three runs, two from the same region.
    c = classify_event(true, make_result({1, 0, 1, 0, 1, 0}, true, {cid(2), cid(5), cid(2)}),
                       true);
    CHECK(c.event_type == 5);
    CHECK(c.delta_beta0 == -1);
    CHECK(c.delta_beta1 == 1);
    CHECK(c.self_merge_extra == 1);

    c = classify_event(true, make_result({1, 1, 0, 1, 1, 0}, true, {cid(7), cid(7)}), true);
    CHECK(c.event_type == 7);
    CHECK(c.delta_beta0 == 0);
    CHECK(c.delta_beta1 == 1);

    c = classify_event(false, make_result({1, 1, 0, 1, 1, 0}, true, {cid(7), cid(7)}), true);
    CHECK(c.event_type == 6);
    CHECK(c.delta_beta0 == 1);
    CHECK(c.delta_beta1 == 0);

    c = classify_event(true, make_result({1, 1, 0, 0, 0, 0}, true, {cid(7)}), true);
    CHECK(c.event_type == 9);
    CHECK(c.delta_beta0 == 0);
    CHECK(c.delta_beta1 == 0);
}

TEST_CASE("normal update application is idempotent and sign-correct") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    auto st = active_state(4, {12, 24, 13}, cid(2));
    const NormalUpdate nu{EventId{SensorId(8), 0},
                          UpdateNumbers{Rational(-1), Rational(-4), Rational(-3)}};
    Message msg{SensorId(3), SensorId(4), nu};
    Outbox out;
    handle_normal_update(st, ctx, nu.event, nu.delta, msg.body, out);
    CHECK(st.info_int() == ComponentInfo{11, 20, 10});
    CHECK(out.items.size() == tri.cyclic_order(SensorId(4)).size());

    Outbox out2;
    handle_normal_update(st, ctx, nu.event, nu.delta, msg.body, out2);
    CHECK(st.info_int() == ComponentInfo{11, 20, 10});  // duplicate dropped
    CHECK(out2.items.empty());
}

TEST_CASE("zero nodes drop updates silently") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    SensorState st;
    st.id = SensorId(4);
    st.binary = 0;
    const NormalUpdate nu{EventId{SensorId(8), 0},
                          UpdateNumbers{Rational(1), Rational(0), Rational(0)}};
    Outbox out;
    handle_normal_update(st, ctx, nu.event, nu.delta, MessageBody{nu}, out);
    CHECK(out.items.empty());
    CHECK(st.n == Rational(0));
}

TEST_CASE("merge updates: target gating and merge tokens") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    const auto A = cid(2), B = cid(5);

    // A node of region A receives B's numbers exactly once, even via two
    // different merge event nodes.
    auto st = active_state(4, {3, 2, 0}, A);
    MergeUpdate m1{EventId{SensorId(7), 1}, UpdateNumbers{Rational(5), Rational(7), Rational(3)},
                   B, cid(7)};
    MergeUpdate m2{EventId{SensorId(8), 1}, UpdateNumbers{Rational(5), Rational(7), Rational(3)},
                   B, cid(8)};
    Outbox out;
    handle_merge_update(st, ctx, m1, Message{SensorId(3), SensorId(4), m1}, out);
    CHECK(st.info_int() == ComponentInfo{8, 9, 3});
    handle_merge_update(st, ctx, m2, Message{SensorId(3), SensorId(4), m2}, out);
    CHECK(st.info_int() == ComponentInfo{8, 9, 3});  // merge token blocked the repeat

    // A node of region B must not add B's own numbers but adopts the ID.
    auto stb = active_state(5, {5, 7, 3}, B);
    Outbox outb;
    handle_merge_update(stb, ctx, m1, Message{SensorId(3), SensorId(5), m1}, outb);
    CHECK(stb.info_int() == ComponentInfo{5, 7, 3});
    CHECK(stb.comp_id == cid(7));

    // A lower ID replaces the first even when the event is already known.
    Outbox outc;
    MergeUpdate m1_low{m1.event, m1.delta, B, cid(1)};
    handle_merge_update(stb, ctx, m1_low, Message{SensorId(3), SensorId(5), m1_low}, outc);
    CHECK(stb.comp_id == cid(1));
    CHECK(outc.items.empty());  // known event: numbers and forwarding skipped
}

TEST_CASE("order independence of a fixed update multiset") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    const auto A = cid(2), B = cid(5), C = cid(6);

    std::vector<Message> msgs;
    msgs.push_back(Message{SensorId(0), SensorId(4),
                           NormalUpdate{EventId{SensorId(8), 0},
                                        UpdateNumbers{Rational(1), Rational(2), Rational(1)}}});
    msgs.push_back(Message{SensorId(0), SensorId(4),
                           MergeUpdate{EventId{SensorId(7), 1},
                                       UpdateNumbers{Rational(5), Rational(7), Rational(3)}, B,
                                       cid(7)}});
    msgs.push_back(Message{SensorId(0), SensorId(4),
                           MergeUpdate{EventId{SensorId(6), 2},
                                       UpdateNumbers{Rational(4), Rational(5), Rational(2)}, C,
                                       cid(6)}});
    msgs.push_back(Message{SensorId(0), SensorId(4),
                           NormalUpdate{EventId{SensorId(8), 0},
                                        UpdateNumbers{Rational(1), Rational(2), Rational(1)}}});

    std::optional<ComponentInfo> expect_info;
    std::optional<ComponentId> expect_id;
    std::vector<std::size_t> order{0, 1, 2, 3};
    do {
        auto st = active_state(4, {3, 2, 0}, A);
        for (std::size_t i : order) {
            Outbox out;
            const auto& msg = msgs[i];
            if (const auto* nu = std::get_if<NormalUpdate>(&msg.body))
                handle_normal_update(st, ctx, nu->event, nu->delta, msg.body, out);
            else if (const auto* mu = std::get_if<MergeUpdate>(&msg.body))
                handle_merge_update(st, ctx, *mu, msg, out);
        }
        if (!expect_info) {
            expect_info = st.info_int();
            expect_id = st.comp_id;
        }
        CHECK(st.info_int() == *expect_info);
        CHECK(st.comp_id == *expect_id);
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(*expect_info == ComponentInfo{3 + 1 + 5 + 4, 2 + 2 + 7 + 5, 0 + 1 + 3 + 2});
    CHECK(*expect_id == cid(6));  // lowest of the two spread IDs
}

TEST_CASE("split updates: token, recompute scheduling, self-split notice") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    const auto P = cid(2);
    const EventId split_ev{SensorId(9), 4};

    auto st = active_state(4, {12, 24, 13}, P);
    SplitUpdate s54{split_ev, UpdateNumbers{Rational(-12), Rational(-24), Rational(-13)}, P,
                    cid(54)};
    Outbox out;
    handle_split_update(st, ctx, s54, Message{SensorId(3), SensorId(4), s54}, out);
    CHECK(st.info_int() == ComponentInfo{0, 0, 0});
    CHECK(st.comp_id == cid(54));
    CHECK(out.schedule_recompute);

    // Same split via the other representative: numbers blocked by the split
    // token, but the lower ID still propagates.
    SplitUpdate s26{split_ev, UpdateNumbers{Rational(-12), Rational(-24), Rational(-13)}, P,
                    cid(26)};
    Outbox out2;
    handle_split_update(st, ctx, s26, Message{SensorId(5), SensorId(4), s26}, out2);
    CHECK(st.info_int() == ComponentInfo{0, 0, 0});
    CHECK(st.comp_id == cid(26));
    CHECK(!out2.items.empty());  // the ID change is spread onward

    // The displaced owner itself reports the self-split.
    auto owner = active_state(8, {12, 24, 13}, P);
    owner.id = SensorId(8);
    SplitUpdate s8{split_ev, UpdateNumbers{Rational(-12), Rational(-24), Rational(-13)}, P,
                   cid(8)};
    Outbox out3;
    handle_split_update(owner, ctx, s8, Message{SensorId(3), SensorId(8), s8}, out3);
    CHECK(owner.comp_id == cid(8));
    SplitUpdate s1{split_ev, UpdateNumbers{Rational(-12), Rational(-24), Rational(-13)}, P,
                   cid(1)};
    Outbox out4;
    handle_split_update(owner, ctx, s1, Message{SensorId(3), SensorId(8), s1}, out4);
    CHECK(owner.comp_id == cid(1));
    bool notice = false;
    for (const auto& item : out4.items)
        if (std::holds_alternative<SelfSplitNotice>(item.msg.body)) {
            notice = true;
            CHECK(item.msg.receiver == split_ev.origin);
        }
    CHECK(notice);
}

TEST_CASE("newly joined positive node skips its own component's merge payload") {
    const auto tri = Triangulation::hex_grid(3, 3);
    NodeContext ctx{&tri, 1};
    const auto A = cid(2), B = cid(5);
    auto st = active_state(4, {4, 4, 1}, A);
    st.prev_comp_id.reset();   // inactive before this interval
    st.merge_tokens.insert(A);  // self-counted surroundings
    MergeUpdate ma{EventId{SensorId(7), 1}, UpdateNumbers{Rational(3), Rational(2), Rational(0)},
                   A, cid(7)};
    MergeUpdate mb{EventId{SensorId(7), 2}, UpdateNumbers{Rational(5), Rational(7), Rational(3)},
                   B, cid(7)};
    Outbox out;
    handle_merge_update(st, ctx, ma, Message{SensorId(3), SensorId(4), ma}, out);
    CHECK(st.info_int() == ComponentInfo{4, 4, 1});  // own region blocked by the token
    handle_merge_update(st, ctx, mb, Message{SensorId(3), SensorId(4), mb}, out);
    CHECK(st.info_int() == ComponentInfo{9, 11, 4});  // other region applied
}

TEST_CASE("split recompute payload") {
    const auto tri = Triangulation::hex_grid(5, 5);
    NodeContext ctx{&tri, 2};
    SensorState st;
    st.id = SensorId(12);  // interior, 6 neighbors
    st.binary = 1;

    // Full active ring, no event neighbors: (1, 3, 2).
    RingQueryResult q = make_result({1, 1, 1, 1, 1, 1}, true);
    auto p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dn == Rational(1));
    CHECK(p.dm == Rational(3));
    CHECK(p.df == Rational(2));

    // Single active neighbor: half an edge.
    q = make_result({1, 0, 0, 0, 0, 0}, true);
    p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dn == Rational(1));
    CHECK(p.dm == Rational(1, 2));
    CHECK(p.df == Rational(0));

    // Two adjacent active neighbors: two half-edges and a third of a face.
    q = make_result({1, 1, 0, 0, 0, 0}, true);
    p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dm == Rational(1));
    CHECK(p.df == Rational(1, 3));

    // A positive event neighbor is excluded from edge and face shares.
    q = make_result({1, 1, 0, 0, 0, 0}, true);
    q.positives.insert(tri.cyclic_order(SensorId(12))[0]);
    p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dm == Rational(1, 2));
    CHECK(p.df == Rational(0));

    // A vanished negative normal event neighbor re-adds its share.
    q = make_result({1, 1, 0, 0, 0, 0}, true);
    const SensorId gone = tri.cyclic_order(SensorId(12))[3];
    q.negative_roles[gone] = NegativeEventData{gone, true, false, 4, 3};
    p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dn == Rational(1) + Rational(1, 4));
    CHECK(p.dm == Rational(2));
    CHECK(p.df == Rational(1, 3) + Rational(3, 4));

    // Split event neighbors contribute nothing extra.
    q = make_result({1, 1, 0, 0, 0, 0}, true);
    q.negative_roles[gone] = NegativeEventData{gone, false, true, 4, 3};
    p = compute_recompute_payload(st, ctx, q);
    CHECK(p.dm == Rational(1));
    CHECK(p.df == Rational(1, 3));
}
