#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "toposim/complex.hpp"
#include "toposim/triangulation.hpp"

using namespace topo;

namespace {

// Independent adjacency oracle: hex-cell centers as plane points (odd rows
// shifted right by half a cell), adjacent iff at unit center distance. Knows
// nothing about the ring construction in Triangulation.
bool oracle_adjacent(int rows, int cols, int a, int b) {
    const auto xy = [cols](int id) {
        const int r = id / cols, c = id % cols;
        const double x = c + 0.5 * (r & 1);
        const double y = r * std::sqrt(3.0) / 2.0;
        return std::pair{x, y};
    };
    (void)rows;
    const auto [xa, ya] = xy(a);
    const auto [xb, yb] = xy(b);
    const double d2 = (xa - xb) * (xa - xb) + (ya - yb) * (ya - yb);
    return a != b && d2 < 1.1;
}

// Brute-force triangle enumeration over an explicit edge set.
std::set<std::array<SensorId, 3>> brute_force_3cliques(const Triangulation& t) {
    std::set<std::array<SensorId, 3>> tris;
    const int n = static_cast<int>(t.vertex_count());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (!t.adjacent(SensorId(a), SensorId(b))) continue;
            for (int c = b + 1; c < n; ++c)
                if (t.adjacent(SensorId(a), SensorId(c)) && t.adjacent(SensorId(b), SensorId(c)))
                    tris.insert({SensorId(a), SensorId(b), SensorId(c)});
        }
    return tris;
}

// GF(2) homology oracle: beta1 = dim(cycle space) - rank(triangle boundary).
long long gf2_beta1(const SubComplex& sub) {
    const auto& t = sub.triangulation();
    std::vector<Edge> act_edges;
    for (const auto& e : t.edges())
        if (sub.active(e.first) && sub.active(e.second)) act_edges.push_back(e);
    std::map<Edge, std::size_t> col;
    for (std::size_t i = 0; i < act_edges.size(); ++i) col[act_edges[i]] = i;

    std::vector<std::vector<std::uint64_t>> rows;
    const std::size_t words = (act_edges.size() + 63) / 64;
    for (const auto& tri3 : t.triangles()) {
        if (!(sub.active(tri3[0]) && sub.active(tri3[1]) && sub.active(tri3[2]))) continue;
        std::vector<std::uint64_t> row(words, 0);
        const std::array<Edge, 3> es = {make_edge(tri3[0], tri3[1]), make_edge(tri3[0], tri3[2]),
                                        make_edge(tri3[1], tri3[2])};
        for (const auto& e : es) {
            const std::size_t c = col.at(e);
            row[c / 64] ^= (std::uint64_t{1} << (c % 64));
        }
        rows.push_back(std::move(row));
    }

    // Gaussian elimination over GF(2).
    std::size_t rank = 0;
    for (std::size_t c = 0; c < act_edges.size() && rank < rows.size(); ++c) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && !((rows[pivot][c / 64] >> (c % 64)) & 1)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == rank) continue;
            if ((rows[i][c / 64] >> (c % 64)) & 1)
                for (std::size_t w = 0; w < words; ++w) rows[i][w] ^= rows[rank][w];
        }
        ++rank;
    }

    const auto comps = components_with_counts(sub);
    long long n = 0;
    for (const auto& c : comps) n += c.info.n;
    const long long m = static_cast<long long>(act_edges.size());
    const long long k = static_cast<long long>(comps.size());
    return (m - n + k) - static_cast<long long>(rank);
}

std::vector<bool> random_active(std::size_t n, std::mt19937& rng, double p) {
    std::vector<bool> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (rng() % 1000) < p * 1000;
    return a;
}

}  // namespace

TEST_CASE("2x2 hex grid matches the unit-distance oracle") {
    // Derive expected counts from the oracle alone.
    int oracle_edges = 0, oracle_tris = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            if (oracle_adjacent(2, 2, a, b)) ++oracle_edges;
            for (int c = b + 1; c < 4; ++c)
                if (oracle_adjacent(2, 2, a, b) && oracle_adjacent(2, 2, a, c) &&
                    oracle_adjacent(2, 2, b, c))
                    ++oracle_tris;
        }
    CHECK(oracle_edges == 5);
    CHECK(oracle_tris == 2);

    const auto t = Triangulation::hex_grid(2, 2);
    CHECK(t.vertex_count() == 4);
    CHECK(t.edge_count() == 5);
    CHECK(t.triangles().size() == 2);
}

TEST_CASE("hex grid adjacency equals unit-distance adjacency") {
    for (const auto& [rows, cols] : {std::pair{3, 3}, {4, 7}, {6, 5}}) {
        const auto t = Triangulation::hex_grid(rows, cols);
        const int n = rows * cols;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                CHECK(t.adjacent(SensorId(a), SensorId(b)) == oracle_adjacent(rows, cols, a, b));
    }
}

TEST_CASE("3x3 grid degrees: all in 2..6, center has 6") {
    const auto t = Triangulation::hex_grid(3, 3);
    for (std::uint32_t v = 0; v < 9; ++v) {
        const auto deg = t.cyclic_order(SensorId(v)).size();
        CHECK(deg >= 2);
        CHECK(deg <= 6);
    }
    CHECK(t.cyclic_order(SensorId(4)).size() == 6);
    CHECK(t.is_interior(SensorId(4)));
    CHECK(t.is_boundary(SensorId(0)));
}

TEST_CASE("Whitney consistency: faces equal brute-force 3-cliques") {
    for (const auto& [rows, cols] : {std::pair{2, 2}, {3, 3}, {5, 8}, {10, 10}, {15, 15}}) {
        const auto t = Triangulation::hex_grid(rows, cols);
        const auto oracle = brute_force_3cliques(t);
        std::set<std::array<SensorId, 3>> faces(t.triangles().begin(), t.triangles().end());
        CHECK(faces == oracle);
    }
}

TEST_CASE("cyclic orders are consecutive-adjacent") {
    const auto t = Triangulation::hex_grid(6, 6);
    for (std::uint32_t v = 0; v < 36; ++v) {
        const auto& ring = t.cyclic_order(SensorId(v));
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) CHECK(t.adjacent(ring[i], ring[i + 1]));
        if (t.is_interior(SensorId(v))) {
            CHECK(ring.size() == 6);
            CHECK(t.adjacent(ring.back(), ring.front()));
        } else if (ring.size() > 2) {
            CHECK(!t.adjacent(ring.back(), ring.front()));
        }
    }
}

TEST_CASE("grid construction rejects degenerate sizes") {
    CHECK_THROWS(Triangulation::hex_grid(1, 5));
    CHECK_THROWS(Triangulation::hex_grid(5, 1));
}

TEST_CASE("threshold_subcomplex basics") {
    const auto t = Triangulation::hex_grid(3, 3);
    std::vector<double> vals(9, 0.0);

    auto sub = threshold_subcomplex(t, vals, 0.5);
    CHECK(sub.active_count() == 0);
    CHECK(components_with_counts(sub).empty());
    CHECK(betti(sub) == BettiPair{0, 0});

    vals.assign(9, 1.0);
    sub = threshold_subcomplex(t, vals, 0.5);
    CHECK(sub.active_count() == 9);

    vals.assign(9, 0.0);
    vals[4] = 0.7;
    sub = threshold_subcomplex(t, vals, 0.5);
    CHECK(sub.active_count() == 1);
    const auto comps = components_with_counts(sub);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].info == ComponentInfo{1, 0, 0});

    CHECK_THROWS(threshold_subcomplex(t, std::vector<double>(4, 0.0), 0.5));
}

TEST_CASE("two isolated actives give two (1,0,0) components") {
    const auto t = Triangulation::hex_grid(3, 3);
    std::vector<bool> act(9, false);
    act[0] = act[8] = true;
    const SubComplex sub(t, act);
    const auto comps = components_with_counts(sub);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].info == ComponentInfo{1, 0, 0});
    CHECK(comps[1].info == ComponentInfo{1, 0, 0});
}

// Reconstruction of the eight-vertex region with one hole: a hexagon ring
// around inactive center 12, one filled triangle hanging off it, and a
// pendant vertex.
TEST_CASE("hole region: (n,m,f)=(8,9,1), beta=(1,1), chi=0") {
    const auto t = Triangulation::hex_grid(5, 5);
    std::vector<bool> act(25, false);
    for (int v : {13, 7, 6, 11, 16, 17, 8, 4}) act[v] = true;
    const SubComplex sub(t, act);

    const auto comps = components_with_counts(sub);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].info == ComponentInfo{8, 9, 1});

    const auto b = betti(sub);
    CHECK(b.beta0 == 1);
    CHECK(b.beta1 == -8 + 9 - 1 + 1);
    CHECK(euler_characteristic(sub) == 0);
    CHECK(euler_characteristic(sub) == b.beta0 - b.beta1);
}

TEST_CASE("single vertex and filled triangle Euler characteristics") {
    const auto t = Triangulation::hex_grid(3, 3);
    std::vector<bool> act(9, false);
    act[4] = true;
    CHECK(euler_characteristic(SubComplex(t, act)) == 1);

    // 3, 4, 7 are mutually adjacent on the 3x3 grid (row 1 is offset right).
    act.assign(9, false);
    act[3] = act[4] = act[7] = true;
    const SubComplex sub(t, act);
    const auto comps = components_with_counts(sub);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].info == ComponentInfo{3, 3, 1});
    CHECK(euler_characteristic(sub) == 1);
}

TEST_CASE("trees have beta = (1, 0)") {
    const auto t = Triangulation::hex_grid(4, 4);
    std::vector<bool> act(16, false);
    for (int v : {0, 1, 2, 3}) act[v] = true;  // a path along the top row
    const SubComplex sub(t, act);
    const auto comps = components_with_counts(sub);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].info == ComponentInfo{4, 3, 0});
    CHECK(betti(sub) == BettiPair{1, 0});
}

TEST_CASE("Euler/Betti agreement on random subcomplexes") {
    std::mt19937 rng(20240811);
    for (const auto& [rows, cols] : {std::pair{4, 4}, {6, 6}, {8, 8}}) {
        const auto t = Triangulation::hex_grid(rows, cols);
        for (int it = 0; it < 1000; ++it) {
            const SubComplex sub(t, random_active(t.vertex_count(), rng, 0.5));
            const auto b = betti(sub);
            CHECK(euler_characteristic(sub) == b.beta0 - b.beta1);
            // Per-component sum must match the whole-complex value.
            long long sum_b1 = 0;
            for (const auto& c : components_with_counts(sub))
                sum_b1 += betti_of(c.info).beta1;
            CHECK(sum_b1 == b.beta1);
        }
    }
}

TEST_CASE("beta1 agrees with the GF(2) rank oracle on small grids") {
    std::mt19937 rng(7);
    for (const auto& [rows, cols] : {std::pair{3, 3}, {4, 4}, {5, 5}}) {
        const auto t = Triangulation::hex_grid(rows, cols);
        for (int it = 0; it < 200; ++it) {
            const SubComplex sub(t, random_active(t.vertex_count(), rng, 0.6));
            CHECK(betti(sub).beta1 == gf2_beta1(sub));
        }
    }
}

TEST_CASE("deleting one vertex changes beta0 by at least -1") {
    std::mt19937 rng(99);
    const auto t = Triangulation::hex_grid(6, 6);
    for (int it = 0; it < 300; ++it) {
        auto act = random_active(36, rng, 0.55);
        const long long b0 = betti(SubComplex(t, act)).beta0;
        const std::size_t v = rng() % 36;
        if (!act[v]) continue;
        act[v] = false;
        const long long b0_after = betti(SubComplex(t, act)).beta0;
        CHECK(b0_after - b0 >= -1);
    }
}

TEST_CASE("custom triangulation: 8-spoke wheel is Whitney") {
    // Center 0, ring 1..8.
    std::vector<std::vector<SensorId>> orders(9);
    for (int i = 1; i <= 8; ++i) orders[0].push_back(SensorId(i));
    for (int i = 1; i <= 8; ++i) {
        const int prev = i == 1 ? 8 : i - 1;
        const int next = i == 8 ? 1 : i + 1;
        orders[i] = {SensorId(prev), SensorId(0), SensorId(next)};
    }
    const auto t = Triangulation::custom(orders);
    CHECK(t.vertex_count() == 9);
    CHECK(t.edge_count() == 16);
    CHECK(t.triangles().size() == 8);
    CHECK(t.is_interior(SensorId(0)));
    for (int i = 1; i <= 8; ++i) CHECK(t.is_boundary(SensorId(i)));
    const auto oracle = brute_force_3cliques(t);
    CHECK(oracle.size() == 8);
}
