#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace topo {

/// A node's neighbors' binary values in its ring order. Cyclic for interior
/// nodes; boundary nodes get a path, whose ends never join a run.
struct NeighborRing {
    std::vector<std::uint8_t> entries;
    bool cyclic = true;

    std::string bits() const {
        std::string s;
        s.reserve(entries.size());
        for (auto e : entries) s.push_back(e ? '1' : '0');
        return s;
    }
};

/// Maximal run of ones: start index plus length, walking in ring order
/// (wrapping allowed on cyclic rings).
struct RingRun {
    std::size_t start = 0;
    std::size_t length = 0;

    std::size_t index_at(std::size_t offset, std::size_t ring_size) const {
        return (start + offset) % ring_size;
    }
    std::size_t end(std::size_t ring_size) const { return index_at(length - 1, ring_size); }
};

/// e_new = ones, r_c = run count, f_new = e_new - r_c. The one case where
/// f_new undercounts the true outer-edge count is a full cyclic ring (the run
/// closes into a cycle); full_cycle flags it so delta computations can use
/// outer_edges instead.
struct RingAnalysis {
    int e_new = 0;
    int r_c = 0;
    int f_new = 0;
    bool full_cycle = false;

    int inner_edges() const { return e_new; }
    int outer_edges() const { return full_cycle ? e_new : f_new; }
};

inline std::vector<RingRun> ring_components(const NeighborRing& ring) {
    const std::size_t k = ring.entries.size();
    std::vector<RingRun> runs;
    if (k == 0) return runs;

    bool all_ones = true;
    for (auto e : ring.entries) all_ones &= (e != 0);
    if (all_ones) {
        runs.push_back(RingRun{0, k});
        return runs;
    }

    // Scan from just past a zero so a wrapping run is collected whole. On a
    // path ring index 0 behaves like it follows a zero.
    std::size_t origin = 0;
    if (ring.cyclic) {
        while (ring.entries[(origin + k - 1) % k] != 0) ++origin;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = (origin + i) % k;
        if (!ring.entries[j]) continue;
        const std::size_t prev = (origin + i + k - 1) % k;
        const bool starts_run = (i == 0) || !ring.entries[prev] || (!ring.cyclic && j == 0);
        if (starts_run)
            runs.push_back(RingRun{j, 1});
        else
            ++runs.back().length;
    }
    return runs;
}

inline RingAnalysis analyze_ring(const NeighborRing& ring) {
    RingAnalysis a;
    for (auto e : ring.entries) a.e_new += (e != 0);
    const auto runs = ring_components(ring);
    a.r_c = static_cast<int>(runs.size());
    a.f_new = a.e_new - a.r_c;
    a.full_cycle = ring.cyclic && a.r_c == 1 &&
                   static_cast<std::size_t>(a.e_new) == ring.entries.size();
    return a;
}

}  // namespace topo
