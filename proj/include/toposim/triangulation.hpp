#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "toposim/ids.hpp"

namespace topo {

struct GridPos {
    int row = 0;
    int col = 0;
    auto operator<=>(const GridPos&) const = default;
};

using Edge = std::pair<SensorId, SensorId>;  // normalized: first < second

inline Edge make_edge(SensorId a, SensorId b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// Static communication graph embedded as a Whitney triangulation: the faces
/// of the embedding are exactly the 3-cliques of the graph, every interior
/// vertex has a cyclic neighborhood and every boundary vertex a path.
class Triangulation {
public:
    std::size_t vertex_count() const { return orders_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::set<Edge>& edges() const { return edges_; }
    const std::vector<std::array<SensorId, 3>>& triangles() const { return triangles_; }

    bool adjacent(SensorId a, SensorId b) const { return edges_.count(make_edge(a, b)) > 0; }

    /// Neighbors in ring order (cyclic for interior vertices, a path for
    /// boundary vertices).
    const std::vector<SensorId>& cyclic_order(SensorId v) const { return orders_[v.value]; }

    bool is_boundary(SensorId v) const { return boundary_[v.value]; }
    bool is_interior(SensorId v) const { return !boundary_[v.value]; }

    /// Common neighbors of adjacent u and v; in a Whitney triangulation these
    /// are the 1 or 2 vertices completing triangles over edge {u,v}.
    const std::vector<SensorId>& shared_neighbors(SensorId u, SensorId v) const {
        return shared_.at(make_edge(u, v));
    }

    std::optional<GridPos> position(SensorId v) const {
        if (positions_.empty()) return std::nullopt;
        return positions_[v.value];
    }
    bool has_grid_layout() const { return !positions_.empty(); }
    int grid_rows() const { return grid_rows_; }
    int grid_cols() const { return grid_cols_; }

    /// Hex-cell grid, odd rows offset right by half a cell, sensors numbered
    /// row-major from 0. Interior sensors get 6 neighbors; the cyclic order is
    /// counterclockwise starting from the east neighbor.
    static Triangulation hex_grid(int rows, int cols) {
        if (rows < 2 || cols < 2)
            throw std::invalid_argument("hex grid needs rows >= 2 and cols >= 2");

        Triangulation t;
        t.grid_rows_ = rows;
        t.grid_cols_ = cols;
        const auto id_of = [cols](int r, int c) {
            return SensorId(static_cast<std::uint32_t>(r * cols + c));
        };
        const auto in_range = [rows, cols](int r, int c) {
            return r >= 0 && r < rows && c >= 0 && c < cols;
        };

        const int n = rows * cols;
        t.positions_.resize(n);
        t.orders_.resize(n);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t.positions_[r * cols + c] = GridPos{r, c};

        // Axial neighbor offsets, counterclockwise from east (rows grow
        // downward, so "north" is row - 1).
        static constexpr std::array<std::array<std::pair<int, int>, 6>, 2> kRing = {{
            // even rows: E, NE, NW, W, SW, SE
            {{{0, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}}},
            // odd rows (shifted right)
            {{{0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, 0}, {1, 1}}},
        }};

        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const SensorId v = id_of(r, c);
                for (const auto& [dr, dc] : kRing[r & 1]) {
                    if (!in_range(r + dr, c + dc)) continue;
                    const SensorId w = id_of(r + dr, c + dc);
                    t.orders_[v.value].push_back(w);
                    t.edges_.insert(make_edge(v, w));
                }
            }
        }

        // A boundary vertex keeps a gap in its 6-slot ring; rotate the list so
        // it reads as one contiguous path.
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const SensorId v = id_of(r, c);
                auto& ring = t.orders_[v.value];
                if (ring.size() == 6) continue;
                std::vector<SensorId> full;
                std::vector<bool> present;
                for (const auto& [dr, dc] : kRing[r & 1]) {
                    if (in_range(r + dr, c + dc)) {
                        full.push_back(id_of(r + dr, c + dc));
                        present.push_back(true);
                    } else {
                        full.push_back(SensorId(0));
                        present.push_back(false);
                    }
                }
                std::size_t start = 0;
                for (std::size_t i = 0; i < 6; ++i) {
                    if (!present[i] && present[(i + 1) % 6]) { start = (i + 1) % 6; break; }
                }
                ring.clear();
                for (std::size_t i = 0; i < 6; ++i) {
                    const std::size_t j = (start + i) % 6;
                    if (present[j]) ring.push_back(full[j]);
                }
            }
        }

        t.finish();
        return t;
    }

    /// Explicit triangulation from per-vertex ring orders, for reference
    /// scenes that are not hex grids. Edges are implied by ring membership;
    /// all Whitney invariants are validated.
    static Triangulation custom(const std::vector<std::vector<SensorId>>& cyclic_orders) {
        Triangulation t;
        t.orders_ = cyclic_orders;
        for (std::size_t v = 0; v < cyclic_orders.size(); ++v)
            for (SensorId w : cyclic_orders[v])
                t.edges_.insert(make_edge(SensorId(static_cast<std::uint32_t>(v)), w));
        t.finish();
        return t;
    }

private:
    void finish() {
        const std::size_t n = orders_.size();
        boundary_.assign(n, false);

        for (std::size_t vi = 0; vi < n; ++vi) {
            const SensorId v(static_cast<std::uint32_t>(vi));
            const auto& ring = orders_[vi];
            if (ring.empty()) throw std::logic_error("isolated vertex " + std::to_string(vi));
            for (SensorId w : ring)
                if (!adjacent(v, w)) throw std::logic_error("ring entry without edge");
            for (std::size_t i = 0; i + 1 < ring.size(); ++i)
                if (!adjacent(ring[i], ring[i + 1]))
                    throw std::logic_error("ring of " + std::to_string(vi) + " is not consecutive");
            const bool wrap = ring.size() > 2 && adjacent(ring.back(), ring.front());
            boundary_[vi] = !wrap;
        }

        // Faces := 3-cliques over consecutive ring pairs; then check the
        // Whitney property (no 3-clique that is not a face).
        std::set<std::array<SensorId, 3>> tris;
        for (std::size_t vi = 0; vi < n; ++vi) {
            const SensorId v(static_cast<std::uint32_t>(vi));
            const auto& ring = orders_[vi];
            const std::size_t pairs = boundary_[vi] ? ring.size() - 1 : ring.size();
            for (std::size_t i = 0; i < pairs; ++i) {
                std::array<SensorId, 3> tri{v, ring[i], ring[(i + 1) % ring.size()]};
                std::sort(tri.begin(), tri.end());
                tris.insert(tri);
            }
        }
        for (const auto& [a, b] : edges_) {
            for (SensorId w : orders_[a.value]) {
                if (w == b || !adjacent(w, b)) continue;
                std::array<SensorId, 3> tri{a, b, w};
                std::sort(tri.begin(), tri.end());
                if (!tris.count(tri))
                    throw std::logic_error("3-clique is not a face: triangulation is not Whitney");
            }
        }
        triangles_.assign(tris.begin(), tris.end());

        for (const auto& e : edges_) {
            std::vector<SensorId> common;
            for (SensorId w : orders_[e.first.value])
                if (w != e.second && adjacent(w, e.second)) common.push_back(w);
            std::sort(common.begin(), common.end());
            shared_[e] = std::move(common);
        }
    }

    std::vector<std::vector<SensorId>> orders_;
    std::vector<bool> boundary_;
    std::set<Edge> edges_;
    std::vector<std::array<SensorId, 3>> triangles_;
    std::map<Edge, std::vector<SensorId>> shared_;
    std::vector<GridPos> positions_;
    int grid_rows_ = 0;
    int grid_cols_ = 0;
};

}  // namespace topo
