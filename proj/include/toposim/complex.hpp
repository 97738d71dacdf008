#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "toposim/triangulation.hpp"

namespace topo {

/// (vertices, edges, triangles) of a connected component.
struct ComponentInfo {
    long long n = 0;
    long long m = 0;
    long long f = 0;

    auto operator<=>(const ComponentInfo&) const = default;
    ComponentInfo& operator+=(const ComponentInfo& o) {
        n += o.n; m += o.m; f += o.f;
        return *this;
    }
};

struct BettiPair {
    long long beta0 = 0;
    long long beta1 = 0;
    auto operator<=>(const BettiPair&) const = default;
};

/// The induced clique complex over the active vertices: edges with both
/// endpoints active, triangles with all three.
class SubComplex {
public:
    SubComplex(const Triangulation& tri, std::vector<bool> active)
        : tri_(&tri), active_(std::move(active)) {
        if (active_.size() != tri.vertex_count())
            throw std::invalid_argument("active vector does not cover all vertices");
    }

    const Triangulation& triangulation() const { return *tri_; }
    bool active(SensorId v) const { return active_[v.value]; }
    const std::vector<bool>& active_bits() const { return active_; }

    std::size_t active_count() const {
        std::size_t k = 0;
        for (bool b : active_) k += b;
        return k;
    }

private:
    const Triangulation* tri_;
    std::vector<bool> active_;
};

/// Binarize a scalar field: active iff value >= theta.
inline SubComplex threshold_subcomplex(const Triangulation& tri,
                                       const std::vector<double>& values, double theta) {
    if (values.size() != tri.vertex_count())
        throw std::invalid_argument("field does not cover all vertices");
    std::vector<bool> active(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) active[i] = values[i] >= theta;
    return SubComplex(tri, std::move(active));
}

struct Component {
    std::vector<SensorId> members;  // sorted
    ComponentInfo info;
};

/// Connected components of the induced 1-skeleton, each with its exact
/// (n, m, f). This is the centralized oracle the protocol is checked against.
inline std::vector<Component> components_with_counts(const SubComplex& sub) {
    const auto& tri = sub.triangulation();
    const std::size_t n = tri.vertex_count();
    std::vector<int> comp(n, -1);
    std::vector<Component> out;

    for (std::size_t s = 0; s < n; ++s) {
        const SensorId start(static_cast<std::uint32_t>(s));
        if (!sub.active(start) || comp[s] >= 0) continue;
        const int cid = static_cast<int>(out.size());
        Component c;
        std::vector<SensorId> stack{start};
        comp[s] = cid;
        while (!stack.empty()) {
            const SensorId v = stack.back();
            stack.pop_back();
            c.members.push_back(v);
            for (SensorId w : tri.cyclic_order(v)) {
                if (!sub.active(w)) continue;
                if (v < w) ++c.info.m;
                if (comp[w.value] < 0) {
                    comp[w.value] = cid;
                    stack.push_back(w);
                }
            }
        }
        std::sort(c.members.begin(), c.members.end());
        c.info.n = static_cast<long long>(c.members.size());
        out.push_back(std::move(c));
    }

    for (const auto& tri3 : tri.triangles()) {
        if (sub.active(tri3[0]) && sub.active(tri3[1]) && sub.active(tri3[2]))
            ++out[comp[tri3[0].value]].info.f;
    }
    return out;
}

/// chi = vertices - edges + triangles.
inline long long euler_characteristic(const SubComplex& sub) {
    long long n = 0, m = 0, f = 0;
    for (const auto& c : components_with_counts(sub)) {
        n += c.info.n;
        m += c.info.m;
        f += c.info.f;
    }
    return n - m + f;
}

/// beta0 = component count, beta1 = -n + m - f + beta0 (planar complexes, so
/// nothing above dimension one).
inline BettiPair betti(const SubComplex& sub) {
    BettiPair b;
    long long n = 0, m = 0, f = 0;
    for (const auto& c : components_with_counts(sub)) {
        ++b.beta0;
        n += c.info.n;
        m += c.info.m;
        f += c.info.f;
    }
    b.beta1 = -n + m - f + b.beta0;
    return b;
}

inline BettiPair betti_of(const ComponentInfo& info) {
    return BettiPair{1, -info.n + info.m - info.f + 1};
}

}  // namespace topo
