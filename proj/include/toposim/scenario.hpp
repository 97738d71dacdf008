#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "toposim/triangulation.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Deterministic RNG (identical across platforms)
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {
        for (int i = 0; i < 4; ++i) next();
    }
    std::uint64_t next() {
        s_ ^= s_ << 13;
        s_ ^= s_ >> 7;
        s_ ^= s_ << 17;
        return s_;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t s_;
};

// ---------------------------------------------------------------------------
// Fire model: a three-parameter contact process on the sensor grid
// ---------------------------------------------------------------------------

struct FireParams {
    double ignite_prob = 0.0;
    double spread_prob = 0.0;
    double extinguish_prob = 0.0;
};

/// One synchronous step. Burning cells push each non-burning neighbor above
/// the threshold with spread_prob and drop below it themselves with
/// extinguish_prob; any cold cell self-ignites with ignite_prob. Draws are
/// consumed in sensor order so runs replay exactly.
inline std::vector<double> step_fire(const Triangulation& tri, const std::vector<double>& field,
                                     double theta, const FireParams& p, Rng& rng) {
    if (p.ignite_prob < 0 || p.ignite_prob > 1 || p.spread_prob < 0 || p.spread_prob > 1 ||
        p.extinguish_prob < 0 || p.extinguish_prob > 1)
        throw std::invalid_argument("fire probabilities must lie in [0, 1]");
    std::vector<double> next = field;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const SensorId v(static_cast<std::uint32_t>(i));
        if (field[i] >= theta) {
            for (SensorId w : tri.cyclic_order(v)) {
                if (field[w.value] >= theta) continue;
                if (rng.uniform() < p.spread_prob) next[w.value] = theta + 1.0;
            }
            if (rng.uniform() < p.extinguish_prob) next[i] = theta - 1.0;
        } else {
            if (rng.uniform() < p.ignite_prob) next[i] = theta + 1.0;
        }
    }
    return next;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// A runnable scenario: a triangulation, the starting field, and scripted
/// per-interval value assignments (dense interval index from 1).
struct Scenario {
    std::string name;
    std::shared_ptr<const Triangulation> tri;
    double theta = 0.5;
    std::uint64_t seed = 0;
    std::vector<double> initial;
    std::map<int, std::vector<std::pair<SensorId, double>>> assignments;

    int intervals() const { return assignments.empty() ? 0 : assignments.rbegin()->first; }

    std::vector<double> field_at(std::vector<double> current, int interval) const {
        const auto it = assignments.find(interval);
        if (it != assignments.end())
            for (const auto& [sensor, value] : it->second) current[sensor.value] = value;
        return current;
    }
};

/// Line-oriented scenario file. Headers `grid R C`, `theta X`, `seed N`;
/// assignments `t <interval> <sensor> <value>` (interval 0 seeds the initial
/// field); `#` starts a comment.
struct ScenarioScript {
    int rows = 0;
    int cols = 0;
    double theta = 0.5;
    std::uint64_t seed = 0;
    std::vector<std::tuple<int, std::uint32_t, double>> assignments;  // sorted

    Scenario to_scenario(std::string name = "script") const {
        Scenario s;
        s.name = std::move(name);
        s.tri = std::make_shared<Triangulation>(Triangulation::hex_grid(rows, cols));
        s.theta = theta;
        s.seed = seed;
        s.initial.assign(static_cast<std::size_t>(rows) * cols, theta - 1.0);
        for (const auto& [t, sensor, value] : assignments) {
            if (t == 0)
                s.initial[sensor] = value;
            else
                s.assignments[t].emplace_back(SensorId(sensor), value);
        }
        return s;
    }
};

class ScenarioParseError : public std::runtime_error {
public:
    ScenarioParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

namespace scenario_detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace scenario_detail

inline ScenarioScript load_scenario(const std::string& text) {
    ScenarioScript s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool grid_seen = false;
    std::set<std::pair<int, std::uint32_t>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;
        if (word == "grid") {
            if (!(ls >> s.rows >> s.cols) || s.rows < 2 || s.cols < 2)
                throw ScenarioParseError(lineno, "grid wants two integers >= 2");
            grid_seen = true;
        } else if (word == "theta") {
            if (!(ls >> s.theta)) throw ScenarioParseError(lineno, "theta wants a number");
        } else if (word == "seed") {
            if (!(ls >> s.seed)) throw ScenarioParseError(lineno, "seed wants an integer");
        } else if (word == "t") {
            long long t;
            long long sensor;
            double value;
            if (!(ls >> t >> sensor >> value))
                throw ScenarioParseError(lineno, "assignment wants `t <interval> <sensor> <value>`");
            if (!grid_seen) throw ScenarioParseError(lineno, "assignment before grid header");
            if (t < 0) throw ScenarioParseError(lineno, "interval must be >= 0");
            if (sensor < 0 || sensor >= static_cast<long long>(s.rows) * s.cols)
                throw ScenarioParseError(lineno, "sensor " + std::to_string(sensor) +
                                                     " outside the " + std::to_string(s.rows) +
                                                     "x" + std::to_string(s.cols) + " grid");
            const auto key = std::make_pair(static_cast<int>(t),
                                            static_cast<std::uint32_t>(sensor));
            if (seen.count(key))
                throw ScenarioParseError(lineno, "duplicate assignment for interval " +
                                                     std::to_string(t) + ", sensor " +
                                                     std::to_string(sensor));
            seen.insert(key);
            s.assignments.emplace_back(static_cast<int>(t), static_cast<std::uint32_t>(sensor),
                                       value);
        } else {
            throw ScenarioParseError(lineno, "unknown directive `" + word + "`");
        }
        std::string rest;
        if (ls >> rest && rest[0] != '#')
            throw ScenarioParseError(lineno, "trailing garbage `" + rest + "`");
    }
    if (!grid_seen) throw ScenarioParseError(lineno, "missing grid header");
    std::sort(s.assignments.begin(), s.assignments.end());
    return s;
}

inline std::string save_scenario(const ScenarioScript& s) {
    std::string out;
    out += "grid " + std::to_string(s.rows) + " " + std::to_string(s.cols) + "\n";
    out += "theta " + scenario_detail::format_double(s.theta) + "\n";
    out += "seed " + std::to_string(s.seed) + "\n";
    auto sorted = s.assignments;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [t, sensor, value] : sorted)
        out += "t " + std::to_string(t) + " " + std::to_string(sensor) + " " +
               scenario_detail::format_double(value) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace scenario_detail {

inline Scenario grid_scenario(std::string name, int rows, int cols,
                              const std::vector<int>& initial_active,
                              const std::vector<std::vector<int>>& steps) {
    Scenario s;
    s.name = std::move(name);
    s.tri = std::make_shared<Triangulation>(Triangulation::hex_grid(rows, cols));
    s.theta = 0.5;
    s.initial.assign(s.tri->vertex_count(), -0.5);
    for (int v : initial_active) s.initial[v] = 1.5;
    int t = 0;
    for (const auto& step : steps) {
        ++t;
        auto& a = s.assignments[t];
        for (int signed_id : step) {
            const bool on = signed_id >= 0;
            const int v = on ? signed_id : -signed_id;
            a.emplace_back(SensorId(static_cast<std::uint32_t>(v)), on ? 1.5 : -0.5);
        }
    }
    return s;
}

inline std::shared_ptr<const Triangulation> eight_spoke_wheel() {
    // Center 0 with ring sensors 1..8 in cyclic order; the reconstruction of
    // the two-ring-component query walkthrough.
    std::vector<std::vector<SensorId>> orders(9);
    for (int i = 1; i <= 8; ++i) orders[0].push_back(SensorId(i));
    for (int i = 1; i <= 8; ++i) {
        const int prev = i == 1 ? 8 : i - 1;
        const int next = i == 8 ? 1 : i + 1;
        orders[i] = {SensorId(prev), SensorId(0), SensorId(next)};
    }
    return std::make_shared<Triangulation>(Triangulation::custom(orders));
}

}  // namespace scenario_detail

/// Named built-in scenes, one per interesting protocol situation. Grid IDs
/// are row-major; negative step entries mean "deactivate that sensor".
inline std::map<std::string, Scenario> figure_scenarios() {
    using scenario_detail::grid_scenario;
    std::map<std::string, Scenario> out;

    // Eight-sensor region with one hole: hexagon ring around inactive 12,
    // a filled triangle at 7-13-8, pendant 4.
    out["fig1"] = grid_scenario("fig1", 5, 5, {13, 7, 6, 11, 16, 17, 8, 4}, {});

    // Hole appearance/disappearance at the center of a full hexagon.
    out["fig3"] = grid_scenario("fig3", 5, 5, {12, 13, 7, 6, 11, 16, 17}, {{-12}, {12}});

    // Split ring [1,1,0,1,1,0]: two arms meeting only at the event node.
    out["fig4"] = grid_scenario("fig4", 5, 5, {12, 13, 7, 11, 16}, {{-12}});

    // Self-split ring [1,0,1,0,0,0]: the arms reconnect around the back.
    out["fig4b"] = grid_scenario("fig4b", 5, 5, {12, 13, 6, 8, 3, 2}, {{-12}});

    // Ring query with two ring components on the 8-spoke wheel.
    {
        Scenario s;
        s.name = "fig6";
        s.tri = scenario_detail::eight_spoke_wheel();
        s.theta = 0.5;
        s.initial.assign(9, -0.5);
        for (int v : {0, 1, 2, 3, 5, 6, 8}) s.initial[v] = 1.5;
        s.assignments[1].emplace_back(SensorId(0), -0.5);
        out["fig6"] = s;
    }

    // Four concurrent events: a growth, a shrink, and two merges joining the
    // same two regions at different sensors.
    out["fig9"] = grid_scenario("fig9", 5, 6,
                                {6, 7, 8, 9, 10, 11, 18, 19, 20, 21, 22, 23},
                                {{0, 13, 16, -23}});

    // Self-split around a long cycle; the two representatives are sensors 26
    // and 54 and the region keeps the lower ID.
    out["fig10"] = grid_scenario("fig10", 5, 14,
                                 {40, 26, 12, 11, 24, 38, 51, 66, 67, 68, 54}, {{-40}});

    // Event region of three sensors: one hole appearance reconstructed as a
    // chain of sub-events across three intervals.
    out["fig11"] = grid_scenario("fig11", 4, 4,
                                 {5, 6, 10, 1, 2, 3, 7, 11, 14, 13, 9, 4},
                                 {{-5, -6, -10}, {}, {}});

    // One event of each type, in order, one per interval.
    out["tour"] = grid_scenario("tour", 6, 7,
                                {2, 3, 8, 9, 10, 16, 17, 15, 22, 29, 24, 31, 19, 20},
                                {{41}, {-41}, {-9}, {9}, {18}, {-18}, {30}, {-22}, {1}});

    return out;
}

}  // namespace topo
