#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include "toposim/engine.hpp"

namespace topo {

/// ASCII view of a grid network: `.` for inactive sensors, the component
/// owner ID for active ones, `*` marking this interval's event nodes. Event
/// details follow as footnotes with their (dB0, dB1) readings.
inline std::string render_snapshot(const Network& net, const IntervalReport* report = nullptr) {
    const auto& tri = net.triangulation();
    if (!tri.has_grid_layout())
        throw std::invalid_argument("snapshot rendering needs a grid triangulation");
    std::set<std::uint32_t> event_nodes;
    if (report)
        for (const auto& ev : report->events) event_nodes.insert(ev.node.value);

    std::ostringstream out;
    const int rows = tri.grid_rows();
    const int cols = tri.grid_cols();
    for (int r = 0; r < rows; ++r) {
        if (r & 1) out << "   ";  // offset rows shift right by half a cell
        for (int c = 0; c < cols; ++c) {
            const SensorId v(static_cast<std::uint32_t>(r * cols + c));
            const SensorState& st = net.state(v);
            std::string cell;
            if (!st.binary)
                cell = ".";
            else if (st.comp_id)
                cell = std::to_string(st.comp_id->owner.value);
            else
                cell = "?";
            if (event_nodes.count(v.value)) cell += "*";
            out << std::setw(5) << cell << " ";
        }
        out << "\n";
    }
    if (report) {
        for (const auto& ev : report->events) {
            out << "* sensor " << ev.node.value << ": type " << ev.event_type << " ("
                << (ev.positive ? "+" : "-") << "), dB=(" << ev.delta_beta0 << ","
                << ev.delta_beta1 << "), ring " << ev.ring_bits << "\n";
        }
        if (report->blocked_nodes)
            out << "blocked event nodes: " << report->blocked_nodes << "\n";
    }
    return out.str();
}

}  // namespace topo
