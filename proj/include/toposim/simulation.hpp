#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "toposim/engine.hpp"
#include "toposim/scenario.hpp"
#include "toposim/verify.hpp"

namespace topo {

struct RunConfig {
    int rows = 0;
    int cols = 0;
    double theta = 0.5;
    std::uint64_t seed = 1;
    int intervals = 0;
    std::string scenario;  // built-in name or file path; empty = plain fire run
    FireParams fire{0.01, 0.35, 0.12};
    bool verify = false;
    std::string out_dir;
    long long max_messages = 10'000'000;
    bool shuffled_delivery = false;
    std::uint64_t shuffle_seed = 0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"rows", rows},
                              {"cols", cols},
                              {"theta", theta},
                              {"seed", seed},
                              {"intervals", intervals},
                              {"scenario", scenario},
                              {"ignite_prob", fire.ignite_prob},
                              {"spread_prob", fire.spread_prob},
                              {"extinguish_prob", fire.extinguish_prob},
                              {"verify", verify},
                              {"max_messages", max_messages},
                              {"shuffled_delivery", shuffled_delivery},
                              {"shuffle_seed", shuffle_seed}};
    }
    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        c.rows = j.value("rows", 0);
        c.cols = j.value("cols", 0);
        c.theta = j.value("theta", 0.5);
        c.seed = j.value("seed", std::uint64_t{1});
        c.intervals = j.value("intervals", 0);
        c.scenario = j.value("scenario", std::string{});
        c.fire.ignite_prob = j.value("ignite_prob", 0.0);
        c.fire.spread_prob = j.value("spread_prob", 0.0);
        c.fire.extinguish_prob = j.value("extinguish_prob", 0.0);
        c.verify = j.value("verify", false);
        c.max_messages = j.value("max_messages", 10'000'000LL);
        c.shuffled_delivery = j.value("shuffled_delivery", false);
        c.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
        return c;
    }
};

/// Resolve the configured scenario: a built-in name, a scenario file, or a
/// bare grid driven purely by the fire process.
inline Scenario resolve_scenario(const RunConfig& cfg) {
    if (!cfg.scenario.empty()) {
        auto builtins = figure_scenarios();
        const auto it = builtins.find(cfg.scenario);
        if (it != builtins.end()) return it->second;
        std::ifstream in(cfg.scenario);
        if (!in) throw std::invalid_argument("scenario `" + cfg.scenario + "` is neither built-in nor a readable file");
        std::stringstream buf;
        buf << in.rdbuf();
        return load_scenario(buf.str()).to_scenario(cfg.scenario);
    }
    if (cfg.rows < 2 || cfg.cols < 2)
        throw std::invalid_argument("plain runs need --grid RxC with both sizes >= 2");
    Scenario s;
    s.name = "fire";
    s.tri = std::make_shared<Triangulation>(Triangulation::hex_grid(cfg.rows, cfg.cols));
    s.theta = cfg.theta;
    s.seed = cfg.seed;
    s.initial.assign(s.tri->vertex_count(), cfg.theta - 1.0);
    return s;
}

struct RunResult {
    std::vector<IntervalReport> reports;
    std::vector<MetricsRow> metrics;
    std::vector<Discrepancy> discrepancies;
    std::vector<EventCheckResult> event_checks;
    bool verify_clean = true;
    Network net;  // final network state
};

/// Run a scenario end to end. Scripted assignments apply after the fire step
/// of each interval, so scripted scenes stay exact while plain runs burn.
inline RunResult run_scenario(const Scenario& scenario, const RunConfig& cfg,
                              int intervals, std::ostream* trace = nullptr) {
    RunResult result;
    result.net = init_network(scenario.tri, scenario.initial, scenario.theta, trace);
    result.net.max_messages = cfg.max_messages;
    if (cfg.shuffled_delivery)
        result.net.delivery = DeliveryPolicy{DeliveryOrder::Shuffled, cfg.shuffle_seed};
    result.net.shuffle_state = cfg.shuffle_seed ? cfg.shuffle_seed : 0x243F6A8885A308D3ull;

    Rng rng(scenario.seed ? scenario.seed : cfg.seed);
    std::vector<double> field = scenario.initial;
    const bool fire_active =
        cfg.fire.ignite_prob > 0 || cfg.fire.spread_prob > 0 || cfg.fire.extinguish_prob > 0;

    for (int t = 1; t <= intervals; ++t) {
        if (fire_active && scenario.name == "fire")
            field = step_fire(*scenario.tri, field, scenario.theta, cfg.fire, rng);
        field = scenario.field_at(std::move(field), t);
        IntervalReport report = run_interval(result.net, field);
        if (cfg.verify) {
            auto disc = oracle_check(result.net);
            report.oracle_ok = disc.empty();
            if (!disc.empty()) result.verify_clean = false;
            for (auto& d : disc) result.discrepancies.push_back(d);
            auto ec = event_check(report);
            if (!ec.pass) result.verify_clean = false;
            result.event_checks.push_back(ec);
        }
        result.metrics.push_back(metrics_row(report));
        result.reports.push_back(std::move(report));
    }
    return result;
}

// ---------------------------------------------------------------------------
// File outputs
// ---------------------------------------------------------------------------

struct OutputPaths {
    std::filesystem::path dir;
    std::filesystem::path config() const { return dir / "config.json"; }
    std::filesystem::path trace() const { return dir / "trace.csv"; }
    std::filesystem::path events() const { return dir / "events.csv"; }
    std::filesystem::path metrics() const { return dir / "metrics.csv"; }
    std::filesystem::path discrepancies() const { return dir / "discrepancies.csv"; }
};

inline void write_outputs(const OutputPaths& paths, const RunConfig& cfg,
                          const RunResult& result) {
    std::filesystem::create_directories(paths.dir);
    {
        std::ofstream f(paths.config());
        f << cfg.to_json().dump(2) << "\n";
    }
    {
        std::ofstream f(paths.events());
        f << event_csv_header() << "\n";
        for (const auto& rep : result.reports)
            for (const auto& ev : rep.events) f << event_csv_line(rep.interval, ev) << "\n";
    }
    {
        std::ofstream f(paths.metrics());
        f << metrics_csv_header() << "\n";
        for (const auto& row : result.metrics) f << metrics_csv_line(row) << "\n";
    }
    if (cfg.verify) {
        std::ofstream f(paths.discrepancies());
        f << "interval,node,field,expected,actual\n";
        for (const auto& d : result.discrepancies) f << discrepancy_csv_line(d) << "\n";
    }
}

}  // namespace topo
