// Command-line front end: runs simulations, narrates the event catalog, and
// renders grid snapshots from recorded run directories.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "toposim/simulation.hpp"
#include "toposim/snapshot.hpp"

namespace fs = std::filesystem;
using namespace topo;

namespace {

constexpr const char* kEventNames[] = {
    "region-appearance", "region-disappearance", "hole-appearance",
    "hole-disappearance", "region-merge",        "region-split",
    "region-self-merge",  "region-self-split",   "topological-invariance"};

bool parse_grid(const std::string& text, int& rows, int& cols) {
    const auto x = text.find('x');
    if (x == std::string::npos) return false;
    try {
        rows = std::stoi(text.substr(0, x));
        cols = std::stoi(text.substr(x + 1));
    } catch (...) {
        return false;
    }
    return rows >= 2 && cols >= 2;
}

std::string default_out_dir() {
    if (const char* env = std::getenv("TOPO_OUT")) return env;
    return "toposim-out";
}

void narrate(const RunResult& result) {
    for (const auto& rep : result.reports) {
        for (const auto& ev : rep.events) {
            std::cout << "interval " << rep.interval << ": sensor " << ev.node.value << " -> "
                      << kEventNames[ev.event_type - 1] << " (" << (ev.positive ? "+" : "-")
                      << "), dB=(" << ev.delta_beta0 << "," << ev.delta_beta1 << "), ring "
                      << ev.ring_bits << "\n";
        }
        if (rep.blocked_nodes)
            std::cout << "interval " << rep.interval << ": " << rep.blocked_nodes
                      << " event sensor(s) blocked, deferred to the next interval\n";
    }
}

int run_one(RunConfig cfg, const fs::path& out_dir) {
    const Scenario scenario = resolve_scenario(cfg);
    const int intervals = cfg.intervals > 0 ? cfg.intervals : scenario.intervals();
    if (intervals <= 0) {
        std::cerr << "nothing to run: give --intervals or a scripted scenario\n";
        return 2;
    }
    OutputPaths paths{out_dir};
    fs::create_directories(paths.dir);
    std::ofstream trace(paths.trace());
    RunResult result;
    try {
        result = run_scenario(scenario, cfg, intervals, &trace);
    } catch (const ProtocolError& e) {
        std::cerr << "protocol failure: " << e.what() << "\n";
        return 1;
    }
    trace.close();
    write_outputs(paths, cfg, result);
    std::cout << "ran " << intervals << " interval(s) on " << scenario.tri->vertex_count()
              << " sensors; outputs in " << paths.dir.string() << "\n";
    long long events = 0;
    for (const auto& rep : result.reports) events += static_cast<long long>(rep.events.size());
    std::cout << "events: " << events << ", metrics rows: " << result.metrics.size() << "\n";
    if (cfg.verify) {
        std::cout << (result.verify_clean ? "verification: clean"
                                          : "verification: DISCREPANCIES FOUND")
                  << " (" << result.discrepancies.size() << " discrepancies)\n";
        if (!result.verify_clean) return 1;
    }
    return 0;
}

int cmd_run(const RunConfig& base, const std::string& seeds_range, const fs::path& out_dir) {
    if (seeds_range.empty()) return run_one(base, out_dir);
    const auto dots = seeds_range.find("..");
    if (dots == std::string::npos) {
        std::cerr << "--seeds wants the form A..B\n";
        return 2;
    }
    std::uint64_t from = 0, to = 0;
    try {
        from = std::stoull(seeds_range.substr(0, dots));
        to = std::stoull(seeds_range.substr(dots + 2));
    } catch (...) {
        std::cerr << "--seeds wants the form A..B\n";
        return 2;
    }
    if (to < from) {
        std::cerr << "--seeds range is empty\n";
        return 2;
    }
    int rc = 0;
    for (std::uint64_t s = from; s <= to; ++s) {
        RunConfig cfg = base;
        cfg.seed = s;
        rc = std::max(rc, run_one(cfg, out_dir / ("seed-" + std::to_string(s))));
    }
    return rc;
}

int cmd_demo(const std::string& which) {
    std::map<int, std::string> by_type{{1, "tour"}, {2, "tour"},  {3, "fig3"},
                                       {4, "fig3"}, {5, "fig9"},  {6, "fig4"},
                                       {7, "tour"}, {8, "fig10"}, {9, "fig11"}};
    std::vector<int> wanted;
    if (which == "all") {
        wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};
        for (auto& [t, name] : by_type) name = "tour";
    } else {
        int t = 0;
        try {
            t = std::stoi(which);
        } catch (...) {
        }
        if (t < 1 || t > 9) {
            std::cerr << "demo wants an event type 1..9 or `all`\n";
            return 2;
        }
        wanted = {t};
    }

    const auto scenarios = figure_scenarios();
    std::set<std::string> ran;
    std::set<int> seen;
    bool clean = true;
    for (int t : wanted) {
        const std::string& name = by_type[t];
        if (ran.count(name)) continue;
        ran.insert(name);
        std::cout << "--- scenario " << name << " ---\n";
        RunConfig cfg;
        cfg.verify = true;
        cfg.fire = FireParams{};
        const auto& sc = scenarios.at(name);
        const auto result = run_scenario(sc, cfg, sc.intervals());
        narrate(result);
        clean &= result.verify_clean;
        for (const auto& rep : result.reports)
            for (const auto& ev : rep.events) seen.insert(ev.event_type);
        std::cout << (result.verify_clean ? "oracle: clean\n" : "oracle: DISCREPANCIES\n");
    }
    for (int t : wanted) {
        if (!seen.count(t)) {
            std::cerr << "expected event type " << t << " was not observed\n";
            return 1;
        }
    }
    return clean ? 0 : 1;
}

int cmd_snapshot(const std::string& dir, int interval) {
    const fs::path config_path = fs::path(dir) / "config.json";
    std::ifstream cf(config_path);
    if (!cf) {
        std::cerr << "no config.json under " << dir << "\n";
        return 2;
    }
    nlohmann::json j;
    cf >> j;
    RunConfig cfg = RunConfig::from_json(j);
    cfg.verify = false;
    Scenario scenario;
    try {
        scenario = resolve_scenario(cfg);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    const int max_interval = cfg.intervals > 0 ? cfg.intervals : scenario.intervals();
    if (interval < 0 || interval > max_interval) {
        std::cerr << "interval " << interval << " outside the recorded range 0.." << max_interval
                  << "\n";
        return 2;
    }
    const auto result = run_scenario(scenario, cfg, interval);
    const IntervalReport* last =
        interval > 0 && !result.reports.empty() ? &result.reports.back() : nullptr;
    std::cout << render_snapshot(result.net, last);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"topological event detection simulator for hex-grid sensor networks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "simulate a scenario or a seeded fire");
    std::string grid_text, scenario_name, out_dir = default_out_dir(), seeds_range;
    RunConfig cfg;
    run->add_option("--grid", grid_text, "grid size as RxC, e.g. 12x12");
    run->add_option("--theta", cfg.theta, "binarization threshold");
    run->add_option("--seed", cfg.seed, "fire model seed");
    run->add_option("--intervals", cfg.intervals, "number of sample intervals");
    run->add_option("--scenario", scenario_name, "built-in scenario name or script path");
    run->add_flag("--verify", cfg.verify, "check every interval against the homology oracle");
    run->add_option("--out", out_dir, "output directory (default $TOPO_OUT or ./toposim-out)");
    run->add_option("--max-messages", cfg.max_messages, "per-interval message safety bound");
    run->add_option("--seeds", seeds_range, "seed sweep A..B, one output directory per seed");

    auto* demo = app.add_subcommand("demo", "narrate one event type (1..9) or `all`");
    std::string demo_which;
    demo->add_option("type", demo_which, "event type number or `all`")->required();

    auto* snapshot = app.add_subcommand("snapshot", "render a recorded run at one interval");
    std::string snap_dir;
    int snap_interval = 0;
    snapshot->add_option("dir", snap_dir, "run output directory")->required();
    snapshot->add_option("interval", snap_interval, "interval to render (0 = initial state)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (!grid_text.empty() && !parse_grid(grid_text, cfg.rows, cfg.cols)) {
                std::cerr << "--grid wants RxC with both >= 2\n";
                return 2;
            }
            if (grid_text.empty() && scenario_name.empty()) {
                std::cerr << "give --grid RxC or --scenario NAME|PATH\n";
                return 2;
            }
            cfg.scenario = scenario_name;
            return cmd_run(cfg, seeds_range, out_dir);
        }
        if (demo->parsed()) return cmd_demo(demo_which);
        if (snapshot->parsed()) return cmd_snapshot(snap_dir, snap_interval);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
