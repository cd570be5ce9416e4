#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgc/bp.hpp"
#include "fgc/delay.hpp"
#include "fgc/greedy.hpp"

namespace fgc {

enum class Strategy {
    GreedyCoop,    // "greedy-cotc"
    GreedyNonCoop, // "greedy-noncotc"
    BpCoop,        // "bp-cotc"
    BpNonCoop,     // "bp-noncotc"
    Gpc,           // "gpc"
    Lpc,           // "lpc"
};
const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// Everything a sweep run needs, parsed from key = value text.
struct ExperimentConfig {
    // topology
    int num_bs = 10;
    int num_users = 100;
    Geometry geometry = Geometry::Line;
    double cell_radius = 150.0;
    double bs_spacing = 200.0;
    uint64_t seed = 1;
    // demand
    int num_files = 1000;
    double gamma_base = 0.65;    // gamma or, with gamma_slope, gamma_k = base + slope*k/K
    double gamma_slope = 0.0;
    double file_mbits = 100.0;
    double backhaul_delay_s = 40.0;
    // channel
    double bandwidth_mhz = 5.0;
    double slot_ms = 20.0;
    double pathloss = 3.5;
    double edge_snr_db = 0.0;
    int mc_samples = 10000;
    // solve
    std::vector<Strategy> strategies;
    std::vector<int> sweep_q;       // capacity axis
    std::vector<double> sweep_gamma; // skew axis (at fixed q)
    int q = 50;
    int bp_tmax = 200;
    double bp_damping = 0.5;
    double bp_epsilon = 1e-6;
    bool approx_prefs = false;
    std::string out;

    void validate() const;
    std::vector<double> gammas() const; // per user
    ChannelParams channel() const;
    std::string manifest() const; // stable key = value dump, includes version
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct SweepRow {
    double sweep_value = 0.0;
    Strategy strategy = Strategy::GreedyCoop;
    double avg_delay_s = 0.0;
    double hit_prob = 0.0;
    long long calc_count = 0;
    int bp_rounds = 0;
    long long messages_exchanged = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv;      // sweep_value,strategy,avg_delay_s,...
    std::string manifest;
};

// Runs every (sweep value, strategy) cell; if config.out is set, writes
// sweep.csv and manifest.txt there. A failing cell aborts with the cell named.
SweepResult run_sweep(const ExperimentConfig& config);

// One placement at a fixed capacity; cached rate tables may be shared between
// calls via run_sweep, this entry point recomputes them.
struct SolveOutcome {
    Placement placement;
    EvalReport report;
    long long calc_count = 0;
    int bp_rounds = 0;
    long long messages_exchanged = 0;
    std::string trace_csv; // greedy step trace or message-passing round trace
};
SolveOutcome solve_one(const ExperimentConfig& config, Strategy strategy);

struct ReportResult {
    std::string summary_csv;
    std::string table; // aligned text view of the same numbers
};

// Joins sweep CSVs on the sweep value, one delay column per strategy, plus
// pairwise delay gaps. Axes must agree across the inputs.
ReportResult compare_report(const std::vector<std::string>& csv_paths);

std::vector<SweepRow> read_sweep_csv(const std::string& path);

}  // namespace fgc
