#include "fgc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fgc/errors.hpp"
#include "fgc/rng.hpp"

namespace fgc {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + v + "' for " + key);
    }
}

long long parse_int(const std::string& v, const std::string& key) {
    try {
        size_t used = 0;
        long long d = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value '" + v + "' for " + key);
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::GreedyCoop: return "greedy-cotc";
        case Strategy::GreedyNonCoop: return "greedy-noncotc";
        case Strategy::BpCoop: return "bp-cotc";
        case Strategy::BpNonCoop: return "bp-noncotc";
        case Strategy::Gpc: return "gpc";
        case Strategy::Lpc: return "lpc";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    for (Strategy s : {Strategy::GreedyCoop, Strategy::GreedyNonCoop, Strategy::BpCoop,
                       Strategy::BpNonCoop, Strategy::Gpc, Strategy::Lpc})
        if (name == strategy_name(s)) return s;
    throw ConfigError("config: unknown strategy '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (num_bs < 1 || num_users < 1 || num_files < 1)
        throw ConfigError("config: bs, users and files must be >= 1");
    if (strategies.empty()) throw ConfigError("config: strategy list is empty");
    if (!sweep_q.empty() && !sweep_gamma.empty())
        throw ConfigError("config: choose one sweep axis, not both");
    for (int v : sweep_q)
        if (v < 1 || v > num_files)
            throw ConfigError("config: sweep_q values must lie in [1, files]");
    for (double g : sweep_gamma)
        if (g <= 0.0) throw ConfigError("config: sweep_gamma values must be positive");
    // q is only consulted when no capacity sweep overrides it
    if (sweep_q.empty() && (q < 0 || q > num_files))
        throw ConfigError("config: q must lie in [0, files]");
    if (mc_samples < 1) throw ConfigError("config: mc_samples must be >= 1");
    channel().validate();
}

std::vector<double> ExperimentConfig::gammas() const {
    std::vector<double> g(num_users);
    for (int k = 0; k < num_users; ++k)
        g[k] = gamma_base + gamma_slope * static_cast<double>(k) / num_users;
    return g;
}

ChannelParams ExperimentConfig::channel() const {
    ChannelParams ch;
    ch.bandwidth_hz = bandwidth_mhz * 1e6;
    ch.slot_seconds = slot_ms * 1e-3;
    ch.pathloss_exponent = pathloss;
    ch.edge_snr_linear = std::pow(10.0, edge_snr_db / 10.0);
    ch.mc_samples = mc_samples;
    ch.mc_seed = splitmix64(seed ^ 0x6d635f7365656421ULL);
    return ch;
}

std::string ExperimentConfig::manifest() const {
    std::string s;
    s += "version = " FGC_VERSION "\n";
    s += "bs = " + std::to_string(num_bs) + "\n";
    s += "users = " + std::to_string(num_users) + "\n";
    s += "files = " + std::to_string(num_files) + "\n";
    s += std::string("geometry = ") + (geometry == Geometry::Line ? "line" : "grid") + "\n";
    s += "cell_radius = " + fmt(cell_radius) + "\n";
    s += "bs_spacing = " + fmt(bs_spacing) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "gamma = " + (gamma_slope == 0.0 ? fmt(gamma_base)
                                          : "ramp " + fmt(gamma_base) + " " + fmt(gamma_slope)) +
         "\n";
    s += "file_mbits = " + fmt(file_mbits) + "\n";
    s += "backhaul_delay_s = " + fmt(backhaul_delay_s) + "\n";
    s += "bandwidth_mhz = " + fmt(bandwidth_mhz) + "\n";
    s += "slot_ms = " + fmt(slot_ms) + "\n";
    s += "pathloss = " + fmt(pathloss) + "\n";
    s += "edge_snr_db = " + fmt(edge_snr_db) + "\n";
    s += "mc_samples = " + std::to_string(mc_samples) + "\n";
    s += "strategies = ";
    for (size_t i = 0; i < strategies.size(); ++i)
        s += std::string(i ? "," : "") + strategy_name(strategies[i]);
    s += "\n";
    if (!sweep_q.empty()) {
        s += "sweep_q = ";
        for (size_t i = 0; i < sweep_q.size(); ++i)
            s += (i ? "," : "") + std::to_string(sweep_q[i]);
        s += "\n";
    }
    if (!sweep_gamma.empty()) {
        s += "sweep_gamma = ";
        for (size_t i = 0; i < sweep_gamma.size(); ++i) s += (i ? "," : "") + fmt(sweep_gamma[i]);
        s += "\n";
    }
    s += "q = " + std::to_string(q) + "\n";
    s += "bp_tmax = " + std::to_string(bp_tmax) + "\n";
    s += "bp_damping = " + fmt(bp_damping) + "\n";
    s += "bp_epsilon = " + fmt(bp_epsilon) + "\n";
    s += "approx_prefs = " + std::to_string(approx_prefs ? 1 : 0) + "\n";
    return s;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.strategies.clear();
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "bs") cfg.num_bs = static_cast<int>(parse_int(val, key));
        else if (key == "users") cfg.num_users = static_cast<int>(parse_int(val, key));
        else if (key == "files") cfg.num_files = static_cast<int>(parse_int(val, key));
        else if (key == "geometry") {
            if (val == "line") cfg.geometry = Geometry::Line;
            else if (val == "grid") cfg.geometry = Geometry::Grid;
            else throw ConfigError("config: geometry must be line or grid");
        } else if (key == "cell_radius") cfg.cell_radius = parse_double(val, key);
        else if (key == "bs_spacing") cfg.bs_spacing = parse_double(val, key);
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(val, key));
        else if (key == "gamma") {
            auto parts = split(val, ' ');
            parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
            if (parts.size() == 1) {
                cfg.gamma_base = parse_double(parts[0], key);
                cfg.gamma_slope = 0.0;
            } else if (parts.size() == 3 && parts[0] == "ramp") {
                cfg.gamma_base = parse_double(parts[1], key);
                cfg.gamma_slope = parse_double(parts[2], key);
            } else {
                throw ConfigError("config: gamma must be a number or 'ramp <base> <slope>'");
            }
        } else if (key == "file_mbits") cfg.file_mbits = parse_double(val, key);
        else if (key == "backhaul_delay_s") cfg.backhaul_delay_s = parse_double(val, key);
        else if (key == "bandwidth_mhz") cfg.bandwidth_mhz = parse_double(val, key);
        else if (key == "slot_ms") cfg.slot_ms = parse_double(val, key);
        else if (key == "pathloss") cfg.pathloss = parse_double(val, key);
        else if (key == "edge_snr_db") cfg.edge_snr_db = parse_double(val, key);
        else if (key == "mc_samples") cfg.mc_samples = static_cast<int>(parse_int(val, key));
        else if (key == "strategies") {
            for (const auto& name : split(val, ','))
                if (!name.empty()) cfg.strategies.push_back(strategy_from_name(name));
        } else if (key == "sweep_q") {
            for (const auto& v : split(val, ','))
                if (!v.empty()) cfg.sweep_q.push_back(static_cast<int>(parse_int(v, key)));
        } else if (key == "sweep_gamma") {
            for (const auto& v : split(val, ','))
                if (!v.empty()) cfg.sweep_gamma.push_back(parse_double(v, key));
        } else if (key == "q") cfg.q = static_cast<int>(parse_int(val, key));
        else if (key == "bp_tmax") cfg.bp_tmax = static_cast<int>(parse_int(val, key));
        else if (key == "bp_damping") cfg.bp_damping = parse_double(val, key);
        else if (key == "bp_epsilon") cfg.bp_epsilon = parse_double(val, key);
        else if (key == "approx_prefs")
            cfg.approx_prefs = val == "1" || val == "true";
        else if (key == "out") cfg.out = val;
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

// preferences each user's lead BS would estimate from its cell average
DemandModel cell_average_demand(const DemandModel& demand, const NetworkInstance& net) {
    PopularityAggregates agg = aggregate_popularity(demand, net);
    DemandModel out = demand;
    for (int k = 0; k < net.num_users; ++k) {
        int m = net.serving_sets[k].front();
        out.preferences[k] = agg.local[m];
    }
    out.support_sets.assign(net.num_users, {});
    out.support_index.assign(net.num_users, std::vector<int>(demand.num_files, -1));
    for (int k = 0; k < net.num_users; ++k)
        for (int n = 0; n < demand.num_files; ++n)
            if (out.preferences[k][n] > 0.0) {
                out.support_index[k][n] = static_cast<int>(out.support_sets[k].size());
                out.support_sets[k].push_back(n);
            }
    return out;
}

struct Cell {
    Placement placement;
    EvalReport report;
    long long calc = 0;
    int rounds = 0;
    long long messages = 0;
    std::string trace_csv;
};

Cell solve_cell(Strategy strategy, const NetworkInstance& net, const DemandModel& solve_demand,
                const DemandModel& true_demand, const ExpectedRateTable& coop,
                const ExpectedRateTable* noncoop, const std::vector<int>& caps,
                const BPOptions& bp_opts) {
    // Conventional popularity baselines are evaluated under conventional
    // (non-cooperative) transmission; only the *-cotc strategies get beamforming.
    bool uses_noncoop = strategy == Strategy::GreedyNonCoop || strategy == Strategy::BpNonCoop ||
                        strategy == Strategy::Gpc || strategy == Strategy::Lpc;
    const ExpectedRateTable& table = uses_noncoop ? *noncoop : coop;
    Scheme scheme = uses_noncoop ? Scheme::NonCooperative : Scheme::CooperativeBeamforming;
    DelayContext solve_ctx(net, solve_demand, table, scheme);

    Cell cell;
    switch (strategy) {
        case Strategy::GreedyCoop:
        case Strategy::GreedyNonCoop: {
            auto res = greedy_place_lazy(solve_ctx, caps);
            cell.placement = std::move(res.placement);
            cell.calc = res.trace.calculations;
            cell.trace_csv = res.trace.csv();
            break;
        }
        case Strategy::BpCoop:
        case Strategy::BpNonCoop: {
            FactorGraph graph = build_factor_graph(net, solve_demand);
            auto res = bp_solve(graph, solve_ctx, caps, bp_opts);
            cell.placement = std::move(res.placement);
            cell.rounds = res.trace.rounds_run;
            cell.messages = res.trace.messages_exchanged;
            cell.trace_csv = res.trace.csv();
            break;
        }
        case Strategy::Gpc:
        case Strategy::Lpc: {
            PopularityAggregates agg = aggregate_popularity(solve_demand, net);
            cell.placement = strategy == Strategy::Gpc ? gpc_place(caps, agg)
                                                       : lpc_place(caps, agg);
            break;
        }
    }
    DelayContext eval_ctx(net, true_demand, table, scheme);
    cell.report = objective(cell.placement, eval_ctx);
    return cell;
}

std::string sweep_csv_header() {
    return "sweep_value,strategy,avg_delay_s,hit_prob,calc_count,bp_rounds,messages_exchanged";
}

std::string row_csv(const SweepRow& r) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%.12g,%s,%.12g,%.12g,%lld,%d,%lld", r.sweep_value,
                  strategy_name(r.strategy), r.avg_delay_s, r.hit_prob, r.calc_count, r.bp_rounds,
                  r.messages_exchanged);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << content;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();

    NetworkInstance net = build_grid_topology(config.num_bs, config.num_users, config.cell_radius,
                                              config.bs_spacing, config.seed, config.geometry);
    ChannelParams channel = config.channel();
    LinkGainTable gains = build_link_gains(net, channel);

    bool need_noncoop = false;
    for (Strategy s : config.strategies)
        need_noncoop |= s == Strategy::GreedyNonCoop || s == Strategy::BpNonCoop ||
                        s == Strategy::Gpc || s == Strategy::Lpc;
    ExpectedRateTable coop =
        build_rate_table(net, gains, channel, Scheme::CooperativeBeamforming);
    ExpectedRateTable noncoop;
    if (need_noncoop) noncoop = build_rate_table(net, gains, channel, Scheme::NonCooperative);

    BPOptions bp_opts;
    bp_opts.t_max = config.bp_tmax;
    bp_opts.damping = config.bp_damping;
    bp_opts.epsilon = config.bp_epsilon;

    auto make_demand = [&](const std::vector<double>& g) {
        DemandModel d = zipf_preferences(config.num_files, g, config.seed);
        d.file_bits = config.file_mbits * 1e6;
        d.backhaul_delay_s = config.backhaul_delay_s;
        return d;
    };

    bool gamma_axis = !config.sweep_gamma.empty();
    std::vector<double> axis;
    if (gamma_axis)
        axis = config.sweep_gamma;
    else if (!config.sweep_q.empty())
        for (int v : config.sweep_q) axis.push_back(v);
    else
        axis.push_back(config.q);

    DemandModel fixed_demand;
    if (!gamma_axis) fixed_demand = make_demand(config.gammas());

    SweepResult result;
    result.manifest = config.manifest();
    result.csv = sweep_csv_header() + "\n";

    for (double value : axis) {
        DemandModel gamma_demand;
        if (gamma_axis) gamma_demand = make_demand(std::vector<double>(config.num_users, value));
        const DemandModel& demand = gamma_axis ? gamma_demand : fixed_demand;
        DemandModel solve_demand = config.approx_prefs ? cell_average_demand(demand, net) : demand;
        int cap = gamma_axis ? config.q : static_cast<int>(value);
        std::vector<int> caps(config.num_bs, cap);

        for (Strategy s : config.strategies) {
            Cell cell;
            try {
                cell = solve_cell(s, net, solve_demand, demand, coop,
                                  need_noncoop ? &noncoop : nullptr, caps, bp_opts);
            } catch (const std::exception& e) {
                throw SolverError("sweep cell (value=" + fmt(value) + ", strategy=" +
                                  strategy_name(s) + ") failed: " + e.what());
            }
            SweepRow row{value,
                         s,
                         cell.report.average_delay_s,
                         cell.report.hit_probability,
                         cell.calc,
                         cell.rounds,
                         cell.messages};
            result.rows.push_back(row);
            result.csv += row_csv(row) + "\n";
        }
    }

    if (!config.out.empty()) {
        std::filesystem::path dir(config.out);
        std::filesystem::create_directories(dir);
        write_file(dir / "sweep.csv", result.csv);
        write_file(dir / "manifest.txt", result.manifest);
    }
    return result;
}

SolveOutcome solve_one(const ExperimentConfig& config, Strategy strategy) {
    config.validate();
    NetworkInstance net = build_grid_topology(config.num_bs, config.num_users, config.cell_radius,
                                              config.bs_spacing, config.seed, config.geometry);
    ChannelParams channel = config.channel();
    LinkGainTable gains = build_link_gains(net, channel);
    bool uses_noncoop = strategy == Strategy::GreedyNonCoop || strategy == Strategy::BpNonCoop ||
                        strategy == Strategy::Gpc || strategy == Strategy::Lpc;
    ExpectedRateTable coop = build_rate_table(
        net, gains, channel,
        uses_noncoop ? Scheme::NonCooperative : Scheme::CooperativeBeamforming);

    DemandModel demand = zipf_preferences(config.num_files, config.gammas(), config.seed);
    demand.file_bits = config.file_mbits * 1e6;
    demand.backhaul_delay_s = config.backhaul_delay_s;
    DemandModel solve_demand = config.approx_prefs ? cell_average_demand(demand, net) : demand;

    BPOptions bp_opts;
    bp_opts.t_max = config.bp_tmax;
    bp_opts.damping = config.bp_damping;
    bp_opts.epsilon = config.bp_epsilon;

    std::vector<int> caps(config.num_bs, config.q);
    Cell cell = solve_cell(strategy, net, solve_demand, demand, coop,
                           uses_noncoop ? &coop : nullptr, caps, bp_opts);
    return {std::move(cell.placement), std::move(cell.report), cell.calc,
            cell.rounds,               cell.messages,           std::move(cell.trace_csv)};
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep csv: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != sweep_csv_header())
        throw ParseError("sweep csv " + path + ": unexpected header");
    std::vector<SweepRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 7)
            throw ParseError("sweep csv " + path + " line " + std::to_string(lineno) +
                             ": expected 7 fields");
        SweepRow r;
        r.sweep_value = parse_double(f[0], "sweep_value");
        r.strategy = strategy_from_name(f[1]);
        r.avg_delay_s = parse_double(f[2], "avg_delay_s");
        r.hit_prob = parse_double(f[3], "hit_prob");
        r.calc_count = parse_int(f[4], "calc_count");
        r.bp_rounds = static_cast<int>(parse_int(f[5], "bp_rounds"));
        r.messages_exchanged = parse_int(f[6], "messages_exchanged");
        rows.push_back(r);
    }
    return rows;
}

ReportResult compare_report(const std::vector<std::string>& csv_paths) {
    if (csv_paths.empty()) throw ConfigError("report: no input files");

    std::vector<double> axis;
    std::vector<Strategy> strategies;
    // delay[strategy position][axis position]
    std::vector<std::vector<double>> delay;

    for (const auto& path : csv_paths) {
        auto rows = read_sweep_csv(path);
        std::vector<double> file_axis;
        for (const auto& r : rows)
            if (file_axis.empty() || file_axis.back() != r.sweep_value)
                file_axis.push_back(r.sweep_value);
        if (axis.empty())
            axis = file_axis;
        else if (axis != file_axis)
            throw ConfigError("report: sweep axes disagree between inputs (" + path + ")");

        for (const auto& r : rows) {
            auto it = std::find(strategies.begin(), strategies.end(), r.strategy);
            size_t col;
            if (it == strategies.end()) {
                strategies.push_back(r.strategy);
                delay.emplace_back(axis.size(), std::numeric_limits<double>::quiet_NaN());
                col = strategies.size() - 1;
            } else {
                col = static_cast<size_t>(it - strategies.begin());
            }
            size_t row =
                static_cast<size_t>(std::find(axis.begin(), axis.end(), r.sweep_value) -
                                    axis.begin());
            delay[col][row] = r.avg_delay_s;
        }
    }
    for (size_t c = 0; c < strategies.size(); ++c)
        for (double v : delay[c])
            if (std::isnan(v))
                throw ConfigError(std::string("report: strategy ") +
                                  strategy_name(strategies[c]) + " is missing sweep rows");

    ReportResult out;
    std::string header = "sweep_value";
    for (Strategy s : strategies) header += std::string(",delay_") + strategy_name(s);
    for (size_t a = 0; a < strategies.size(); ++a)
        for (size_t b = a + 1; b < strategies.size(); ++b)
            header += std::string(",gap_") + strategy_name(strategies[a]) + "_minus_" +
                      strategy_name(strategies[b]);
    out.summary_csv = header + "\n";
    for (size_t r = 0; r < axis.size(); ++r) {
        std::string line = fmt(axis[r]);
        for (size_t c = 0; c < strategies.size(); ++c) line += "," + fmt(delay[c][r]);
        for (size_t a = 0; a < strategies.size(); ++a)
            for (size_t b = a + 1; b < strategies.size(); ++b)
                line += "," + fmt(delay[a][r] - delay[b][r]);
        out.summary_csv += line + "\n";
    }

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%14s", "sweep_value");
    out.table = buf;
    for (Strategy s : strategies) {
        std::snprintf(buf, sizeof(buf), " %14s", strategy_name(s));
        out.table += buf;
    }
    out.table += "\n";
    for (size_t r = 0; r < axis.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%14.6g", axis[r]);
        out.table += buf;
        for (size_t c = 0; c < strategies.size(); ++c) {
            std::snprintf(buf, sizeof(buf), " %14.6g", delay[c][r]);
            out.table += buf;
        }
        out.table += "\n";
    }
    return out;
}

}  // namespace fgc
