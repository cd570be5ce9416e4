#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgc/errors.hpp"
#include "fgc/experiment.hpp"
#include "fgc/oracle.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    int q = -1;
    double gamma = -1.0;
    int mc_samples = -1;
    int bp_tmax = -1;
    double bp_damping = -1.0;
    bool approx_prefs = false;
};

fgc::ExperimentConfig make_config(const Overrides& o) {
    fgc::ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = fgc::load_config(o.config_path);
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.out = o.out;
    if (o.q >= 0) cfg.q = o.q;
    if (o.gamma > 0.0) {
        cfg.gamma_base = o.gamma;
        cfg.gamma_slope = 0.0;
    }
    if (o.mc_samples > 0) cfg.mc_samples = o.mc_samples;
    if (o.bp_tmax > 0) cfg.bp_tmax = o.bp_tmax;
    if (o.bp_damping >= 0.0) cfg.bp_damping = o.bp_damping;
    if (o.approx_prefs) cfg.approx_prefs = true;
    return cfg;
}

void add_common_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "key = value configuration file");
    app->add_option("--seed", o.seed, "RNG seed override")->each([&](const std::string&) {
        o.seed_set = true;
    });
    app->add_option("--out", o.out, "output path");
    app->add_option("--q", o.q, "per-BS cache capacity override");
    app->add_option("--gamma", o.gamma, "popularity skew override");
    app->add_option("--mc-samples", o.mc_samples, "Monte Carlo sample count override");
    app->add_option("--bp-tmax", o.bp_tmax, "message-passing round limit override");
    app->add_option("--bp-damping", o.bp_damping, "message damping factor override");
    app->add_flag("--approx-prefs", o.approx_prefs,
                  "solve with per-cell average preferences, evaluate with true ones");
}

int cmd_generate(const Overrides& o) {
    fgc::ExperimentConfig cfg = make_config(o);
    if (cfg.out.empty()) throw fgc::ConfigError("generate: --out path required");
    fgc::NetworkInstance net =
        fgc::build_grid_topology(cfg.num_bs, cfg.num_users, cfg.cell_radius, cfg.bs_spacing,
                                 cfg.seed, cfg.geometry);
    fgc::DemandModel demand = fgc::zipf_preferences(cfg.num_files, cfg.gammas(), cfg.seed);
    demand.file_bits = cfg.file_mbits * 1e6;
    demand.backhaul_delay_s = cfg.backhaul_delay_s;
    fgc::save_instance(cfg.out, net, demand);
    std::cout << "wrote " << cfg.out << " (" << net.num_bs << " BSs, " << net.num_users
              << " users, " << demand.num_files << " files)\n";
    return 0;
}

int cmd_solve(const Overrides& o, const std::string& strategy) {
    fgc::ExperimentConfig cfg = make_config(o);
    fgc::Strategy s = fgc::strategy_from_name(strategy);
    fgc::SolveOutcome res = fgc::solve_one(cfg, s);
    std::printf("strategy=%s avg_delay_s=%.12g hit_prob=%.12g calc_count=%lld", strategy.c_str(),
                res.report.average_delay_s, res.report.hit_probability, res.calc_count);
    if (res.bp_rounds > 0)
        std::printf(" bp_rounds=%d messages_exchanged=%lld", res.bp_rounds,
                    res.messages_exchanged);
    std::printf("\n");
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream pl(std::filesystem::path(cfg.out) / "placement.csv", std::ios::binary);
        pl << "bs,file\n";
        for (int m = 0; m < res.placement.num_bs; ++m)
            for (int n = 0; n < res.placement.num_files; ++n)
                if (res.placement.get(n, m)) pl << m << ',' << n << '\n';
        if (!res.trace_csv.empty()) {
            std::ofstream tr(std::filesystem::path(cfg.out) / "trace.csv", std::ios::binary);
            tr << res.trace_csv;
        }
        std::cout << "wrote " << cfg.out << "/placement.csv\n";
    }
    return 0;
}

int cmd_sweep(const Overrides& o) {
    fgc::ExperimentConfig cfg = make_config(o);
    fgc::SweepResult res = fgc::run_sweep(cfg);
    if (!cfg.out.empty())
        std::cout << "wrote " << cfg.out << "/sweep.csv (" << res.rows.size() << " rows)\n";
    else
        std::cout << res.csv;
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    fgc::ReportResult res = fgc::compare_report(inputs);
    std::cout << res.table;
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw fgc::ConfigError("cannot write " + out);
        f << res.summary_csv;
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

bool check(const char* name, bool ok, std::string detail = "") {
    std::printf("%-34s %s%s%s\n", name, ok ? "ok" : "FAIL", detail.empty() ? "" : "  ",
                detail.c_str());
    return ok;
}

// small seeded end-to-end checks against the independent oracles
int cmd_verify() {
    bool all = true;
    char detail[128];

    fgc::ExperimentConfig cfg;
    cfg.num_bs = 2;
    cfg.num_users = 6;
    cfg.num_files = 8;
    cfg.mc_samples = 4000;
    cfg.seed = 7;
    fgc::NetworkInstance net = fgc::build_grid_topology(
        cfg.num_bs, cfg.num_users, cfg.cell_radius, cfg.bs_spacing, cfg.seed, cfg.geometry);
    fgc::ChannelParams channel = cfg.channel();
    fgc::LinkGainTable gains = fgc::build_link_gains(net, channel);
    fgc::ExpectedRateTable coop =
        fgc::build_rate_table(net, gains, channel, fgc::Scheme::CooperativeBeamforming);
    fgc::DemandModel demand = fgc::zipf_preferences(cfg.num_files, cfg.gammas(), cfg.seed);
    demand.file_bits = cfg.file_mbits * 1e6;
    fgc::DelayContext ctx(net, demand, coop, fgc::Scheme::CooperativeBeamforming);

    {
        std::vector<int> caps(cfg.num_bs, 2);
        fgc::Placement p(cfg.num_files, cfg.num_bs, caps);
        p.set(0, 0, true);
        fgc::SlotSimConfig sim;
        sim.trials = 400;
        fgc::SlotSimResult r = fgc::simulate_download(ctx, gains, channel, 0, 0, p, sim);
        double expect = ctx.request_delay(0, 0, p);
        double rel = std::abs(r.mean_delay_s - expect) / expect;
        std::snprintf(detail, sizeof(detail), "rel_err=%.3g", rel);
        all &= check("expected-delay vs slot simulation", rel < 0.05, detail);
    }
    {
        std::vector<int> caps(cfg.num_bs, 3);
        fgc::SubmodularityReport rep = fgc::submodularity_probe(ctx, caps, 200, 11);
        std::snprintf(detail, sizeof(detail), "min_slack=%.3g", rep.min_submodular_slack);
        all &= check("diminishing returns", rep.min_submodular_slack >= -1e-9, detail);
        all &= check("monotone gains", rep.min_monotone_gain >= -1e-9, "");
    }
    {
        double worst = 1.0;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            fgc::NetworkInstance mnet =
                fgc::build_grid_topology(2, 3, cfg.cell_radius, cfg.bs_spacing, seed);
            fgc::ChannelParams mch = cfg.channel();
            mch.mc_samples = 2000;
            fgc::LinkGainTable mg = fgc::build_link_gains(mnet, mch);
            fgc::ExpectedRateTable mt =
                fgc::build_rate_table(mnet, mg, mch, fgc::Scheme::CooperativeBeamforming);
            fgc::DemandModel md = fgc::zipf_preferences(4, {0.8, 0.8, 0.8}, seed);
            md.file_bits = cfg.file_mbits * 1e6;
            fgc::DelayContext mctx(mnet, md, mt, fgc::Scheme::CooperativeBeamforming);
            std::vector<int> caps(2, 1);
            double base =
                fgc::objective(fgc::Placement(4, 2, caps), mctx).average_delay_s;
            auto g = fgc::greedy_place(mctx, caps);
            auto opt = fgc::brute_force_optimal(mctx, caps);
            double denom = base - opt.objective;
            if (denom > 1e-12)
                worst = std::min(worst,
                                 (base - fgc::objective(g.placement, mctx).average_delay_s) /
                                     denom);
        }
        std::snprintf(detail, sizeof(detail), "min_ratio=%.4g", worst);
        all &= check("greedy vs exhaustive optimum", worst >= 0.5, detail);
    }
    {
        double worst = 0.0;
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            fgc::NetworkInstance mnet =
                fgc::build_grid_topology(2, 3, cfg.cell_radius, cfg.bs_spacing, seed);
            fgc::ChannelParams mch = cfg.channel();
            mch.mc_samples = 1000;
            fgc::LinkGainTable mg = fgc::build_link_gains(mnet, mch);
            fgc::ExpectedRateTable mt =
                fgc::build_rate_table(mnet, mg, mch, fgc::Scheme::CooperativeBeamforming);
            fgc::DemandModel md = fgc::zipf_preferences(3, {0.7, 0.7, 0.7}, seed);
            md.file_bits = cfg.file_mbits * 1e6;
            fgc::DelayContext mctx(mnet, md, mt, fgc::Scheme::CooperativeBeamforming);
            fgc::FactorGraph graph = fgc::build_factor_graph(mnet, md);
            std::vector<int> caps(2, 1);

            fgc::MessageState s;
            s.init(graph);
            fgc::RawMessages raw;
            raw.init(graph);
            for (int round = 0; round < 5; ++round) {
                fgc::MessageState next = s;
                for (int j = 0; j < static_cast<int>(graph.etas.size()); ++j)
                    for (int pos = 0; pos < graph.eta_degree(j); ++pos)
                        next.beta_eta[graph.eta_offset[j] + pos] = fgc::update_beta_eta(
                            graph, s, mctx, j, pos, fgc::EtaRule::ExactMax, {});
                std::vector<double> bs_beta;
                for (int m = 0; m < 2; ++m) {
                    fgc::update_beta_cap(graph, s, m, caps[m], bs_beta);
                    for (int n = 0; n < 3; ++n)
                        next.beta_g[graph.var_index(n, m)] = bs_beta[n];
                }
                for (int j = 0; j < static_cast<int>(graph.etas.size()); ++j)
                    for (int pos = 0; pos < graph.eta_degree(j); ++pos)
                        next.alpha_eta[graph.eta_offset[j] + pos] =
                            fgc::update_alpha_eta(graph, s, j, pos, 0.0);
                for (int i = 0; i < graph.num_vars; ++i) {
                    double sum = 0.0;
                    for (int e = graph.var_adj_offset[i]; e < graph.var_adj_offset[i + 1]; ++e) {
                        const auto& [j, p] = graph.var_adj_entries[e];
                        sum += s.beta_eta[graph.eta_offset[j] + p];
                    }
                    next.alpha_g[i] = sum;
                }
                raw = fgc::raw_max_product_round(graph, mctx, caps, raw);
                s = next;
                for (int e = 0; e < graph.num_eta_edges(); ++e) {
                    worst = std::max(worst, std::abs(raw.beta_eta_ratio(e) - s.beta_eta[e]));
                    worst = std::max(worst, std::abs(raw.alpha_eta_ratio(e) - s.alpha_eta[e]));
                }
                for (int i = 0; i < graph.num_vars; ++i) {
                    worst = std::max(worst, std::abs(raw.beta_g_ratio(i) - s.beta_g[i]));
                    worst = std::max(worst, std::abs(raw.alpha_g_ratio(i) - s.alpha_g[i]));
                }
            }
        }
        std::snprintf(detail, sizeof(detail), "max_diff=%.3g", worst);
        all &= check("message passing vs raw max-product", worst < 1e-9, detail);
    }
    return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fog-RAN cache placement toolkit"};
    app.require_subcommand(1);

    Overrides o;
    std::string strategy = "greedy-cotc";
    std::vector<std::string> report_inputs;
    std::string report_out;

    CLI::App* generate = app.add_subcommand("generate", "build and save a network instance");
    add_common_flags(generate, o);
    CLI::App* solve = app.add_subcommand("solve", "run one placement strategy");
    add_common_flags(solve, o);
    solve->add_option("--strategy", strategy, "one of greedy-cotc, greedy-noncotc, bp-cotc, "
                                              "bp-noncotc, gpc, lpc");
    CLI::App* sweep = app.add_subcommand("sweep", "run the configured capacity or skew sweep");
    add_common_flags(sweep, o);
    CLI::App* report = app.add_subcommand("report", "join sweep CSVs into a comparison table");
    report->add_option("inputs", report_inputs, "sweep.csv files")->required();
    report->add_option("--out", report_out, "summary CSV path");
    CLI::App* verify = app.add_subcommand("verify", "run the oracle cross-checks");
    (void)verify;

    try {
        app.parse(argc, argv);
        if (generate->parsed()) return cmd_generate(o);
        if (solve->parsed()) return cmd_solve(o, strategy);
        if (sweep->parsed()) return cmd_sweep(o);
        if (report->parsed()) return cmd_report(report_inputs, report_out);
        return cmd_verify();
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const fgc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fgc::SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
