#include "fgc/rates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgc/errors.hpp"
#include "fgc/expint.hpp"
#include "fgc/rng.hpp"

namespace fgc {

namespace {
constexpr double kMinDistance = 1.0; // meters; clamp to avoid the power-law singularity
constexpr double kLn2 = 0.6931471805599453;
constexpr int kMaxServingSet = 8;
}  // namespace

const char* scheme_name(Scheme s) {
    return s == Scheme::NonCooperative ? "noncoop" : "coop";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "noncoop") return Scheme::NonCooperative;
    if (name == "coop") return Scheme::CooperativeBeamforming;
    throw ConfigError("unknown scheme '" + name + "'");
}

double link_gain(double distance_m, double cell_radius, const ChannelParams& channel) {
    if (distance_m < 0) throw ConfigError("link_gain: distance must be >= 0");
    double d = std::max(distance_m, kMinDistance);
    return channel.edge_snr_linear * std::pow(d / cell_radius, -channel.pathloss_exponent);
}

LinkGainTable build_link_gains(const NetworkInstance& net, const ChannelParams& channel) {
    channel.validate();
    LinkGainTable t;
    t.gain.assign(net.num_users, std::vector<double>(net.num_bs, 0.0));
    for (int k = 0; k < net.num_users; ++k) {
        for (int m : net.serving_sets[k]) {
            double d = std::hypot(net.user_positions[k].x - net.bs_positions[m].x,
                                  net.user_positions[k].y - net.bs_positions[m].y);
            t.gain[k][m] = link_gain(std::max(d, kMinDistance), net.cell_radius, channel);
        }
    }
    return t;
}

McEstimate expected_rate_mc_stats(const std::vector<double>& gains, const ChannelParams& channel,
                                  uint64_t seed) {
    channel.validate();
    if (gains.empty()) return {0.0, 0.0};
    for (double c : gains)
        if (!(c > 0)) throw ConfigError("expected_rate_mc: gains must be > 0");
    Rng rng(seed);
    const int S = channel.mc_samples;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < S; ++s) {
        double y = 0.0;
        for (double c : gains) y += c * rng.exponential();
        double r = channel.bandwidth_hz * std::log2(1.0 + y);
        sum += r;
        sumsq += r * r;
    }
    double mean = sum / S;
    double var = std::max(0.0, sumsq / S - mean * mean);
    return {mean, std::sqrt(var / S)};
}

double expected_rate_mc(const std::vector<double>& gains, const ChannelParams& channel,
                        uint64_t seed) {
    return expected_rate_mc_stats(gains, channel, seed).mean;
}

double expected_rate_closed(double gain, const ChannelParams& channel) {
    if (!(gain > 0)) throw ConfigError("expected_rate_closed: gain must be > 0");
    // E{ln(1 + c X)} = e^(1/c) E1(1/c) for X ~ Exp(1)
    return channel.bandwidth_hz * expint_e1_scaled(1.0 / gain) / kLn2;
}

ExpectedRateTable build_rate_table(const NetworkInstance& net, const LinkGainTable& gains,
                                   const ChannelParams& channel, Scheme scheme) {
    channel.validate();
    ExpectedRateTable table;
    table.scheme = scheme;
    table.mc_samples = channel.mc_samples;
    table.mc_seed = channel.mc_seed;
    table.users.resize(net.num_users);

    for (int k = 0; k < net.num_users; ++k) {
        UserRates& u = table.users[k];
        u.serving = net.serving_sets[k];
        const int a = static_cast<int>(u.serving.size());
        if (a > kMaxServingSet)
            throw ConfigError("rate table: user " + std::to_string(k) + " has " +
                              std::to_string(a) +
                              " serving BSs (> 8); adjust the geometry so serving sets stay small");
        const int nmask = 1 << a;
        u.subset_rate.assign(nmask, 0.0);
        if (a == 0) continue;

        std::vector<double> c(a);
        for (int p = 0; p < a; ++p) c[p] = gains.gain[k][u.serving[p]];

        Rng rng = Rng::substream(channel.mc_seed, static_cast<uint64_t>(k));
        const int S = channel.mc_samples;
        std::vector<double> y(nmask);
        std::vector<double> g(a);
        if (scheme == Scheme::CooperativeBeamforming) {
            for (int s = 0; s < S; ++s) {
                for (int p = 0; p < a; ++p) g[p] = rng.exponential();
                y[0] = 0.0;
                for (int mask = 1; mask < nmask; ++mask) {
                    int low = mask & -mask;
                    int p = std::countr_zero(static_cast<unsigned>(mask));
                    y[mask] = y[mask ^ low] + c[p] * g[p];
                }
                for (int mask = 1; mask < nmask; ++mask)
                    u.subset_rate[mask] += std::log2(1.0 + y[mask]);
            }
            for (int mask = 1; mask < nmask; ++mask)
                u.subset_rate[mask] *= channel.bandwidth_hz / S;
            u.uncached_rate = u.subset_rate[nmask - 1]; // fetch set A'_k = all of A_k
        } else {
            // singleton rates from a common draw, larger subsets take the best singleton
            std::vector<double> single(a, 0.0);
            for (int s = 0; s < S; ++s) {
                for (int p = 0; p < a; ++p) g[p] = rng.exponential();
                for (int p = 0; p < a; ++p) single[p] += std::log2(1.0 + c[p] * g[p]);
            }
            for (int p = 0; p < a; ++p) single[p] *= channel.bandwidth_hz / S;
            for (int mask = 1; mask < nmask; ++mask) {
                double best = 0.0;
                for (int p = 0; p < a; ++p)
                    if (mask & (1 << p)) best = std::max(best, single[p]);
                u.subset_rate[mask] = best;
            }
            u.uncached_rate = u.subset_rate[nmask - 1]; // best single BS
        }
    }
    return table;
}

namespace {
constexpr int kFrtVersion = 1;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void save_rate_table(const std::string& path, const ExpectedRateTable& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "frt " << kFrtVersion << "\n";
    out << "scheme " << scheme_name(table.scheme) << "\n";
    out << "mc_samples " << table.mc_samples << "\n";
    out << "mc_seed " << table.mc_seed << "\n";
    out << "users " << table.users.size() << "\n";
    for (const auto& u : table.users) {
        out << "u " << u.serving.size();
        for (int m : u.serving) out << " " << m;
        for (double r : u.subset_rate) out << " " << fmt(r);
        out << " " << fmt(u.uncached_rate) << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

ExpectedRateTable load_rate_table(const std::string& path, const ChannelParams& channel,
                                  Scheme scheme) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string head;
    int version = -1;
    if (!(in >> head >> version) || head != "frt")
        throw ParseError(path + ": not a rate-table file");
    if (version != kFrtVersion)
        throw ParseError(path + ": rate-table version " + std::to_string(version) +
                         " not supported by reader version " + std::to_string(kFrtVersion));
    ExpectedRateTable table;
    std::string key, sch;
    size_t nusers = 0;
    in >> key >> sch;
    table.scheme = scheme_from_name(sch);
    in >> key >> table.mc_samples;
    in >> key >> table.mc_seed;
    in >> key >> nusers;
    if (!in) throw ParseError(path + ": malformed header");
    if (table.scheme != scheme || table.mc_samples != channel.mc_samples ||
        table.mc_seed != channel.mc_seed)
        throw ConfigError(path + ": cached rate table was built with different scheme/seed/samples");
    table.users.resize(nusers);
    for (auto& u : table.users) {
        size_t a = 0;
        in >> key >> a;
        if (!in || key != "u" || a > 8) throw ParseError(path + ": malformed user record");
        u.serving.resize(a);
        for (auto& m : u.serving) in >> m;
        u.subset_rate.resize(size_t{1} << a);
        for (auto& r : u.subset_rate) in >> r;
        in >> u.uncached_rate;
        if (!in) throw ParseError(path + ": truncated user record");
    }
    return table;
}

}  // namespace fgc
