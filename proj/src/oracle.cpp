#include "fgc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "fgc/errors.hpp"
#include "fgc/rng.hpp"

namespace fgc {

namespace {

void feasible_subsets(int num_files, int capacity, std::vector<uint32_t>& out) {
    out.clear();
    for (uint32_t mask = 0; mask < (1u << num_files); ++mask)
        if (std::popcount(mask) <= capacity) out.push_back(mask);
}

// delay reduction from adding (file n, BS m) on top of `p`
double add_gain(const DelayContext& ctx, const Placement& p, int n, int m) {
    double gain = 0.0;
    for (int k : ctx.net->coverage_sets[m]) {
        double pref = ctx.demand->preferences[k][n];
        if (pref <= 0.0) continue;
        const auto& serving = ctx.table->users[k].serving;
        auto it = std::lower_bound(serving.begin(), serving.end(), m);
        int pos = static_cast<int>(it - serving.begin());
        int mask = ctx.cached_mask(k, n, p);
        gain += pref * (ctx.pair_delay(k, n, mask) - ctx.pair_delay(k, n, mask | (1 << pos)));
    }
    return gain / ctx.net->num_users;
}

}  // namespace

BruteForceResult brute_force_optimal(const DelayContext& ctx, const std::vector<int>& capacities) {
    const int N = ctx.demand->num_files;
    const int M = ctx.net->num_bs;
    if (N > 20) throw ConfigError("brute force limited to 20 files");

    std::vector<std::vector<uint32_t>> choices(M);
    double combos = 1.0;
    for (int m = 0; m < M; ++m) {
        feasible_subsets(N, std::min(capacities[m], N), choices[m]);
        combos *= static_cast<double>(choices[m].size());
        if (combos > 1e7) throw ConfigError("brute force search space exceeds 1e7 placements");
    }

    BruteForceResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<size_t> pick(M, 0);
    Placement p(N, M, capacities);
    while (true) {
        for (int m = 0; m < M; ++m) {
            uint32_t mask = choices[m][pick[m]];
            for (int n = 0; n < N; ++n) p.set(n, m, (mask >> n) & 1u);
        }
        double obj = objective(p, ctx).average_delay_s;
        ++best.evaluated;
        if (obj < best.objective) {
            best.objective = obj;
            best.placement = p;
        }
        int m = 0;
        while (m < M && ++pick[m] == choices[m].size()) pick[m++] = 0;
        if (m == M) break;
    }
    return best;
}

SlotSimResult simulate_download(const DelayContext& ctx, const LinkGainTable& gains,
                                const ChannelParams& channel, int user, int file,
                                const Placement& placement, const SlotSimConfig& cfg) {
    const auto& u = ctx.table->users[user];
    int mask = ctx.cached_mask(user, file, placement);
    double setup = 0.0;
    std::vector<int> transmitters;
    if (mask != 0) {
        transmitters = ctx.serving_subset(user, file, placement);
    } else {
        setup = ctx.demand->backhaul(user, file);
        if (ctx.scheme == Scheme::CooperativeBeamforming) {
            transmitters = u.serving;
        } else {
            int best = 0;
            for (size_t pos = 1; pos < u.serving.size(); ++pos)
                if (u.subset_rate[1u << pos] > u.subset_rate[1u << best])
                    best = static_cast<int>(pos);
            transmitters = {u.serving[best]};
        }
    }
    std::vector<double> c;
    for (int m : transmitters) c.push_back(gains.gain[user][m]);

    Rng rng = Rng::substream(cfg.seed, (static_cast<uint64_t>(user) << 32) ^ file);
    double sum = 0.0, sumsq = 0.0;
    SlotSimResult res;
    const double slot_bits_scale = channel.bandwidth_hz * channel.slot_seconds;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        double bits = 0.0;
        int slots = 0;
        while (bits < ctx.demand->file_bits && slots < cfg.max_slots) {
            double snr = 0.0;
            for (double ci : c) snr += ci * rng.exponential();
            bits += slot_bits_scale * std::log2(1.0 + snr);
            ++slots;
        }
        if (slots == cfg.max_slots && bits < ctx.demand->file_bits) ++res.truncated_trials;
        double d = setup + slots * channel.slot_seconds;
        sum += d;
        sumsq += d * d;
    }
    res.mean_delay_s = sum / cfg.trials;
    double var = (sumsq - sum * sum / cfg.trials) / (cfg.trials - 1);
    res.std_error_s = std::sqrt(std::max(var, 0.0) / cfg.trials);
    return res;
}

void RawMessages::init(const FactorGraph& g) {
    alpha_eta.assign(g.num_eta_edges(), {0.5, 0.5});
    beta_eta.assign(g.num_eta_edges(), {0.5, 0.5});
    alpha_g.assign(g.num_vars, {0.5, 0.5});
    beta_g.assign(g.num_vars, {0.5, 0.5});
}

namespace {
double ratio(const std::array<double, 2>& m) { return std::log(m[1] / m[0]); }
std::array<double, 2> normalized(double m0, double m1) {
    double s = m0 + m1;
    return {m0 / s, m1 / s};
}
}  // namespace

double RawMessages::alpha_eta_ratio(int edge) const { return ratio(alpha_eta[edge]); }
double RawMessages::beta_eta_ratio(int edge) const { return ratio(beta_eta[edge]); }
double RawMessages::alpha_g_ratio(int i) const { return ratio(alpha_g[i]); }
double RawMessages::beta_g_ratio(int i) const { return ratio(beta_g[i]); }

RawMessages raw_max_product_round(const FactorGraph& graph, const DelayContext& ctx,
                                  const std::vector<int>& capacities, const RawMessages& prev) {
    const int N = graph.num_files;
    const int M = graph.num_bs;
    if (graph.num_vars > 6)
        throw ConfigError("raw max-product enumeration limited to 6 variables");

    RawMessages next = prev;

    // eta nodes: enumerate every on/off configuration of the neighbors
    for (int j = 0; j < static_cast<int>(graph.etas.size()); ++j) {
        const auto& node = graph.etas[j];
        int deg = graph.eta_degree(j);
        int off = graph.eta_offset[j];
        double p = graph.demand->preferences[node.user][node.file];
        for (int pos = 0; pos < deg; ++pos) {
            double best[2] = {0.0, 0.0};
            for (uint32_t mask = 0; mask < (1u << deg); ++mask) {
                double v = std::exp(-p * ctx.pair_delay(node.user, node.file,
                                                        static_cast<int>(mask)));
                for (int q = 0; q < deg; ++q)
                    if (q != pos) v *= prev.alpha_eta[off + q][(mask >> q) & 1u];
                int bit = (mask >> pos) & 1u;
                best[bit] = std::max(best[bit], v);
            }
            next.beta_eta[off + pos] = normalized(best[0], best[1]);
        }
    }

    // capacity nodes: enumerate configurations of the other N-1 variables
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            int i = graph.var_index(n, m);
            double best[2] = {0.0, 0.0};
            for (uint32_t mask = 0; mask < (1u << N); ++mask) {
                int count = std::popcount(mask);
                if (count > capacities[m]) continue;
                double v = 1.0;
                for (int q = 0; q < N; ++q)
                    if (q != n) v *= prev.alpha_g[graph.var_index(q, m)][(mask >> q) & 1u];
                int bit = (mask >> n) & 1u;
                best[bit] = std::max(best[bit], v);
            }
            next.beta_g[i] = normalized(best[0], best[1]);
        }
    }

    // variable nodes: plain products of the incoming function messages
    for (int i = 0; i < graph.num_vars; ++i) {
        double prod[2] = {1.0, 1.0};
        for (int e = graph.var_adj_offset[i]; e < graph.var_adj_offset[i + 1]; ++e) {
            const auto& [j, p] = graph.var_adj_entries[e];
            int edge = graph.eta_offset[j] + p;
            prod[0] *= prev.beta_eta[edge][0];
            prod[1] *= prev.beta_eta[edge][1];
        }
        next.alpha_g[i] = normalized(prod[0], prod[1]);
        for (int e = graph.var_adj_offset[i]; e < graph.var_adj_offset[i + 1]; ++e) {
            const auto& [j, p] = graph.var_adj_entries[e];
            int edge = graph.eta_offset[j] + p;
            next.alpha_eta[edge] =
                normalized(prod[0] * prev.beta_g[i][0] / prev.beta_eta[edge][0],
                           prod[1] * prev.beta_g[i][1] / prev.beta_eta[edge][1]);
        }
    }
    return next;
}

SubmodularityReport submodularity_probe(const DelayContext& ctx,
                                        const std::vector<int>& capacities, int trials,
                                        uint64_t seed) {
    const int N = ctx.demand->num_files;
    const int M = ctx.net->num_bs;
    Rng rng(seed);
    SubmodularityReport rep;
    rep.min_submodular_slack = std::numeric_limits<double>::infinity();
    rep.min_monotone_gain = std::numeric_limits<double>::infinity();

    std::vector<int> room;
    for (int m = 0; m < M; ++m)
        if (capacities[m] > 0) room.push_back(m);
    if (room.empty()) throw ConfigError("submodularity probe needs a BS with capacity > 0");

    std::vector<int> files(N);
    for (int trial = 0; trial < trials; ++trial) {
        int m_star = room[rng.uniform_int(room.size())];
        int n_star = static_cast<int>(rng.uniform_int(N));

        Placement big(N, M, capacities);
        for (int m = 0; m < M; ++m) {
            int limit = capacities[m] - (m == m_star ? 1 : 0);
            if (limit <= 0) continue;
            int take = static_cast<int>(rng.uniform_int(limit + 1));
            std::iota(files.begin(), files.end(), 0);
            rng.shuffle(files);
            int placed = 0;
            for (int n : files) {
                if (placed == take) break;
                if (m == m_star && n == n_star) continue;
                big.set(n, m, true);
                ++placed;
            }
        }
        Placement small(N, M, capacities);
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < N; ++n)
                if (big.get(n, m) && rng.uniform() < 0.5) small.set(n, m, true);

        double g_small = add_gain(ctx, small, n_star, m_star);
        double g_big = add_gain(ctx, big, n_star, m_star);
        rep.min_submodular_slack = std::min(rep.min_submodular_slack, g_small - g_big);
        rep.min_monotone_gain = std::min({rep.min_monotone_gain, g_small, g_big});
        ++rep.trials;
    }
    return rep;
}

}  // namespace fgc
