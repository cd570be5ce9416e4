#include "fgc/bp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <utility>

#include "fgc/errors.hpp"

namespace fgc {

FactorGraph build_factor_graph(const NetworkInstance& net, const DemandModel& demand) {
    FactorGraph g;
    g.num_files = demand.num_files;
    g.num_bs = net.num_bs;
    g.num_vars = demand.num_files * net.num_bs;
    g.net = &net;
    g.demand = &demand;

    g.user_owner.resize(net.num_users);
    g.processed_users.assign(net.num_bs, {});
    for (int k = 0; k < net.num_users; ++k) {
        if (net.serving_sets[k].empty())
            throw ConfigError("user " + std::to_string(k) + " has no serving base station");
        g.user_owner[k] = net.serving_sets[k].front();
        g.processed_users[g.user_owner[k]].push_back(k);
    }

    g.eta_offset.push_back(0);
    for (int k = 0; k < net.num_users; ++k) {
        for (int n : demand.support_sets[k]) {
            g.etas.push_back({n, k, g.user_owner[k]});
            g.eta_offset.push_back(g.eta_offset.back() +
                                   static_cast<int>(net.serving_sets[k].size()));
        }
    }

    std::vector<std::vector<std::pair<int, int>>> adj(g.num_vars);
    for (int j = 0; j < static_cast<int>(g.etas.size()); ++j) {
        const auto& serving = net.serving_sets[g.etas[j].user];
        for (int pos = 0; pos < static_cast<int>(serving.size()); ++pos)
            adj[g.var_index(g.etas[j].file, serving[pos])].push_back({j, pos});
    }
    g.var_adj_offset.resize(g.num_vars + 1, 0);
    for (int i = 0; i < g.num_vars; ++i)
        g.var_adj_offset[i + 1] = g.var_adj_offset[i] + static_cast<int>(adj[i].size());
    g.var_adj_entries.reserve(g.var_adj_offset.back());
    for (int i = 0; i < g.num_vars; ++i)
        for (auto& e : adj[i]) g.var_adj_entries.push_back(e);
    return g;
}

void MessageState::init(const FactorGraph& g) {
    alpha_eta.assign(g.num_eta_edges(), 0.0);
    beta_eta.assign(g.num_eta_edges(), 0.0);
    alpha_g.assign(g.num_vars, 0.0);
    beta_g.assign(g.num_vars, 0.0);
    belief.assign(g.num_vars, 0.0);
    estimate.assign(g.num_vars, 0);
    t = 0;
}

namespace {

// eta-node log-ratio message toward edge position `pos`, given the incoming
// log-ratio messages alpha[] and the cached-configuration payoffs
// payoff[mask] = -p_nk * D_nk(mask). Clamped positions are pinned to 0.
double eta_message(int deg, int pos, const double* alpha, const double* payoff,
                   uint32_t clamp_mask, EtaRule rule) {
    if (rule == EtaRule::PositiveOnly) {
        uint32_t on = 0;
        double asum = 0.0;
        for (int q = 0; q < deg; ++q) {
            if (q == pos || (clamp_mask >> q) & 1u) continue;
            if (alpha[q] > 0.0) {
                on |= 1u << q;
                asum += alpha[q];
            }
        }
        return (payoff[on | (1u << pos)] + asum) - (payoff[on] + asum);
    }
    double best1 = -std::numeric_limits<double>::infinity();
    double best0 = best1;
    const uint32_t top = 1u << deg;
    for (uint32_t mask = 0; mask < top; ++mask) {
        if (mask & clamp_mask) continue;
        double v = payoff[mask];
        for (int q = 0; q < deg; ++q)
            if (q != pos && ((mask >> q) & 1u)) v += alpha[q];
        if ((mask >> pos) & 1u)
            best1 = std::max(best1, v);
        else
            best0 = std::max(best0, v);
    }
    return best1 - best0;
}

std::vector<double> eta_payoff(const FactorGraph& g, const DelayContext& ctx, int eta) {
    const auto& node = g.etas[eta];
    int deg = g.eta_degree(eta);
    double p = g.demand->preferences[node.user][node.file];
    std::vector<double> payoff(1u << deg);
    for (uint32_t mask = 0; mask < payoff.size(); ++mask)
        payoff[mask] = -p * ctx.pair_delay(node.user, node.file, static_cast<int>(mask));
    return payoff;
}

double damp(double old_value, double raw, double damping) {
    return damping * old_value + (1.0 - damping) * raw;
}

}  // namespace

double update_alpha_eta(const FactorGraph& g, const MessageState& s, int eta, int pos,
                        double damping) {
    int edge = g.eta_offset[eta] + pos;
    const auto& node = g.etas[eta];
    int i = g.var_index(node.file, g.net->serving_sets[node.user][pos]);
    double sum = s.beta_g[i];
    for (int e = g.var_adj_offset[i]; e < g.var_adj_offset[i + 1]; ++e) {
        const auto& [j, p] = g.var_adj_entries[e];
        int other = g.eta_offset[j] + p;
        if (other != edge) sum += s.beta_eta[other];
    }
    return damp(s.alpha_eta[edge], sum, damping);
}

double update_beta_eta(const FactorGraph& g, const MessageState& s, const DelayContext& ctx,
                       int eta, int pos, EtaRule rule, const std::vector<uint8_t>& clamped_bs) {
    int deg = g.eta_degree(eta);
    const auto& serving = g.net->serving_sets[g.etas[eta].user];
    uint32_t clamp_mask = 0;
    for (int q = 0; q < deg; ++q)
        if (!clamped_bs.empty() && clamped_bs[serving[q]]) clamp_mask |= 1u << q;
    auto payoff = eta_payoff(g, ctx, eta);
    return eta_message(deg, pos, s.alpha_eta.data() + g.eta_offset[eta], payoff.data(),
                       clamp_mask, rule);
}

void update_beta_cap(const FactorGraph& g, const MessageState& s, int m, int capacity,
                     std::vector<double>& out) {
    int n_files = g.num_files;
    out.assign(n_files, 0.0);
    if (capacity <= 0 || capacity >= n_files) return;

    std::vector<int> order(n_files);
    std::iota(order.begin(), order.end(), 0);
    const double* a = s.alpha_g.data() + static_cast<size_t>(m) * n_files;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a[x] > a[y]; });
    std::vector<int> rank(n_files);
    for (int r = 0; r < n_files; ++r) rank[order[r]] = r;

    for (int n = 0; n < n_files; ++n) {
        // capacity-th largest incoming message with this variable excluded
        int r = rank[n];
        int idx = capacity - 1 < r ? capacity - 1 : capacity;
        double kth = a[order[idx]];
        out[n] = kth > 0.0 ? -kth : 0.0;
    }
}

std::pair<double, bool> belief_and_decide(const FactorGraph& g, const MessageState& s, int i) {
    double b = s.beta_g[i];
    for (int e = g.var_adj_offset[i]; e < g.var_adj_offset[i + 1]; ++e) {
        const auto& [j, p] = g.var_adj_entries[e];
        b += s.beta_eta[g.eta_offset[j] + p];
    }
    return {b, b > 0.0};
}

std::string BPTrace::csv() const {
    std::string out = "round,objective,changed,max_delta,messages_computed";
    for (size_t m = 0; m < computed_per_round.size(); ++m)
        out += ",computed_bs" + std::to_string(m);
    for (size_t m = 0; m < exchanged_per_round.size(); ++m)
        out += ",exchanged_bs" + std::to_string(m);
    out += '\n';
    char buf[160];
    for (const auto& r : rounds) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%d,%.12g,%lld", r.round, r.objective,
                      r.changed_estimates, r.max_delta, r.messages_computed);
        out += buf;
        for (long long v : computed_per_round) out += ',' + std::to_string(v);
        for (long long v : exchanged_per_round) out += ',' + std::to_string(v);
        out += '\n';
    }
    return out;
}

ExchangeCounts exchange_accounting(const FactorGraph& graph, int rounds) {
    ExchangeCounts c;
    c.computed.assign(graph.num_bs, 0);
    c.exchanged.assign(graph.num_bs, 0);
    for (int j = 0; j < static_cast<int>(graph.etas.size()); ++j) {
        const auto& node = graph.etas[j];
        const auto& serving = graph.net->serving_sets[node.user];
        for (int m : serving) {
            c.computed[node.owner_bs] += 1; // its beta toward (file, m)
            c.computed[m] += 1;             // the alpha back from (file, m)
            if (m != node.owner_bs) {
                c.exchanged[node.owner_bs] += 1;
                c.exchanged[m] += 1;
            }
        }
    }
    for (int m = 0; m < graph.num_bs; ++m)
        c.computed[m] += 2LL * graph.num_files; // alpha_g + beta_g, always local
    for (int m = 0; m < graph.num_bs; ++m) {
        c.computed[m] *= rounds;
        c.exchanged[m] *= rounds;
        c.total_computed += c.computed[m];
        c.total_exchanged += c.exchanged[m];
    }
    return c;
}

BPResult bp_solve(const FactorGraph& graph, const DelayContext& ctx,
                  const std::vector<int>& capacities, const BPOptions& options) {
    if (static_cast<int>(capacities.size()) != graph.num_bs)
        throw ConfigError("capacity vector length does not match base station count");
    if (options.t_max < 1) throw ConfigError("bp t_max must be at least 1");
    if (options.damping < 0.0 || options.damping >= 1.0)
        throw ConfigError("bp damping must lie in [0, 1)");

    const int N = graph.num_files;
    const int M = graph.num_bs;
    const int E = static_cast<int>(graph.etas.size());

    std::vector<uint8_t> clamped(M, 0);
    for (int m = 0; m < M; ++m) clamped[m] = capacities[m] <= 0;

    // static per-node payoff tables and clamp masks
    std::vector<int> payoff_offset(E + 1, 0);
    for (int j = 0; j < E; ++j) payoff_offset[j + 1] = payoff_offset[j] + (1 << graph.eta_degree(j));
    std::vector<double> payoff(payoff_offset.back());
    std::vector<uint32_t> clamp_masks(E, 0);
    for (int j = 0; j < E; ++j) {
        auto p = eta_payoff(graph, ctx, j);
        std::copy(p.begin(), p.end(), payoff.begin() + payoff_offset[j]);
        const auto& serving = graph.net->serving_sets[graph.etas[j].user];
        for (int q = 0; q < static_cast<int>(serving.size()); ++q)
            if (clamped[serving[q]]) clamp_masks[j] |= 1u << q;
    }

    MessageState s;
    s.init(graph);
    MessageState next = s;

    ExchangeCounts per_round = exchange_accounting(graph, 1);

    BPTrace trace;
    trace.computed_per_bs.assign(M, 0);
    trace.exchanged_per_bs.assign(M, 0);
    trace.computed_per_round = per_round.computed;
    trace.exchanged_per_round = per_round.exchanged;

    std::vector<uint8_t> prev_estimate = s.estimate;
    std::vector<double> bs_beta(N);
    int stable = 0;

    auto check_finite = [&](double v, const char* what, int round, int idx) {
        if (!std::isfinite(v))
            throw SolverError(std::string("non-finite ") + what + " message at round " +
                              std::to_string(round) + ", index " + std::to_string(idx));
    };

    for (int round = 1; round <= options.t_max; ++round) {
        double max_delta = 0.0;

        // function -> variable half, from round-(t-1) alphas
        for (int j = 0; j < E; ++j) {
            int deg = graph.eta_degree(j);
            int off = graph.eta_offset[j];
            for (int pos = 0; pos < deg; ++pos) {
                double v;
                if ((clamp_masks[j] >> pos) & 1u) {
                    v = 0.0;
                } else {
                    v = eta_message(deg, pos, s.alpha_eta.data() + off,
                                    payoff.data() + payoff_offset[j], clamp_masks[j],
                                    options.eta_rule);
                }
                check_finite(v, "eta", round, off + pos);
                max_delta = std::max(max_delta, std::abs(v - s.beta_eta[off + pos]));
                next.beta_eta[off + pos] = v;
            }
        }
        for (int m = 0; m < M; ++m) {
            update_beta_cap(graph, s, m, capacities[m], bs_beta);
            for (int n = 0; n < N; ++n) {
                int i = graph.var_index(n, m);
                check_finite(bs_beta[n], "capacity", round, i);
                max_delta = std::max(max_delta, std::abs(bs_beta[n] - s.beta_g[i]));
                next.beta_g[i] = bs_beta[n];
            }
        }

        // variable -> function half, also from round-(t-1) betas
        for (int i = 0; i < graph.num_vars; ++i) {
            double eta_sum = 0.0;
            for (int e = graph.var_adj_offset[i]; e < graph.var_adj_offset[i + 1]; ++e) {
                const auto& [j, p] = graph.var_adj_entries[e];
                eta_sum += s.beta_eta[graph.eta_offset[j] + p];
            }
            double v = damp(s.alpha_g[i], eta_sum, options.damping);
            check_finite(v, "alpha", round, i);
            max_delta = std::max(max_delta, std::abs(v - s.alpha_g[i]));
            next.alpha_g[i] = v;
            double with_g = eta_sum + s.beta_g[i];
            for (int e = graph.var_adj_offset[i]; e < graph.var_adj_offset[i + 1]; ++e) {
                const auto& [j, p] = graph.var_adj_entries[e];
                int edge = graph.eta_offset[j] + p;
                double raw = with_g - s.beta_eta[edge];
                double av = damp(s.alpha_eta[edge], raw, options.damping);
                check_finite(av, "alpha", round, edge);
                max_delta = std::max(max_delta, std::abs(av - s.alpha_eta[edge]));
                next.alpha_eta[edge] = av;
            }
        }

        std::swap(s.alpha_eta, next.alpha_eta);
        std::swap(s.beta_eta, next.beta_eta);
        std::swap(s.alpha_g, next.alpha_g);
        std::swap(s.beta_g, next.beta_g);
        s.t = round;

        int changed = 0;
        for (int i = 0; i < graph.num_vars; ++i) {
            auto [b, on] = belief_and_decide(graph, s, i);
            if (clamped[i / N]) on = false;
            s.belief[i] = b;
            s.estimate[i] = on ? 1 : 0;
            changed += s.estimate[i] != prev_estimate[i];
        }
        prev_estimate = s.estimate;

        Placement snapshot(N, M, capacities);
        snapshot.allow_infeasible = true;
        for (int i = 0; i < graph.num_vars; ++i)
            if (s.estimate[i]) snapshot.set(i % N, i / N, true);

        trace.rounds_run = round;
        for (int m = 0; m < M; ++m) {
            trace.computed_per_bs[m] += per_round.computed[m];
            trace.exchanged_per_bs[m] += per_round.exchanged[m];
        }
        trace.messages_computed += per_round.total_computed;
        trace.messages_exchanged += per_round.total_exchanged;
        trace.rounds.push_back({round, objective(snapshot, ctx).average_delay_s, changed,
                                max_delta, trace.messages_computed});

        stable = changed == 0 ? stable + 1 : 0;
        if (stable >= options.stable_rounds && max_delta < options.epsilon) {
            trace.converged = true;
            break;
        }
    }

    // enforce the per-BS budgets: keep the strongest beliefs, ties to the
    // lower file index
    Placement placement(N, M, capacities);
    for (int m = 0; m < M; ++m) {
        std::vector<int> chosen;
        for (int n = 0; n < N; ++n)
            if (s.estimate[graph.var_index(n, m)]) chosen.push_back(n);
        if (static_cast<int>(chosen.size()) > capacities[m]) {
            trace.repaired = true;
            std::stable_sort(chosen.begin(), chosen.end(), [&](int x, int y) {
                return s.belief[graph.var_index(x, m)] > s.belief[graph.var_index(y, m)];
            });
            chosen.resize(capacities[m]);
        }
        for (int n : chosen) placement.set(n, m, true);
    }
    placement.check_feasible();
    return {std::move(placement), std::move(trace), std::move(s)};
}

}  // namespace fgc
