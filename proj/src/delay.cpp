#include "fgc/delay.hpp"

#include <algorithm>
#include <cstdio>

#include "fgc/errors.hpp"

namespace fgc {

Placement::Placement(int n_files, int n_bs, std::vector<int> caps)
    : num_files(n_files),
      num_bs(n_bs),
      x(static_cast<size_t>(n_files) * n_bs, 0),
      capacities(std::move(caps)),
      load(n_bs, 0) {
    if (static_cast<int>(capacities.size()) != n_bs)
        throw ConfigError("placement: capacity list must have one entry per BS");
    for (int q : capacities)
        if (q < 0) throw ConfigError("placement: capacities must be >= 0");
}

void Placement::set(int n, int m, bool value) {
    uint8_t& slot = x[index(n, m)];
    if (slot == (value ? 1 : 0)) return;
    slot = value ? 1 : 0;
    load[m] += value ? 1 : -1;
}

std::vector<std::vector<int>> Placement::sets() const {
    std::vector<std::vector<int>> out(num_bs);
    for (int m = 0; m < num_bs; ++m)
        for (int n = 0; n < num_files; ++n)
            if (get(n, m)) out[m].push_back(n);
    return out;
}

bool Placement::feasible() const {
    for (int m = 0; m < num_bs; ++m)
        if (load[m] > capacities[m]) return false;
    return true;
}

void Placement::check_feasible() const {
    if (allow_infeasible) return;
    for (int m = 0; m < num_bs; ++m)
        if (load[m] > capacities[m])
            throw SolverError("placement infeasible: BS " + std::to_string(m) + " holds " +
                              std::to_string(load[m]) + " files, capacity " +
                              std::to_string(capacities[m]));
}

DelayContext::DelayContext(const NetworkInstance& n, const DemandModel& d,
                           const ExpectedRateTable& t, Scheme s)
    : net(&n), demand(&d), table(&t), scheme(s) {
    // standing model assumption: a backhaul fetch is slower than any cached delivery
    for (int k = 0; k < n.num_users; ++k) {
        if (t.degree(k) == 0) continue;
        double worst_hit = 0.0;
        const auto& u = t.users[k];
        for (int p = 0; p < t.degree(k); ++p)
            worst_hit = std::max(worst_hit, d.file_bits / u.subset_rate[1 << p]);
        for (int n_file = 0; n_file < d.num_files; ++n_file) {
            if (d.preferences[k][n_file] <= 0) continue;
            double miss = d.backhaul(k, n_file) + d.file_bits / u.uncached_rate;
            if (!(miss > worst_hit))
                throw ConfigError(
                    "delay model: backhaul delay too small; an uncached fetch would beat a cached "
                    "delivery for user " +
                    std::to_string(k));
        }
    }
}

int DelayContext::cached_mask(int k, int n, const Placement& p) const {
    const auto& serving = table->users[k].serving;
    int mask = 0;
    for (size_t pos = 0; pos < serving.size(); ++pos)
        if (p.get(n, serving[pos])) mask |= 1 << pos;
    return mask;
}

double DelayContext::miss_delay(int k, int n) const {
    return demand->backhaul(k, n) + demand->file_bits / table->uncached(k);
}

double DelayContext::pair_delay(int k, int n, int mask) const {
    if (mask == 0) return miss_delay(k, n);
    return demand->file_bits / table->rate(k, mask);
}

std::vector<int> DelayContext::serving_subset(int k, int n, const Placement& p) const {
    const auto& u = table->users[k];
    int mask = cached_mask(k, n, p);
    if (mask == 0) return {};
    if (scheme == Scheme::CooperativeBeamforming) {
        std::vector<int> out;
        for (size_t pos = 0; pos < u.serving.size(); ++pos)
            if (mask & (1 << pos)) out.push_back(u.serving[pos]);
        return out;
    }
    int best_pos = -1;
    double best_rate = -1.0;
    for (size_t pos = 0; pos < u.serving.size(); ++pos) {
        if (!(mask & (1 << pos))) continue;
        double r = u.subset_rate[1 << pos];
        if (r > best_rate) {
            best_rate = r;
            best_pos = static_cast<int>(pos);
        }
    }
    return {u.serving[best_pos]};
}

EvalReport objective(const Placement& placement, const DelayContext& ctx) {
    placement.check_feasible();
    const int K = ctx.net->num_users;
    EvalReport rep;
    rep.per_user_delay.assign(K, 0.0);
    rep.cached_flag.assign(K, std::vector<uint8_t>(ctx.demand->num_files, 0));
    double hit = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int n : ctx.demand->support_sets[k]) {
            double p = ctx.demand->preferences[k][n];
            int mask = ctx.cached_mask(k, n, placement);
            rep.per_user_delay[k] += p * ctx.pair_delay(k, n, mask);
            if (mask != 0) {
                rep.cached_flag[k][n] = 1;
                hit += p;
            }
        }
        rep.average_delay_s += rep.per_user_delay[k];
    }
    rep.average_delay_s /= K;
    rep.hit_probability = hit / K;
    return rep;
}

double hit_probability(const Placement& placement, const DelayContext& ctx) {
    placement.check_feasible();
    double hit = 0.0;
    for (int k = 0; k < ctx.net->num_users; ++k)
        for (int n : ctx.demand->support_sets[k])
            if (ctx.cached_mask(k, n, placement) != 0) hit += ctx.demand->preferences[k][n];
    return hit / ctx.net->num_users;
}

std::string EvalReport::csv_header() { return "avg_delay_s,hit_probability"; }

std::string EvalReport::csv_row() const {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g", average_delay_s, hit_probability);
    return buf;
}

}  // namespace fgc
