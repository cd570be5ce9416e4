#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgc/model.hpp"
#include "fgc/rates.hpp"

namespace fgc {

// Binary file x BS caching matrix with per-BS capacities.
struct Placement {
    int num_files = 0; // N
    int num_bs = 0;    // M
    std::vector<uint8_t> x;      // indexed by ground index i = m*N + n
    std::vector<int> capacities; // Q_m
    std::vector<int> load;       // per-BS cached count
    bool allow_infeasible = false;

    Placement() = default;
    Placement(int n_files, int n_bs, std::vector<int> caps);

    int index(int n, int m) const { return m * num_files + n; }
    bool get(int n, int m) const { return x[index(n, m)] != 0; }
    void set(int n, int m, bool value);

    // per-BS cached file sets, ascending (the set view X_m)
    std::vector<std::vector<int>> sets() const;

    bool feasible() const;
    // throws SolverError naming the violating BS unless allow_infeasible
    void check_feasible() const;
};

struct EvalReport {
    double average_delay_s = 0.0;
    double hit_probability = 0.0;
    std::vector<double> per_user_delay;            // sum_n p_nk D_nk(X)
    std::vector<std::vector<uint8_t>> cached_flag; // K x N, scheme-reachable hits

    // documented column order used by the sweep harness
    static std::string csv_header();
    std::string csv_row() const;
};

// Everything needed to evaluate Theorem-1 delays for one scheme.
struct DelayContext {
    const NetworkInstance* net = nullptr;
    const DemandModel* demand = nullptr;
    const ExpectedRateTable* table = nullptr;
    Scheme scheme = Scheme::CooperativeBeamforming;

    DelayContext(const NetworkInstance& n, const DemandModel& d, const ExpectedRateTable& t,
                 Scheme s);

    // bitmask over serving_sets[k] of BSs caching file n
    int cached_mask(int k, int n, const Placement& p) const;

    // delay for a given cached mask; mask 0 is the backhaul branch
    double pair_delay(int k, int n, int mask) const;

    double request_delay(int k, int n, const Placement& p) const {
        return pair_delay(k, n, cached_mask(k, n, p));
    }

    // BS indices that actually transmit (beamforming: all cachers;
    // non-cooperative: the best-rate caching singleton, ties to the lower index)
    std::vector<int> serving_subset(int k, int n, const Placement& p) const;

    double miss_delay(int k, int n) const;
};

EvalReport objective(const Placement& placement, const DelayContext& ctx);
double hit_probability(const Placement& placement, const DelayContext& ctx);

}  // namespace fgc
