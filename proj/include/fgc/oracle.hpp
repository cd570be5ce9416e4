#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fgc/bp.hpp"
#include "fgc/delay.hpp"

namespace fgc {

// Exhaustive search over feasible placements. Guarded: the product of per-BS
// subset counts must stay below 1e7.
struct BruteForceResult {
    Placement placement;
    double objective = 0.0;
    long long evaluated = 0;
};
BruteForceResult brute_force_optimal(const DelayContext& ctx, const std::vector<int>& capacities);

// Slot-level download simulation: fresh fading each slot, delivered bits
// accumulate until the file completes. Used to validate the expected-delay
// formula against actual slot counts.
struct SlotSimConfig {
    int max_slots = 200000;
    int trials = 2000;
    uint64_t seed = 1;
};
struct SlotSimResult {
    double mean_delay_s = 0.0;
    double std_error_s = 0.0;
    int truncated_trials = 0;
};
SlotSimResult simulate_download(const DelayContext& ctx, const LinkGainTable& gains,
                                const ChannelParams& channel, int user, int file,
                                const Placement& placement, const SlotSimConfig& cfg);

// One literal max-product round over the two-valued message tables, with no
// log-ratio shortcut anywhere: function-node maxima are taken by enumerating
// neighbor configurations. Graphs are restricted to at most 6 variables.
struct RawMessages {
    // per eta edge and per variable, normalized (m0 + m1 = 1)
    std::vector<std::array<double, 2>> alpha_eta;
    std::vector<std::array<double, 2>> beta_eta;
    std::vector<std::array<double, 2>> alpha_g;
    std::vector<std::array<double, 2>> beta_g;

    void init(const FactorGraph& g);
    // log(m1/m0) views for comparison with the ratio implementation
    double alpha_eta_ratio(int edge) const;
    double beta_eta_ratio(int edge) const;
    double alpha_g_ratio(int i) const;
    double beta_g_ratio(int i) const;
};
RawMessages raw_max_product_round(const FactorGraph& graph, const DelayContext& ctx,
                                  const std::vector<int>& capacities, const RawMessages& prev);

// Randomized check of diminishing returns and monotonicity of the cache-hit
// objective: draws nested feasible placements plus an addable element and
// reports the worst slack seen.
struct SubmodularityReport {
    int trials = 0;
    double min_submodular_slack = 0.0; // gain(small) - gain(large)
    double min_monotone_gain = 0.0;    // smallest single-element gain
};
SubmodularityReport submodularity_probe(const DelayContext& ctx,
                                        const std::vector<int>& capacities, int trials,
                                        uint64_t seed);

}  // namespace fgc
