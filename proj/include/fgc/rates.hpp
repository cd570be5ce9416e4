#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgc/model.hpp"

namespace fgc {

enum class Scheme { NonCooperative, CooperativeBeamforming };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// Mean received SNR per link, zero where not connected.
struct LinkGainTable {
    std::vector<std::vector<double>> gain; // K x M, c_km
};

// c(d) = edge_snr * (max(d, 1m) / cell_radius)^(-pathloss_exponent)
double link_gain(double distance_m, double cell_radius, const ChannelParams& channel);

LinkGainTable build_link_gains(const NetworkInstance& net, const ChannelParams& channel);

// Monte Carlo E{B log2(1 + sum_i c_i g_i)} with g ~ Exp(1); deterministic for a seed.
double expected_rate_mc(const std::vector<double>& gains, const ChannelParams& channel,
                        uint64_t seed);
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};
McEstimate expected_rate_mc_stats(const std::vector<double>& gains, const ChannelParams& channel,
                                  uint64_t seed);

// Analytic single-link oracle: B * e^(1/c) * E1(1/c) / ln 2.
double expected_rate_closed(double gain, const ChannelParams& channel);

// Expected delivery rate for every subset of each user's serving set.
struct UserRates {
    std::vector<int> serving;        // A_k, ascending BS indices
    std::vector<double> subset_rate; // indexed by bitmask over `serving`, [0] == 0
    double uncached_rate = 0.0;      // rate over the fetch set A'_k
};

struct ExpectedRateTable {
    Scheme scheme = Scheme::CooperativeBeamforming;
    int mc_samples = 0;
    uint64_t mc_seed = 0;
    std::vector<UserRates> users;

    double rate(int k, int mask) const { return users[k].subset_rate[mask]; }
    double uncached(int k) const { return users[k].uncached_rate; }
    int degree(int k) const { return static_cast<int>(users[k].serving.size()); }
};

// Subsets share one gain draw per (user, BS) per sample, so monotonicity is
// exact sample-wise. Serving sets larger than 8 BSs are rejected.
ExpectedRateTable build_rate_table(const NetworkInstance& net, const LinkGainTable& gains,
                                   const ChannelParams& channel, Scheme scheme);

// .frt text cache; loading fails if seed/sample count/scheme disagree.
void save_rate_table(const std::string& path, const ExpectedRateTable& table);
ExpectedRateTable load_rate_table(const std::string& path, const ChannelParams& channel,
                                  Scheme scheme);

}  // namespace fgc
