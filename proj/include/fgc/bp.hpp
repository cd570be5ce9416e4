#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgc/delay.hpp"

namespace fgc {

// Bipartite factor graph: one variable per (file, BS), one eta function per
// (file, user) pair with p_nk > 0, one capacity function per BS.
// Indexing follows the ground-set convention i = m*N + n; function ids are
// j = sum_{l<k} |F_l| + xi(n,k) for eta nodes and j = sum_k |F_k| + m for
// capacity nodes.
struct FactorGraph {
    int num_files = 0; // N
    int num_bs = 0;    // M
    int num_vars = 0;  // I = N*M
    const NetworkInstance* net = nullptr;
    const DemandModel* demand = nullptr;

    struct EtaNode {
        int file = 0;
        int user = 0;
        int owner_bs = 0; // the single BS that updates this node's messages
    };
    std::vector<EtaNode> etas; // ordered by (user, xi)

    // flattened adjacency: eta j touches vars (file, m) for m in A_user,
    // stored as positions into serving_sets[user]
    std::vector<int> eta_offset;           // size etas+1 into edge arrays
    std::vector<std::pair<int, int>> var_adj_entries; // (eta id, position)
    std::vector<int> var_adj_offset;       // size num_vars+1

    std::vector<int> user_owner;           // owner BS per user (lowest-index serving BS)
    std::vector<std::vector<int>> processed_users; // per BS: users it owns (U~_m)

    int var_index(int n, int m) const { return m * num_files + n; }
    int eta_degree(int j) const { return eta_offset[j + 1] - eta_offset[j]; }
    int num_function_nodes() const { return static_cast<int>(etas.size()) + num_bs; }
    int eta_function_id(int j) const { return j; } // etas are laid out first
    int capacity_function_id(int m) const { return static_cast<int>(etas.size()) + m; }
    int num_eta_edges() const { return eta_offset.empty() ? 0 : eta_offset.back(); }
};

FactorGraph build_factor_graph(const NetworkInstance& net, const DemandModel& demand);

// How the eta-node max over neighbor configurations is evaluated:
//  ExactMax      - literal maximization over all on/off configurations of the
//                  other neighbors (what the max-product recursion computes);
//  PositiveOnly  - shortcut that switches on exactly the neighbors whose
//                  incoming message is positive.
enum class EtaRule { ExactMax, PositiveOnly };

struct BPOptions {
    int t_max = 200;
    double epsilon = 1e-6;
    double damping = 0.0; // lambda on variable->function updates
    int stable_rounds = 3;
    EtaRule eta_rule = EtaRule::ExactMax;
};

// Log-ratio messages. Eta messages are stored flat per edge (eta_offset
// layout); each variable exchanges a single scalar pair with its capacity node.
struct MessageState {
    std::vector<double> alpha_eta; // variable -> eta, per eta edge
    std::vector<double> beta_eta;  // eta -> variable, per eta edge
    std::vector<double> alpha_g;   // variable -> its capacity node, per variable
    std::vector<double> beta_g;    // capacity node -> variable, per variable
    std::vector<double> belief;    // b~_i, from the current round's beta
    std::vector<uint8_t> estimate; // mu^_i
    int t = 0;

    void init(const FactorGraph& g);
};

// single message updates (exposed for tests; operate on round-t inputs)
double update_alpha_eta(const FactorGraph& g, const MessageState& s, int eta, int pos,
                        double damping);
double update_beta_eta(const FactorGraph& g, const MessageState& s, const DelayContext& ctx,
                       int eta, int pos, EtaRule rule, const std::vector<uint8_t>& clamped_bs);
// beta from capacity node g_m to every adjacent variable, written into `out`
void update_beta_cap(const FactorGraph& g, const MessageState& s, int m, int capacity,
                     std::vector<double>& out);

// belief ratio and decision for variable i (ties decide 0)
std::pair<double, bool> belief_and_decide(const FactorGraph& g, const MessageState& s, int i);

struct BPRound {
    int round = 0;
    double objective = 0.0; // average delay of the current estimates
    int changed_estimates = 0;
    double max_delta = 0.0;
    long long messages_computed = 0; // cumulative, all BSs
};

struct BPTrace {
    std::vector<BPRound> rounds;
    bool converged = false;
    int rounds_run = 0;
    bool repaired = false;
    long long messages_computed = 0;          // total scalar messages
    long long messages_exchanged = 0;         // total crossing BS boundaries
    std::vector<long long> computed_per_bs;   // per BS, all rounds
    std::vector<long long> exchanged_per_bs;  // per BS (sent or received remotely)
    std::vector<long long> computed_per_round;  // per BS, a single round
    std::vector<long long> exchanged_per_round;

    std::string csv() const;
};

struct BPResult {
    Placement placement;
    BPTrace trace;
    MessageState state;
};

BPResult bp_solve(const FactorGraph& graph, const DelayContext& ctx,
                  const std::vector<int>& capacities, const BPOptions& options = {});

// Scenario I/II accounting: per-round scalar messages each BS computes and the
// subset that must cross to another BS, scaled by the rounds actually run.
struct ExchangeCounts {
    std::vector<long long> computed;
    std::vector<long long> exchanged;
    long long total_computed = 0;
    long long total_exchanged = 0;
};
ExchangeCounts exchange_accounting(const FactorGraph& graph, int rounds);

}  // namespace fgc
