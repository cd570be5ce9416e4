#pragma once

#include <string>
#include <vector>

#include "fgc/delay.hpp"

namespace fgc {

struct SolveStep {
    int step = 0;
    int bs = 0;
    int file = 0;
    double gain = 0.0;            // marginal gain of -D_bar, per Algorithm-1 argmax
    double objective_after = 0.0; // average delay D_bar(X) after the step
    long long calculations = 0;   // cumulative marginal-gain evaluations
};

struct SolveTrace {
    std::vector<SolveStep> steps;
    long long calculations = 0; // total marginal-gain evaluations

    std::string csv() const; // step,bs,file,gain,objective,calculations
};

// Incremental evaluator over one DelayContext: tracks per-(user,file) cached
// masks so a marginal gain touches only the pairs the candidate affects.
class IncrementalObjective {
public:
    explicit IncrementalObjective(const DelayContext& ctx);

    // gain of adding (file n, BS m) to -D_bar; element must not be placed yet
    double marginal_gain(int n, int m) const;
    void add(int n, int m);

    double average_delay() const { return delay_sum_ / ctx_->net->num_users; }
    const DelayContext& context() const { return *ctx_; }

private:
    const DelayContext* ctx_;
    std::vector<std::vector<uint8_t>> mask_; // K x N cached masks
    double delay_sum_ = 0.0;                 // sum_k sum_n p_nk D_nk
    std::vector<uint8_t> placed_;            // ground-set incidence
    friend class LazyQueue;
};

struct GreedyResult {
    Placement placement;
    SolveTrace trace;
};

// Algorithm-1 eager greedy; ties go to the lowest ground index i = m*N + n.
GreedyResult greedy_place(const DelayContext& ctx, const std::vector<int>& capacities);

// Lazy variant; identical placement and trace selections, fewer evaluations.
GreedyResult greedy_place_lazy(const DelayContext& ctx, const std::vector<int>& capacities);

// Popularity baselines: per-BS top-Q_m files, ties to the lower file index.
Placement gpc_place(const std::vector<int>& capacities, const PopularityAggregates& agg);
Placement lpc_place(const std::vector<int>& capacities, const PopularityAggregates& agg);

}  // namespace fgc
