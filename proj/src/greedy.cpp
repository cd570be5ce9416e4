#include "fgc/greedy.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <sstream>

#include "fgc/errors.hpp"

namespace fgc {

std::string SolveTrace::csv() const {
    std::ostringstream out;
    out << "step,bs,file,gain,objective,calculations\n";
    char buf[128];
    for (const auto& s : steps) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.12g,%.12g,%lld\n", s.step, s.bs, s.file,
                      s.gain, s.objective_after, s.calculations);
        out << buf;
    }
    return out.str();
}

IncrementalObjective::IncrementalObjective(const DelayContext& ctx) : ctx_(&ctx) {
    const int K = ctx.net->num_users;
    const int N = ctx.demand->num_files;
    mask_.assign(K, std::vector<uint8_t>(N, 0));
    placed_.assign(static_cast<size_t>(N) * ctx.net->num_bs, 0);
    for (int k = 0; k < K; ++k)
        for (int n : ctx.demand->support_sets[k])
            delay_sum_ += ctx.demand->preferences[k][n] * ctx.miss_delay(k, n);
}

double IncrementalObjective::marginal_gain(int n, int m) const {
    double delta = 0.0;
    for (int k : ctx_->net->coverage_sets[m]) {
        double p = ctx_->demand->preferences[k][n];
        if (p <= 0) continue;
        const auto& serving = ctx_->table->users[k].serving;
        int pos = static_cast<int>(std::lower_bound(serving.begin(), serving.end(), m) -
                                   serving.begin());
        int old_mask = mask_[k][n];
        int new_mask = old_mask | (1 << pos);
        delta += p * (ctx_->pair_delay(k, n, old_mask) - ctx_->pair_delay(k, n, new_mask));
    }
    return delta / ctx_->net->num_users;
}

void IncrementalObjective::add(int n, int m) {
    size_t idx = static_cast<size_t>(m) * ctx_->demand->num_files + n;
    if (placed_[idx]) throw SolverError("greedy: element added twice");
    placed_[idx] = 1;
    for (int k : ctx_->net->coverage_sets[m]) {
        double p = ctx_->demand->preferences[k][n];
        const auto& serving = ctx_->table->users[k].serving;
        int pos = static_cast<int>(std::lower_bound(serving.begin(), serving.end(), m) -
                                   serving.begin());
        int old_mask = mask_[k][n];
        int new_mask = old_mask | (1 << pos);
        mask_[k][n] = static_cast<uint8_t>(new_mask);
        if (p > 0)
            delay_sum_ -= p * (ctx_->pair_delay(k, n, old_mask) - ctx_->pair_delay(k, n, new_mask));
    }
}

GreedyResult greedy_place(const DelayContext& ctx, const std::vector<int>& capacities) {
    const int N = ctx.demand->num_files;
    const int M = ctx.net->num_bs;
    Placement placement(N, M, capacities);
    IncrementalObjective inc(ctx);
    SolveTrace trace;

    // candidate pool Y, kept per BS so a full BS drops its whole block
    std::vector<std::vector<uint8_t>> available(M, std::vector<uint8_t>(N, 1));
    std::vector<uint8_t> bs_open(M, 1);
    for (int m = 0; m < M; ++m)
        if (capacities[m] == 0) bs_open[m] = 0;

    int step = 0;
    for (;;) {
        double best_gain = -1.0;
        int best_i = -1;
        bool any_candidate = false;
        for (int m = 0; m < M; ++m) {
            if (!bs_open[m]) continue;
            for (int n = 0; n < N; ++n) {
                if (!available[m][n]) continue;
                any_candidate = true;
                double g = inc.marginal_gain(n, m);
                ++trace.calculations;
                int i = m * N + n;
                if (g > best_gain || (g == best_gain && i < best_i)) {
                    best_gain = g;
                    best_i = i;
                }
            }
        }
        if (!any_candidate || best_gain <= 0.0) break;

        int m = best_i / N, n = best_i % N;
        inc.add(n, m);
        placement.set(n, m, true);
        available[m][n] = 0;
        if (placement.load[m] == capacities[m]) bs_open[m] = 0;
        trace.steps.push_back(
            {++step, m, n, best_gain, inc.average_delay(), trace.calculations});
    }
    placement.check_feasible();
    return {std::move(placement), std::move(trace)};
}

GreedyResult greedy_place_lazy(const DelayContext& ctx, const std::vector<int>& capacities) {
    const int N = ctx.demand->num_files;
    const int M = ctx.net->num_bs;
    Placement placement(N, M, capacities);
    IncrementalObjective inc(ctx);
    SolveTrace trace;

    struct Entry {
        double gain;
        int ground_index;
        int round; // round the gain was computed in
        bool operator<(const Entry& o) const {
            if (gain != o.gain) return gain < o.gain;
            return ground_index > o.ground_index;
        }
    };
    std::priority_queue<Entry> heap;
    for (int m = 0; m < M; ++m) {
        if (capacities[m] == 0) continue;
        for (int n = 0; n < N; ++n) {
            heap.push({inc.marginal_gain(n, m), m * N + n, 0});
            ++trace.calculations;
        }
    }

    int step = 0;
    int round = 0;
    while (!heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        int m = top.ground_index / N, n = top.ground_index % N;
        if (placement.load[m] >= capacities[m]) continue; // BS full, block dropped
        if (top.round != round) {
            top.gain = inc.marginal_gain(n, m);
            ++trace.calculations;
            top.round = round;
            heap.push(top);
            continue;
        }
        if (top.gain <= 0.0) break; // submodularity: every other gain is <= this one
        inc.add(n, m);
        placement.set(n, m, true);
        ++round;
        trace.steps.push_back(
            {++step, m, n, top.gain, inc.average_delay(), trace.calculations});
    }
    placement.check_feasible();
    return {std::move(placement), std::move(trace)};
}

namespace {
Placement popularity_place(const std::vector<int>& capacities,
                           const std::vector<std::vector<double>>& scores, int num_files) {
    const int M = static_cast<int>(capacities.size());
    Placement placement(num_files, M, capacities);
    for (int m = 0; m < M; ++m) {
        const auto& score = scores[m];
        std::vector<int> order(num_files);
        for (int n = 0; n < num_files; ++n) order[n] = n;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return score[a] > score[b]; });
        int q = std::min(capacities[m], num_files);
        for (int i = 0; i < q; ++i) placement.set(order[i], m, true);
    }
    return placement;
}
}  // namespace

Placement gpc_place(const std::vector<int>& capacities, const PopularityAggregates& agg) {
    std::vector<std::vector<double>> scores(capacities.size(), agg.global);
    return popularity_place(capacities, scores, static_cast<int>(agg.global.size()));
}

Placement lpc_place(const std::vector<int>& capacities, const PopularityAggregates& agg) {
    return popularity_place(capacities, agg.local, static_cast<int>(agg.global.size()));
}

}  // namespace fgc
