#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fgc/greedy.hpp"
#include "fgc/oracle.hpp"

using namespace fgc;

namespace {

struct Fixture {
    NetworkInstance net;
    ChannelParams channel;
    LinkGainTable gains;
    ExpectedRateTable table;
    DemandModel demand;

    Fixture(Scheme scheme, uint64_t seed, int bs, int users, int files, double gamma = 0.8) {
        net = build_grid_topology(bs, users, 150.0, 200.0, seed);
        channel.mc_samples = 2000;
        channel.mc_seed = seed + 100;
        gains = build_link_gains(net, channel);
        table = build_rate_table(net, gains, channel, scheme);
        demand = zipf_preferences(files, std::vector<double>(users, gamma), seed);
        demand.file_bits = 1e8;
    }
};

}  // namespace

TEST_CASE("greedy fills the budget while positive gains remain") {
    Fixture f(Scheme::CooperativeBeamforming, 3, 2, 8, 6);
    DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
    auto res = greedy_place(ctx, {3, 3});
    CHECK(res.placement.load[0] == 3);
    CHECK(res.placement.load[1] == 3);
    CHECK(static_cast<int>(res.trace.steps.size()) == 6);
    // every selected gain is positive and the objective trace is decreasing
    double prev = objective(Placement(6, 2, {3, 3}), ctx).average_delay_s;
    for (const auto& step : res.trace.steps) {
        CHECK(step.gain > 0.0);
        CHECK(step.objective_after == doctest::Approx(prev - step.gain).epsilon(1e-9));
        prev = step.objective_after;
    }
}

TEST_CASE("selected gains are non-increasing step to step") {
    Fixture f(Scheme::CooperativeBeamforming, 9, 3, 12, 8);
    DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
    auto res = greedy_place(ctx, {2, 2, 2});
    for (size_t s = 1; s < res.trace.steps.size(); ++s)
        CHECK(res.trace.steps[s].gain <= res.trace.steps[s - 1].gain + 1e-12);
}

TEST_CASE("lazy and eager make identical selections, the lazy one cheaper") {
    for (uint64_t seed : {1, 2, 3, 4, 5}) {
        for (Scheme scheme : {Scheme::CooperativeBeamforming, Scheme::NonCooperative}) {
            Fixture f(scheme, seed, 3, 10, 12);
            DelayContext ctx(f.net, f.demand, f.table, scheme);
            auto eager = greedy_place(ctx, {4, 4, 4});
            auto lazy = greedy_place_lazy(ctx, {4, 4, 4});
            REQUIRE(eager.trace.steps.size() == lazy.trace.steps.size());
            for (size_t s = 0; s < eager.trace.steps.size(); ++s) {
                CHECK(eager.trace.steps[s].bs == lazy.trace.steps[s].bs);
                CHECK(eager.trace.steps[s].file == lazy.trace.steps[s].file);
            }
            CHECK(lazy.placement.x == eager.placement.x);
            CHECK(lazy.trace.calculations <= eager.trace.calculations);
        }
    }
}

TEST_CASE("single-BS case reduces to the top files by aggregate weighted gain") {
    Fixture f(Scheme::CooperativeBeamforming, 17, 1, 4, 6);
    DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
    auto res = greedy_place(ctx, {2});
    // with one BS caching n helps every covered user identically in rate, so
    // the chosen files maximize sum_k p_nk * (miss - hit) per file
    std::vector<double> score(6, 0.0);
    for (int k = 0; k < 4; ++k) {
        double saving = ctx.miss_delay(k, 0) - f.demand.file_bits / f.table.rate(k, 1);
        for (int n = 0; n < 6; ++n) score[n] += f.demand.preferences[k][n] * saving;
    }
    std::vector<int> order{0, 1, 2, 3, 4, 5};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
    CHECK(res.placement.get(order[0], 0));
    CHECK(res.placement.get(order[1], 0));
}

TEST_CASE("greedy achieves at least half the optimal improvement on micro instances") {
    double worst = 1.0;
    for (uint64_t seed = 1; seed <= 15; ++seed) {
        Fixture f(Scheme::CooperativeBeamforming, seed, 2, 4, 4, 1.0);
        DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
        std::vector<int> caps{1, 2};
        double base = objective(Placement(4, 2, caps), ctx).average_delay_s;
        auto g = greedy_place(ctx, caps);
        auto opt = brute_force_optimal(ctx, caps);
        double best = base - opt.objective;
        if (best <= 1e-12) continue;
        double got = base - objective(g.placement, ctx).average_delay_s;
        worst = std::min(worst, got / best);
        CHECK(got <= best + 1e-9);
    }
    CHECK(worst >= 0.5);
}

TEST_CASE("zero capacity yields the empty placement") {
    Fixture f(Scheme::CooperativeBeamforming, 23, 2, 5, 4);
    DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
    auto res = greedy_place(ctx, {0, 0});
    CHECK(res.trace.steps.empty());
    for (uint8_t v : res.placement.x) CHECK(v == 0);
}

TEST_CASE("popularity baselines cache the top files with index tie-breaks") {
    NetworkInstance net = build_grid_topology(2, 8, 150.0, 200.0, 29);
    DemandModel demand = zipf_preferences(6, std::vector<double>(8, 0.9), 29);
    PopularityAggregates agg = aggregate_popularity(demand, net);

    Placement g = gpc_place({2, 2}, agg);
    std::vector<int> order{0, 1, 2, 3, 4, 5};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return agg.global[a] > agg.global[b]; });
    for (int m = 0; m < 2; ++m) {
        CHECK(g.get(order[0], m));
        CHECK(g.get(order[1], m));
    }

    Placement l = lpc_place({2, 2}, agg);
    for (int m = 0; m < 2; ++m) {
        std::vector<int> local{0, 1, 2, 3, 4, 5};
        std::stable_sort(local.begin(), local.end(),
                         [&](int a, int b) { return agg.local[m][a] > agg.local[m][b]; });
        CHECK(l.get(local[0], m));
        CHECK(l.get(local[1], m));
    }
}

TEST_CASE("popularity ties go to the lower file index") {
    PopularityAggregates agg;
    agg.global = {0.25, 0.25, 0.25, 0.25};
    agg.local = {{0.25, 0.25, 0.25, 0.25}};
    Placement p = gpc_place({2}, agg);
    CHECK(p.get(0, 0));
    CHECK(p.get(1, 0));
    CHECK(!p.get(2, 0));
    Placement q = lpc_place({2}, agg);
    CHECK(q.get(0, 0));
    CHECK(q.get(1, 0));
}

TEST_CASE("trace CSV has the documented columns") {
    Fixture f(Scheme::CooperativeBeamforming, 31, 2, 5, 4);
    DelayContext ctx(f.net, f.demand, f.table, Scheme::CooperativeBeamforming);
    auto res = greedy_place(ctx, {1, 1});
    std::string csv = res.trace.csv();
    CHECK(csv.rfind("step,bs,file,gain,objective,calculations\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(res.trace.steps.size()) + 1);
}
