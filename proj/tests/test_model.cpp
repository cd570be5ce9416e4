#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "fgc/errors.hpp"
#include "fgc/model.hpp"

using namespace fgc;

namespace {
double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }
}

TEST_CASE("line topology places BSs at the given spacing") {
    NetworkInstance net = build_grid_topology(4, 20, 150.0, 200.0, 3);
    REQUIRE(net.num_bs == 4);
    for (int m = 0; m < 4; ++m) {
        CHECK(net.bs_positions[m].x == doctest::Approx(200.0 * m));
        CHECK(net.bs_positions[m].y == 0.0);
    }
}

TEST_CASE("connectivity is exactly the radius rule and every user is covered") {
    NetworkInstance net = build_grid_topology(3, 40, 150.0, 200.0, 11);
    for (int k = 0; k < net.num_users; ++k) {
        int covered = 0;
        for (int m = 0; m < net.num_bs; ++m) {
            bool in = dist(net.user_positions[k], net.bs_positions[m]) <= net.cell_radius;
            CHECK(net.connectivity[k][m] == (in ? 1 : 0));
            covered += in;
        }
        CHECK(covered >= 1);
    }
}

TEST_CASE("coverage and serving sets are the matrix supports") {
    NetworkInstance net = build_grid_topology(3, 25, 150.0, 200.0, 5);
    for (int m = 0; m < net.num_bs; ++m)
        for (int k : net.coverage_sets[m]) CHECK(net.connectivity[k][m] == 1);
    for (int k = 0; k < net.num_users; ++k) {
        CHECK(!net.serving_sets[k].empty());
        for (int m : net.serving_sets[k]) CHECK(net.connectivity[k][m] == 1);
        CHECK(std::is_sorted(net.serving_sets[k].begin(), net.serving_sets[k].end()));
    }
}

TEST_CASE("same seed reproduces the drop; different seed moves it") {
    NetworkInstance a = build_grid_topology(2, 10, 150.0, 200.0, 42);
    NetworkInstance b = build_grid_topology(2, 10, 150.0, 200.0, 42);
    NetworkInstance c = build_grid_topology(2, 10, 150.0, 200.0, 43);
    for (int k = 0; k < 10; ++k) {
        CHECK(a.user_positions[k].x == b.user_positions[k].x);
        CHECK(a.user_positions[k].y == b.user_positions[k].y);
    }
    bool any_diff = false;
    for (int k = 0; k < 10; ++k) any_diff |= a.user_positions[k].x != c.user_positions[k].x;
    CHECK(any_diff);
}

TEST_CASE("invalid geometry is rejected") {
    CHECK_THROWS_AS(build_grid_topology(0, 5, 150.0, 200.0, 1), ConfigError);
    CHECK_THROWS_AS(build_grid_topology(2, 0, 150.0, 200.0, 1), ConfigError);
    CHECK_THROWS_AS(build_grid_topology(2, 5, -1.0, 200.0, 1), ConfigError);
    // no overlap between adjacent cells
    CHECK_THROWS_AS(build_grid_topology(2, 5, 90.0, 200.0, 1), ConfigError);
}

TEST_CASE("zipf rows are normalized and ordered by the seeded permutation") {
    DemandModel d = zipf_preferences(50, std::vector<double>(4, 1.2), 9);
    for (int k = 0; k < 4; ++k) {
        double sum = 0.0;
        std::set<int> ranks;
        for (int n = 0; n < 50; ++n) {
            sum += d.preferences[k][n];
            CHECK(d.preferences[k][n] > 0.0);
            ranks.insert(d.permutations[k][n]);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(static_cast<int>(ranks.size()) == 50); // a true permutation of 1..N
        CHECK(*ranks.begin() == 1);
        CHECK(*ranks.rbegin() == 50);
        // weight follows rank: rank 1 file has the largest probability
        for (int n = 0; n < 50; ++n)
            if (d.permutations[k][n] == 1)
                for (int n2 = 0; n2 < 50; ++n2) CHECK(d.preferences[k][n] >= d.preferences[k][n2]);
    }
}

TEST_CASE("zipf weight ratio matches the rank ratio") {
    DemandModel d = zipf_preferences(10, {2.0}, 21);
    int top = -1, second = -1;
    for (int n = 0; n < 10; ++n) {
        if (d.permutations[0][n] == 1) top = n;
        if (d.permutations[0][n] == 2) second = n;
    }
    CHECK(d.preferences[0][top] / d.preferences[0][second] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("gamma 0 is uniform") {
    DemandModel d = zipf_preferences(8, {0.0}, 2);
    for (int n = 0; n < 8; ++n) CHECK(d.preferences[0][n] == doctest::Approx(1.0 / 8));
}

TEST_CASE("per-user gamma list must match the user count downstream") {
    DemandModel d = zipf_preferences(5, {0.5, 1.0, 1.5}, 7);
    CHECK(d.num_users() == 3);
    CHECK(d.zipf_gammas[2] == 1.5);
}

TEST_CASE("support sets cover exactly the positive preferences") {
    DemandModel d = zipf_preferences(12, {0.7, 0.9}, 13);
    for (int k = 0; k < 2; ++k) {
        CHECK(static_cast<int>(d.support_sets[k].size()) == 12);
        for (int n : d.support_sets[k]) CHECK(d.support_index[k][n] >= 0);
    }
}

TEST_CASE("local popularity averages the covered users; empty cells fall back to uniform") {
    NetworkInstance net = build_grid_topology(3, 12, 150.0, 200.0, 17);
    DemandModel d = zipf_preferences(6, std::vector<double>(12, 0.8), 17);
    PopularityAggregates agg = aggregate_popularity(d, net);
    double gsum = 0.0;
    for (double v : agg.global) gsum += v;
    CHECK(gsum == doctest::Approx(1.0).epsilon(1e-12));
    for (int m = 0; m < 3; ++m) {
        double lsum = 0.0;
        for (double v : agg.local[m]) lsum += v;
        CHECK(lsum == doctest::Approx(1.0).epsilon(1e-12));
        if (!net.coverage_sets[m].empty()) {
            for (int n = 0; n < 6; ++n) {
                double expect = 0.0;
                for (int k : net.coverage_sets[m]) expect += d.preferences[k][n];
                expect /= static_cast<double>(net.coverage_sets[m].size());
                CHECK(agg.local[m][n] == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("instance serialization round-trips losslessly") {
    NetworkInstance net = build_grid_topology(3, 15, 150.0, 200.0, 23);
    DemandModel d = zipf_preferences(9, std::vector<double>(15, 0.65), 23);
    d.file_bits = 1e8;
    d.backhaul_delay_s = 40.0;
    auto path = std::filesystem::temp_directory_path() / "fgc_model_roundtrip.fgi";
    save_instance(path.string(), net, d);
    auto [net2, d2] = load_instance(path.string());
    CHECK(net2.num_bs == net.num_bs);
    CHECK(net2.num_users == net.num_users);
    CHECK(net2.seed == net.seed);
    for (int k = 0; k < net.num_users; ++k) {
        CHECK(net2.user_positions[k].x == net.user_positions[k].x);
        CHECK(net2.serving_sets[k] == net.serving_sets[k]);
        for (int n = 0; n < 9; ++n) CHECK(d2.preferences[k][n] == d.preferences[k][n]);
    }
    CHECK(d2.file_bits == d.file_bits);
    CHECK(d2.backhaul_delay_s == d.backhaul_delay_s);
    std::filesystem::remove(path);
}

TEST_CASE("loading a truncated instance names the line") {
    NetworkInstance net = build_grid_topology(2, 4, 150.0, 200.0, 29);
    DemandModel d = zipf_preferences(3, std::vector<double>(4, 0.5), 29);
    auto path = std::filesystem::temp_directory_path() / "fgc_model_truncated.fgi";
    save_instance(path.string(), net, d);
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_instance(path.string()), ParseError);
    std::filesystem::remove(path);
}
