#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "fgc/errors.hpp"
#include "fgc/expint.hpp"
#include "fgc/rates.hpp"
#include "fgc/rng.hpp"

using namespace fgc;

namespace {

ChannelParams test_channel(int samples = 10000, uint64_t seed = 1) {
    ChannelParams ch;
    ch.mc_samples = samples;
    ch.mc_seed = seed;
    return ch;
}

// Gauss-Legendre quadrature of f on [a, b]
template <typename F>
double quad(F f, double a, double b, int panels = 200) {
    static const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                0.8611363115940526};
    static const double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                0.3478548451374538};
    double h = (b - a) / panels, total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        for (int i = 0; i < 4; ++i) total += w[i] * f(mid + 0.5 * h * x[i]);
    }
    return total * 0.5 * h;
}

}  // namespace

TEST_CASE("exponential integral at 1 matches the tabulated value") {
    // Abramowitz & Stegun 5.1.56 neighborhood: E1(1) = 0.219383934...
    CHECK(expint_e1(1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-12));
    CHECK(expint_e1_scaled(1.0) == doctest::Approx(std::exp(1.0) * 0.21938393439552026).epsilon(1e-12));
}

TEST_CASE("exponential integral agrees with quadrature across regimes") {
    for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        // E1(x) = int_0^inf exp(-x e^s) ds after t = x e^s; the integrand is
        // smooth, so fixed panels resolve it at every x
        double ref = quad([&](double s) { return std::exp(-x * std::exp(s)); }, 0.0,
                          std::log(800.0 / x), 4000);
        CHECK(expint_e1(x) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("link gain hits the edge SNR at the cell radius and clamps near the BS") {
    ChannelParams ch = test_channel();
    CHECK(link_gain(150.0, 150.0, ch) == doctest::Approx(1.0));
    CHECK(link_gain(75.0, 150.0, ch) == doctest::Approx(std::pow(0.5, -3.5)));
    CHECK(link_gain(0.0, 150.0, ch) == link_gain(1.0, 150.0, ch)); // 1 m floor
    CHECK(link_gain(150.0, 150.0, ch) > link_gain(151.0, 150.0, ch));
}

TEST_CASE("closed-form single-link rate equals the log-integral") {
    ChannelParams ch = test_channel();
    for (double c : {0.05, 0.3, 1.0, 4.0, 50.0}) {
        double nats = quad([&](double g) { return std::log1p(c * g) * std::exp(-g); }, 0.0, 60.0,
                           4000);
        double ref = ch.bandwidth_hz * nats / std::numbers::ln2;
        CHECK(expected_rate_closed(c, ch) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("unit gain closed form reproduces e E1(1) / ln 2") {
    ChannelParams ch = test_channel();
    double expect = ch.bandwidth_hz * std::exp(1.0) * 0.21938393439552026 / std::numbers::ln2;
    CHECK(expected_rate_closed(1.0, ch) == doctest::Approx(expect).epsilon(1e-12));
    // about 0.860 bits/s/Hz
    CHECK(expected_rate_closed(1.0, ch) / ch.bandwidth_hz ==
          doctest::Approx(0.8603).epsilon(1e-3));
}

TEST_CASE("Monte Carlo rate matches the closed form within three standard errors") {
    ChannelParams ch = test_channel(20000);
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        double c = std::exp(rng.uniform(std::log(0.01), std::log(100.0)));
        McEstimate est = expected_rate_mc_stats({c}, ch, 1000 + trial);
        double closed = expected_rate_closed(c, ch);
        CHECK(std::abs(est.mean - closed) < 3.0 * est.std_error + 1e-9);
    }
}

TEST_CASE("beamforming over equal links beats a single link") {
    ChannelParams ch = test_channel(40000);
    double one = expected_rate_mc({1.0}, ch, 3);
    double two = expected_rate_mc({1.0, 1.0}, ch, 3);
    CHECK(two > one);
    // E{log2(1 + g1 + g2)} with Exp(1) gains: strictly below doubling
    CHECK(two < 2.0 * one);
}

TEST_CASE("rate table subsets are monotone sample-wise") {
    NetworkInstance net = build_grid_topology(3, 12, 150.0, 200.0, 31);
    ChannelParams ch = test_channel(3000, 8);
    LinkGainTable gains = build_link_gains(net, ch);
    for (Scheme scheme : {Scheme::CooperativeBeamforming, Scheme::NonCooperative}) {
        ExpectedRateTable table = build_rate_table(net, gains, ch, scheme);
        for (int k = 0; k < net.num_users; ++k) {
            int d = table.degree(k);
            CHECK(table.rate(k, 0) == 0.0);
            for (int mask = 1; mask < (1 << d); ++mask)
                for (int pos = 0; pos < d; ++pos)
                    if (mask & (1 << pos))
                        CHECK(table.rate(k, mask) >= table.rate(k, mask & ~(1 << pos)));
            CHECK(table.uncached(k) > 0.0);
        }
    }
}

TEST_CASE("non-cooperative subset rate is the best singleton") {
    NetworkInstance net = build_grid_topology(3, 15, 150.0, 200.0, 37);
    ChannelParams ch = test_channel(2000, 14);
    LinkGainTable gains = build_link_gains(net, ch);
    ExpectedRateTable table = build_rate_table(net, gains, ch, Scheme::NonCooperative);
    for (int k = 0; k < net.num_users; ++k) {
        int d = table.degree(k);
        for (int mask = 1; mask < (1 << d); ++mask) {
            double best = 0.0;
            for (int pos = 0; pos < d; ++pos)
                if (mask & (1 << pos)) best = std::max(best, table.rate(k, 1 << pos));
            CHECK(table.rate(k, mask) == doctest::Approx(best).epsilon(1e-12));
        }
    }
}

TEST_CASE("uncached rate uses the full serving set under beamforming") {
    NetworkInstance net = build_grid_topology(2, 8, 150.0, 200.0, 41);
    ChannelParams ch = test_channel(2000, 15);
    LinkGainTable gains = build_link_gains(net, ch);
    ExpectedRateTable coop = build_rate_table(net, gains, ch, Scheme::CooperativeBeamforming);
    ExpectedRateTable solo = build_rate_table(net, gains, ch, Scheme::NonCooperative);
    for (int k = 0; k < net.num_users; ++k) {
        int d = coop.degree(k);
        CHECK(coop.uncached(k) == doctest::Approx(coop.rate(k, (1 << d) - 1)).epsilon(1e-12));
        double best = 0.0;
        for (int pos = 0; pos < d; ++pos) best = std::max(best, solo.rate(k, 1 << pos));
        CHECK(solo.uncached(k) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("rate table cache round-trips and rejects stamp mismatches") {
    NetworkInstance net = build_grid_topology(2, 6, 150.0, 200.0, 43);
    ChannelParams ch = test_channel(1500, 21);
    LinkGainTable gains = build_link_gains(net, ch);
    ExpectedRateTable table = build_rate_table(net, gains, ch, Scheme::CooperativeBeamforming);
    auto path = std::filesystem::temp_directory_path() / "fgc_rates_cache.frt";
    save_rate_table(path.string(), table);
    ExpectedRateTable loaded =
        load_rate_table(path.string(), ch, Scheme::CooperativeBeamforming);
    for (int k = 0; k < net.num_users; ++k)
        for (size_t mask = 0; mask < table.users[k].subset_rate.size(); ++mask)
            CHECK(loaded.users[k].subset_rate[mask] == table.users[k].subset_rate[mask]);

    ChannelParams other = test_channel(1500, 22);
    CHECK_THROWS_AS(load_rate_table(path.string(), other, Scheme::CooperativeBeamforming),
                    ConfigError);
    CHECK_THROWS_AS(load_rate_table(path.string(), ch, Scheme::NonCooperative), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("identical seeds give identical tables") {
    NetworkInstance net = build_grid_topology(2, 6, 150.0, 200.0, 47);
    ChannelParams ch = test_channel(1000, 33);
    LinkGainTable gains = build_link_gains(net, ch);
    ExpectedRateTable a = build_rate_table(net, gains, ch, Scheme::CooperativeBeamforming);
    ExpectedRateTable b = build_rate_table(net, gains, ch, Scheme::CooperativeBeamforming);
    for (int k = 0; k < net.num_users; ++k)
        CHECK(a.users[k].subset_rate == b.users[k].subset_rate);
}
