#include <catch_amalgamated.hpp>

#include <cmath>

#include "sgalab/experiments.hpp"
#include "sgalab/tuner.hpp"

using namespace sgalab;
using Catch::Approx;

namespace {

PopulationStats stats_with(double f_star, double f_bar)
{
    PopulationStats s;
    s.f_star = f_star;
    s.f_bar = f_bar;
    return s;
}

} // namespace

TEST_CASE("flat population is infeasible")
{
    TunerPolicy policy;
    policy.p_m_min = 0.001;
    const auto t = adapt_parameters(stats_with(1.0, 1.0), 0.3, 0.02, 20, policy);
    CHECK_FALSE(t.feasible);
    CHECK(t.p_c == policy.p_c_min);
    CHECK(t.p_m == policy.p_m_min);
}

TEST_CASE("closed-form mutation rate")
{
    TunerPolicy policy;
    for (std::size_t ell : {1, 8, 64, 1000}) {
        const auto t = adapt_parameters(stats_with(2.0, 1.0), 0.1, 0.5, ell, policy);
        REQUIRE(t.feasible);
        CHECK(t.p_c == 0.1);
        CHECK(t.p_m == Approx(1 - std::pow(1.1 / (2 * 0.9), 1.0 / ell)).epsilon(1e-14));
        CHECK(std::abs(pi_parameter(2.0, 1.0, t.p_c, t.p_m, ell) - 1.1) < 1e-9);
        CHECK(ell * t.p_m + t.p_c < std::log(2.0));
    }
}

TEST_CASE("crossover and both modes")
{
    TunerPolicy policy;
    policy.adjust = TuneTarget::crossover;
    const auto c = adapt_parameters(stats_with(3.0, 1.5), 0.5, 0.01, 10, policy);
    REQUIRE(c.feasible);
    CHECK(c.p_m == 0.01);
    CHECK(std::abs(pi_parameter(3.0, 1.5, c.p_c, c.p_m, 10) - 1.1) < 1e-9);

    policy.adjust = TuneTarget::both;
    const auto b = adapt_parameters(stats_with(3.0, 1.5), 0.2, 0.3, 10, policy);
    CHECK(b.p_c == 0.2);
    CHECK(std::abs(pi_parameter(3.0, 1.5, b.p_c, b.p_m, 10) - 1.1) < 1e-9);
}

TEST_CASE("bounds are respected and infeasibility flagged")
{
    TunerPolicy policy;
    policy.p_m_min = 0.05;
    policy.p_m_max = 0.2;
    // ratio 2, p_c 0.1: solution 1 - (1.1/1.8)^{1/4} ~ 0.116 lies inside
    auto t = adapt_parameters(stats_with(2.0, 1.0), 0.1, 0.1, 4, policy);
    CHECK(t.feasible);
    // ell = 100: solution ~ 0.0049 below the lower bound
    t = adapt_parameters(stats_with(2.0, 1.0), 0.1, 0.1, 100, policy);
    CHECK_FALSE(t.feasible);
    CHECK(t.p_m == 0.05);
    // ratio too small for target even with p_m = 0
    t = adapt_parameters(stats_with(1.05, 1.0), 0.1, 0.1, 10, policy);
    CHECK_FALSE(t.feasible);
    CHECK(t.p_m >= policy.p_m_min);
    CHECK(t.p_m <= policy.p_m_max);
    CHECK_THROWS_AS((TunerPolicy{1.0}.validate()), ConfigError);
}

TEST_CASE("frozen policy reproduces the plain GA")
{
    const auto f = sharp_peak(32);
    const auto pop = master_and_zeros(32, 32, f);
    const GaConfig cfg{32, 32, 0.1, 0.02, 77};
    TunerPolicy frozen;
    frozen.adjust = TuneTarget::none;
    RandomStream a(77);
    const auto run = run_adaptive_ga(f, pop, cfg, frozen, 25, a, 2.0);
    RandomStream b(77);
    auto plain = pop;
    for (int n = 0; n < 25; ++n) {
        plain = next_generation(plain, f, cfg, b);
    }
    REQUIRE(plain.size() == run.final_population.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
        REQUIRE(plain.members[i] == run.final_population.members[i]);
        REQUIRE(plain.members[i].descendant == run.final_population.members[i].descendant);
    }
    CHECK(a() == b());
}

TEST_CASE("telemetry pi is consistent")
{
    const auto f = one_max_shifted(20);
    const auto pop = master_and_zeros(20, 20, f);
    RandomStream rng(8);
    const auto run = run_adaptive_ga(f, pop, {20, 20, 0.1, 0.01, 8}, TunerPolicy{}, 30, rng, 21.0);
    REQUIRE(run.telemetry.size() == 30);
    for (const auto& t : run.telemetry) {
        REQUIRE(t.pi == pi_parameter(t.f_star, t.f_bar, t.p_c, t.p_m, 20));
        if (t.feasible) {
            REQUIRE(std::abs(t.pi - 1.1) < 1e-9);
            REQUIRE(0.0 <= t.p_m);
            REQUIRE(t.p_m <= 1.0);
        }
    }
}

TEST_CASE("adaptive control keeps the master more often than pi = 0.8")
{
    const std::size_t m = 64;
    const auto f = sharp_peak(m);
    const auto pop = master_and_zeros(m, m, f);
    const std::size_t horizon = regime_horizon(2.0, m);
    const double p_m = disordered_pm(0.8, 0.1, m);
    const GaConfig cfg{m, m, 0.1, p_m, 0};
    TunerPolicy adaptive;
    TunerPolicy fixed;
    fixed.adjust = TuneTarget::none;
    std::size_t kept_adaptive = 0;
    std::size_t kept_fixed = 0;
    const std::size_t replicas = 1000;
    for (std::size_t r = 0; r < replicas; ++r) {
        for (auto* policy : {&adaptive, &fixed}) {
            RandomStream rng(derive_seed(123, r));
            const auto run = run_adaptive_ga(f, pop, cfg, *policy, horizon, rng, 2.0);
            bool kept = true;
            for (const auto& s : run.stats) {
                kept = kept && s.n_master > 0;
            }
            (policy == &adaptive ? kept_adaptive : kept_fixed) += static_cast<std::size_t>(kept);
        }
    }
    const auto ca = wilson_interval(kept_adaptive, replicas);
    const auto cf = wilson_interval(kept_fixed, replicas);
    CHECK(ca.lo > cf.hi);
}
