#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sgalab/lowerchain.hpp"
#include "sgalab/stats.hpp"

using namespace sgalab;
using Catch::Approx;

namespace {

// Sharp-peak start with one master among m-1 zeros: ratio 2m/(m+1).
LowerChainParams chain(std::size_t m, double pi, double p_c, std::size_t ell)
{
    return LowerChainParams::from_pi(m, pi, 2.0 * m / (m + 1.0), p_c, ell);
}

} // namespace

TEST_CASE("epsilon_m examples")
{
    const auto p = chain(100, 1.44, 0.2, 100);
    CHECK(epsilon_m(p, 0) == 0.0);
    for (std::size_t i = 0; i <= 100; ++i) {
        const double e = epsilon_m_unclamped(p, i);
        if (e < 1.0) {
            REQUIRE(100 * (1 - p.p_c) * e == Approx(i * std::sqrt(p.pi)).epsilon(1e-12));
        }
    }
    CHECK(epsilon_m(p, 10) == Approx(10 * 1.2 / (100 * 0.8)).epsilon(1e-12));
    CHECK(epsilon_m(p, 10) == Approx(0.15).epsilon(1e-12));
    CHECK_THROWS_AS(epsilon_m(p, 101), DomainError);
}

TEST_CASE("parameter consistency is enforced")
{
    LowerChainParams p{6, 1.3, 12.0 / 7.0, 0.1, 0.01, 4, false};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(LowerChainParams::from_pi(6, 2.0, 12.0 / 7.0, 0.1, 4), ConfigError);
    CHECK_THROWS_AS(LowerChainParams::from_pi(5, 1.3, 12.0 / 7.0, 0.1, 4), ConfigError);
}

TEST_CASE("transition matrix at m = 6 equals brute-force convolution")
{
    const auto p = chain(6, 1.3, 0.1, 4);
    const auto mat = transition_matrix(p);
    std::vector<double> eps(7);
    for (std::size_t i = 0; i <= 6; ++i) {
        eps[i] = epsilon_m(p, i);
    }
    const auto brute = oracle::lowerchain_bruteforce(6, 0.1, eps);
    for (std::size_t i = 0; i <= 6; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j <= 6; ++j) {
            REQUIRE(std::abs(mat[i][j] - brute[i][j]) <= 1e-12);
            row += mat[i][j];
        }
        REQUIRE(std::abs(row - 1.0) <= 1e-12);
    }
    CHECK(mat[0][0] == 1.0);
}

TEST_CASE("transition matrix rows are stochastic at m = 64")
{
    const auto mat = transition_matrix(chain(64, 1.5, 0.1, 64));
    for (const auto& row : mat) {
        double s = 0.0;
        for (double v : row) {
            s += v;
        }
        REQUIRE(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(transition_matrix(chain(66, 1.5, 0.1, 66)), CapabilityError);
}

TEST_CASE("restart variant moves 0 to 1")
{
    auto p = chain(6, 1.3, 0.1, 4);
    p.restart_from_zero = true;
    CHECK(transition_matrix(p)[0][1] == 1.0);
    RandomStream rng(1);
    CHECK(transition_sample(p, 0, rng) == 1);
}

TEST_CASE("absorption and p_c = 1")
{
    RandomStream rng(2);
    const auto p = chain(10, 1.3, 0.1, 10);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(transition_sample(p, 0, rng) == 0);
    }
    LowerChainParams dead{10, 0.0, 20.0 / 11.0, 1.0, 0.0, 10, false};
    for (std::size_t i = 1; i <= 10; ++i) {
        REQUIRE(transition_sample(dead, i, rng) == 0);
    }
}

TEST_CASE("sampled rows pass chi-square against the matrix at m = 10")
{
    const auto p = chain(10, 1.5, 0.1, 10);
    const auto mat = transition_matrix(p);
    RandomStream rng(3);
    for (std::size_t i : {1, 3, 6, 10}) {
        std::vector<std::size_t> counts(11, 0);
        for (int s = 0; s < 100000; ++s) {
            ++counts[transition_sample(p, i, rng)];
        }
        CHECK(chi_square_gof(counts, mat[i]).p_value > 0.001);
    }
}

TEST_CASE("coupled trajectories")
{
    const auto p = chain(20, 1.5, 0.1, 20);
    RandomStream rng(4);
    const auto same = coupled_trajectories(p, {5}, 30, rng);
    CHECK(same.size() == 1);
    const auto zero = coupled_trajectories(p, {0}, 30, rng);
    for (auto v : zero.at(0)) {
        REQUIRE(v == 0);
    }
    std::size_t broken = 0;
    for (int r = 0; r < 10000; ++r) {
        auto s = rng.substream(static_cast<std::uint64_t>(r));
        const auto t = coupled_trajectories(p, {1, 5, 10}, 30, s);
        for (std::size_t n = 0; n <= 30; ++n) {
            broken += static_cast<std::size_t>(!(t.at(1)[n] <= t.at(5)[n] && t.at(5)[n] <= t.at(10)[n]));
        }
    }
    CHECK(broken == 0);
}

TEST_CASE("hitting time of m / sqrt(pi)")
{
    RandomStream rng(5);
    // m / sqrt(pi) <= 1: hit at time 0
    const auto small = LowerChainParams::from_pi(2, 4.5, 6.0, 0.1, 4);
    const auto h = hitting_time_tau_star(small, 10, 100, rng);
    CHECK(h.frequency == 1.0);
    CHECK(h.histogram[0] == 100);

    // p_c = 1: no pair survives uncrossed, so the chain dies at step 1
    const LowerChainParams dead{64, 1.5, 2.0, 1.0, 0.0, 64, false};
    CHECK(hitting_time_tau_star(dead, 20, 100, rng).frequency == 0.0);

    // The chain grows by about sqrt(pi) per step, so reaching m / sqrt(pi) takes
    // about ln(m) / ln(sqrt(pi)) steps: kappa must exceed 1 / ln(sqrt(1.5)) ~ 4.9.
    std::vector<Interval> cis;
    for (std::size_t m : {64, 256, 1024}) {
        const auto p = chain(m, 1.5, 0.1, m);
        const auto r = hitting_time_tau_star(p, static_cast<std::size_t>(std::ceil(8 * std::log(m))), 4000, rng);
        INFO("m = " << m << ": " << r.frequency);
        cis.push_back(wilson_interval(r.hits, r.replicas));
    }
    // no decay with m: the intervals overlap pairwise
    for (std::size_t a = 0; a + 1 < cis.size(); ++a) {
        CHECK(cis[a + 1].hi >= cis[a].lo);
    }
}

TEST_CASE("geometric growth")
{
    RandomStream rng(6);
    const auto p = chain(1024, 1.5, 0.1, 1024);
    CHECK_THROWS_AS(geometric_growth_check(p, 8, 1.3, 10, rng), PreconditionError);
    const double f0 = geometric_growth_check(p, 0, 1.1, 100, rng);
    CHECK(f0 == 1.0);
    const double f8 = geometric_growth_check(p, 8, 1.1, 100000, rng);
    const double f32 = geometric_growth_check(p, 32, 1.1, 100000, rng);
    const auto c8 = wilson_interval(static_cast<std::size_t>(f8 * 100000 + 0.5), 100000);
    const auto c32 = wilson_interval(static_cast<std::size_t>(f32 * 100000 + 0.5), 100000);
    CHECK(c32.hi < c8.lo);

    // mean one-step value is i sqrt(pi)
    const std::size_t i = 8;
    double sum = 0.0;
    double sq = 0.0;
    const std::size_t n = 100000;
    for (std::size_t r = 0; r < n; ++r) {
        const double v = static_cast<double>(transition_sample(p, i, rng));
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - i * std::sqrt(p.pi)) < 4 * se);
}

TEST_CASE("first-visit successors")
{
    const auto p = chain(20, 1.5, 0.1, 20);
    RandomStream rng(7);
    const auto s = first_visit_successors(p, {1, 2}, 1, 100, rng);
    CHECK(s[0] >= 0);
    CHECK(matrix_to_text({{0.5, 0.5}}) == "0.5 0.5\n");
}
