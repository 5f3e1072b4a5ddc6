#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sgalab/core.hpp"
#include "sgalab/stats.hpp"

using namespace sgalab;

namespace {

constexpr std::size_t draws = 100000;

} // namespace

TEST_CASE("roulette wheel: fitnesses [2, 1, 1]")
{
    const std::vector<double> f{2.0, 1.0, 1.0};
    RandomStream rng(11);
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        ++counts[select_parent(f, rng)];
    }
    const std::vector<double> exact{0.5, 0.25, 0.25};
    for (std::size_t i = 0; i < 3; ++i) {
        const double sd = std::sqrt(draws * exact[i] * (1 - exact[i]));
        CHECK(std::abs(static_cast<double>(counts[i]) - draws * exact[i]) < 4 * sd);
    }
    CHECK(chi_square_gof(counts, exact).p_value > 0.001);
}

TEST_CASE("roulette wheel: equal fitness is uniform")
{
    const std::vector<double> f(5, 3.0);
    RandomStream rng(12);
    std::vector<std::size_t> counts(5, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        ++counts[select_parent(f, rng)];
    }
    CHECK(chi_square_gof(counts, std::vector<double>(5, 0.2)).p_value > 0.001);
}

TEST_CASE("roulette wheel rejects nonpositive fitness")
{
    const std::vector<double> f{1.0, 0.0};
    RandomStream rng(1);
    CHECK_THROWS_AS(select_parent(f, rng), InvalidLandscape);
}

TEST_CASE("crossover with a forced cut")
{
    const auto a = Chromosome::from_string("000000");
    const auto b = Chromosome::from_string("111111");
    const auto out = crossover_at(a, b, 3);
    CHECK(out.first.to_string() == "000111");
    CHECK(out.second.to_string() == "111000");
    CHECK_THROWS_AS(crossover_at(a, b, 0), DomainError);
    CHECK_THROWS_AS(crossover_at(a, b, 6), DomainError);
}

TEST_CASE("crossover with p_c = 0 copies parents and flags")
{
    auto a = Chromosome::from_string("1010");
    a.descendant = true;
    const auto b = Chromosome::from_string("0110");
    RandomStream rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto out = crossover_pair(a, b, 0.0, rng);
        REQUIRE(out.cut == 0);
        REQUIRE(out.first == a);
        REQUIRE(out.second == b);
        REQUIRE(out.first.descendant);
        REQUIRE_FALSE(out.second.descendant);
    }
}

TEST_CASE("crossover lineage uses the OR rule")
{
    auto a = Chromosome::from_string("1111");
    a.descendant = true;
    const auto b = Chromosome::from_string("0000");
    const auto out = crossover_at(a, b, 2);
    CHECK(out.first.descendant);
    CHECK(out.second.descendant);
}

TEST_CASE("each cut site has probability p_c / (ell - 1)")
{
    const std::size_t ell = 6;
    const double p_c = 0.6;
    const Chromosome a(ell, false);
    const Chromosome b(ell, true);
    RandomStream rng(21);
    std::vector<std::size_t> counts(ell, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        ++counts[crossover_pair(a, b, p_c, rng).cut];
    }
    std::vector<double> exact(ell, p_c / (ell - 1));
    exact[0] = 1.0 - p_c;
    CHECK(chi_square_gof(counts, exact).p_value > 0.001);
}

TEST_CASE("mutation: p_m = 0 is the identity")
{
    RandomStream rng(2);
    const auto c = Chromosome::from_string("0110100");
    for (int i = 0; i < 100; ++i) {
        REQUIRE(mutate(c, 0.0, rng) == c);
    }
}

TEST_CASE("mutation: P(0000000 -> 0101000) = p_m^2 (1 - p_m)^5")
{
    const double p_m = 0.2;
    const auto start = Chromosome(7, false);
    const auto target = Chromosome::from_string("0101000");
    RandomStream rng(31);
    std::vector<std::size_t> counts(128, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        ++counts[mutate(start, p_m, rng).to_index()];
    }
    std::vector<double> exact(128);
    for (std::size_t g = 0; g < 128; ++g) {
        const auto k = static_cast<double>(Chromosome::from_index(g, 7).count_ones());
        exact[g] = std::pow(p_m, k) * std::pow(1 - p_m, 7 - k);
    }
    const double p = std::pow(p_m, 2) * std::pow(1 - p_m, 5);
    CHECK(exact[target.to_index()] == Catch::Approx(p).epsilon(1e-15));
    const double sd = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(static_cast<double>(counts[target.to_index()]) - draws * p) < 4 * sd);
    CHECK(chi_square_gof(counts, exact).p_value > 0.001);
}

TEST_CASE("mutation flip counts follow Binomial(8, 0.1)")
{
    RandomStream rng(41);
    Chromosome c(8, false);
    std::vector<std::size_t> counts(9, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        Chromosome x = c;
        ++counts[mutate_in_place(x, 0.1, rng)];
    }
    std::vector<double> exact(9);
    for (std::size_t k = 0; k <= 8; ++k) {
        exact[k] = oracle::binomial_pmf(8, k, 0.1);
    }
    CHECK(chi_square_gof(counts, exact).p_value > 0.001);
}

TEST_CASE("mutation with p_m = 1 flips every bit")
{
    RandomStream rng(5);
    auto c = Chromosome::from_string("0110100");
    CHECK(mutate_in_place(c, 1.0, rng) == 7);
    CHECK(c.to_string() == "1001011");
}

TEST_CASE("next generation keeps m and copies when p_c = p_m = 0")
{
    const auto f = sharp_peak(5);
    RandomStream rng(6);
    std::vector<Chromosome> members;
    for (std::uint64_t g : {0ULL, 3ULL, 31ULL, 17ULL, 9ULL, 31ULL}) {
        members.push_back(Chromosome::from_index(g, 5));
    }
    auto pop = make_population(members, f);
    for (int gen = 0; gen < 20; ++gen) {
        const auto next = next_generation(pop, f, 0.0, 0.0, rng);
        REQUIRE(next.size() == 6);
        for (const auto& c : next.members) {
            REQUIRE(std::find(pop.members.begin(), pop.members.end(), c) != pop.members.end());
        }
        pop = next;
    }
    CHECK(pop.generation == 20);
}

TEST_CASE("cached fitness agrees with recomputation")
{
    const auto f = one_max_shifted(12);
    RandomStream rng(7);
    auto pop = master_and_zeros(12, 10, f);
    for (int gen = 0; gen < 30; ++gen) {
        pop = next_generation(pop, f, 0.5, 0.1, rng);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            REQUIRE(pop.fitness[i] == f(pop.members[i]));
        }
    }
}

TEST_CASE("children of different pairs are uncorrelated")
{
    // m = 4, one master: master indicators of children 0, 1 (pair 1) and 2 (pair 2).
    const auto f = sharp_peak(4);
    const auto pop = master_and_zeros(4, 4, f);
    RandomStream rng(8);
    const std::size_t gens = 100000;
    double s0 = 0, s1 = 0, s2 = 0, s01 = 0, s02 = 0;
    for (std::size_t g = 0; g < gens; ++g) {
        const auto next = next_generation(pop, f, 0.3, 0.05, rng);
        const double a = next.members[0].all_ones(), b = next.members[1].all_ones(), c = next.members[2].all_ones();
        s0 += a;
        s1 += b;
        s2 += c;
        s01 += a * b;
        s02 += a * c;
    }
    const double n = gens;
    const double m0 = s0 / n, m1 = s1 / n, m2 = s2 / n;
    const double cov02 = s02 / n - m0 * m2;
    const double cov01 = s01 / n - m0 * m1;
    // sd of a product-moment estimate under independence ~ sqrt(v0 v2 / n)
    const double sd = std::sqrt(m0 * (1 - m0) * m2 * (1 - m2) / n);
    CHECK(std::abs(cov02) < 4 * sd);
    CHECK(cov01 > 4 * sd); // within a pair, both children come from the master together
}

TEST_CASE("initial sharp-peak statistics")
{
    for (std::size_t m : {2, 10, 128}) {
        const auto f = sharp_peak(m);
        const auto pop = master_and_zeros(m, m, f);
        const auto s = population_stats(pop, f, 2.0);
        CHECK(s.f_star == 2.0);
        CHECK(s.f_bar == Catch::Approx((m + 1.0) / m));
        CHECK(s.n_master == 1);
        CHECK(s.n_descendants == 1);
        CHECK(s.d_max == 0);
    }
}

TEST_CASE("all-zeros population on the sharp peak")
{
    const auto f = sharp_peak(8);
    const auto pop = make_population(std::vector<Chromosome>(6, Chromosome(8, false)), f);
    const auto s = population_stats(pop, f, 2.0);
    CHECK(s.f_bar == 1.0);
    CHECK(s.n_master == 0);
}

TEST_CASE("statistics of random populations equal a naive recount")
{
    RandomStream rng(9);
    const std::size_t ell = 10;
    const auto f = one_max_shifted(ell);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Chromosome> members;
        std::vector<std::string> bits;
        std::vector<bool> flags;
        for (int i = 0; i < 8; ++i) {
            auto c = Chromosome::from_index(rng.below(1024), ell);
            if (rng.bernoulli(0.2)) {
                c = Chromosome(ell, true);
            }
            c.descendant = rng.bernoulli(0.3);
            bits.push_back(c.to_string());
            flags.push_back(c.descendant);
            members.push_back(c);
        }
        const auto pop = make_population(members, f);
        const double ref = 6.0;
        const auto s = population_stats(pop, f, ref);
        const auto c = cached_stats(pop, ref);
        const auto o = oracle::recount(
            bits, flags,
            [](const std::string& b) {
                return 1.0 + static_cast<double>(std::count(b.begin(), b.end(), '1'));
            },
            ref);
        for (const auto& x : {s, c}) {
            REQUIRE(x.f_star == o.f_star);
            REQUIRE(x.f_bar == Catch::Approx(o.f_bar).epsilon(1e-14));
            REQUIRE(x.n_master == o.n_master);
            REQUIRE(x.n_descendants == o.n_descendants);
            REQUIRE(x.n_at_least == o.n_at_least);
            REQUIRE(x.d_max == o.d_max);
        }
    }
}

TEST_CASE("GA config validation")
{
    CHECK_THROWS_AS((GaConfig{1, 4, 0.1, 0.1, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((GaConfig{4, 3, 0.1, 0.1, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((GaConfig{4, 4, 1.1, 0.1, 0}.validate()), ConfigError);
    CHECK_NOTHROW((GaConfig{4, 4, 0.1, 0.1, 0}.validate()));
}
