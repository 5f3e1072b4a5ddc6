#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "sgalab/chromosome.hpp"
#include "sgalab/error.hpp"
#include "sgalab/landscape.hpp"
#include "sgalab/rng.hpp"

namespace sgalab {

struct GaConfig {
    std::size_t ell = 0;
    std::size_t m = 0;
    double p_c = 0.0;
    double p_m = 0.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (ell < 2) {
            throw ConfigError("ell", "must be >= 2 (crossover needs a cut site)");
        }
        if (m == 0 || m % 2 != 0) {
            throw ConfigError("m", "population size must be a positive even integer");
        }
        if (!(p_c >= 0.0 && p_c <= 1.0)) {
            throw ConfigError("p_c", "must lie in [0, 1]");
        }
        if (!(p_m >= 0.0 && p_m <= 1.0)) {
            throw ConfigError("p_m", "must lie in [0, 1]");
        }
    }
};

struct Population {
    std::vector<Chromosome> members;
    std::vector<double> fitness; // cached f(members[i])
    std::size_t generation = 0;

    std::size_t size() const noexcept { return members.size(); }
};

inline Population make_population(std::vector<Chromosome> members, const Landscape& landscape)
{
    Population pop;
    pop.fitness.reserve(members.size());
    for (const auto& c : members) {
        if (c.length() != landscape.length()) {
            throw ConfigError("ell", "chromosome length does not match the landscape");
        }
        pop.fitness.push_back(landscape(c));
    }
    pop.members = std::move(members);
    return pop;
}

// One all-ones chromosome (flagged as the lineage root) followed by m-1
// all-zeros chromosomes.
inline Population master_and_zeros(std::size_t ell, std::size_t m, const Landscape& landscape)
{
    std::vector<Chromosome> members;
    members.reserve(m);
    Chromosome master(ell, true);
    master.descendant = true;
    members.push_back(std::move(master));
    for (std::size_t i = 1; i < m; ++i) {
        members.emplace_back(ell, false);
    }
    return make_population(std::move(members), landscape);
}

// Roulette wheel over a fixed fitness vector: index i is drawn with probability
// f_i / sum_j f_j, with replacement.
class RouletteWheel {
public:
    explicit RouletteWheel(std::span<const double> fitness)
    {
        if (fitness.empty()) {
            throw InvalidLandscape("roulette wheel over an empty population");
        }
        cumulative_.reserve(fitness.size());
        double total = 0.0;
        for (double f : fitness) {
            if (!(f > 0.0) || !std::isfinite(f)) {
                throw InvalidLandscape("selection requires strictly positive finite fitness values");
            }
            total += f;
            cumulative_.push_back(total);
        }
    }

    double total() const noexcept { return cumulative_.back(); }

    std::size_t operator()(RandomStream& rng) const
    {
        const double u = rng.uniform() * total();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

// 0-based index of one roulette-wheel draw.
inline std::size_t select_parent(std::span<const double> fitness, RandomStream& rng)
{
    return RouletteWheel(fitness)(rng);
}

struct CrossoverOutcome {
    Chromosome first;
    Chromosome second;
    std::size_t cut = 0; // 0 when no crossover happened, else the cut position in [1, ell-1]
};

// Exchange the suffixes starting at `cut` (the cut lies after the first `cut` bits).
inline CrossoverOutcome crossover_at(const Chromosome& a, const Chromosome& b, std::size_t cut)
{
    if (a.length() != b.length() || a.length() < 2) {
        throw ConfigError("ell", "crossover needs two parents of equal length >= 2");
    }
    if (cut == 0 || cut >= a.length()) {
        throw DomainError("cut must lie in [1, ell-1]");
    }
    CrossoverOutcome out{a, b, cut};
    out.first.splice_suffix(b, cut);
    out.second.splice_suffix(a, cut);
    out.first.descendant = out.second.descendant = a.descendant || b.descendant;
    return out;
}

// Single point crossover: with probability p_c a cut site is drawn uniformly
// among the ell-1 internal positions.
inline CrossoverOutcome crossover_pair(const Chromosome& a, const Chromosome& b, double p_c, RandomStream& rng)
{
    if (a.length() != b.length() || a.length() < 2) {
        throw ConfigError("ell", "crossover needs two parents of equal length >= 2");
    }
    if (rng.uniform() < p_c) {
        const auto cut = 1 + static_cast<std::size_t>(rng.below(a.length() - 1));
        return crossover_at(a, b, cut);
    }
    return {a, b, 0};
}

// Flip every bit independently with probability p_m. Returns the number of
// flips. Positions are visited by geometric skipping, which has exactly the
// law of independent per-bit trials.
inline std::size_t mutate_in_place(Chromosome& c, double p_m, RandomStream& rng)
{
    const std::size_t ell = c.length();
    if (p_m <= 0.0 || ell == 0) {
        return 0;
    }
    if (p_m >= 1.0) {
        for (std::size_t i = 0; i < ell; ++i) {
            c.flip(i);
        }
        return ell;
    }
    std::size_t flips = 0;
    std::uint64_t pos = rng.geometric_failures(p_m);
    while (pos < ell) {
        c.flip(static_cast<std::size_t>(pos));
        ++flips;
        const auto skip = rng.geometric_failures(p_m);
        if (skip >= ell) {
            break;
        }
        pos += skip + 1;
    }
    return flips;
}

inline Chromosome mutate(Chromosome c, double p_m, RandomStream& rng)
{
    mutate_in_place(c, p_m, rng);
    return c;
}

// Instrumentation filled by next_generation.
struct GenerationTrace {
    std::size_t descendant_parents = 0; // A_n: descendant-flagged parents among the m draws
    std::size_t max_mutations = 0;      // largest flip count on any child
    std::vector<std::size_t> parents;   // 2k, 2k+1: parents of pair k
    std::vector<std::size_t> cuts;      // cut per pair, 0 = none
    std::vector<std::size_t> mutations; // flips per child
};

// One pass of the fundamental cycle: m/2 times select two parents with
// replacement, cross them over, mutate both children, append them.
inline Population next_generation(const Population& pop, const Landscape& landscape, double p_c, double p_m,
    RandomStream& rng, GenerationTrace* trace = nullptr)
{
    const std::size_t m = pop.size();
    if (m == 0 || m % 2 != 0) {
        throw ConfigError("m", "population size must be a positive even integer");
    }
    const RouletteWheel wheel(pop.fitness);
    Population next;
    next.generation = pop.generation + 1;
    next.members.reserve(m);
    next.fitness.reserve(m);
    if (trace != nullptr) {
        *trace = GenerationTrace{};
        trace->parents.reserve(m);
        trace->cuts.reserve(m / 2);
        trace->mutations.reserve(m);
    }
    for (std::size_t k = 0; k < m / 2; ++k) {
        const std::size_t i = wheel(rng);
        const std::size_t j = wheel(rng);
        auto children = crossover_pair(pop.members[i], pop.members[j], p_c, rng);
        const std::size_t fa = mutate_in_place(children.first, p_m, rng);
        const std::size_t fb = mutate_in_place(children.second, p_m, rng);
        // Fitness is re-evaluated only for genotypes that differ from their source.
        const bool copy_a = children.cut == 0 && fa == 0;
        const bool copy_b = children.cut == 0 && fb == 0;
        next.fitness.push_back(copy_a ? pop.fitness[i] : landscape(children.first));
        next.fitness.push_back(copy_b ? pop.fitness[j] : landscape(children.second));
        next.members.push_back(std::move(children.first));
        next.members.push_back(std::move(children.second));
        if (trace != nullptr) {
            trace->descendant_parents += static_cast<std::size_t>(pop.members[i].descendant) +
                static_cast<std::size_t>(pop.members[j].descendant);
            trace->max_mutations = std::max({trace->max_mutations, fa, fb});
            trace->parents.push_back(i);
            trace->parents.push_back(j);
            trace->cuts.push_back(children.cut);
            trace->mutations.push_back(fa);
            trace->mutations.push_back(fb);
        }
    }
    return next;
}

inline Population next_generation(const Population& pop, const Landscape& landscape, const GaConfig& config,
    RandomStream& rng, GenerationTrace* trace = nullptr)
{
    return next_generation(pop, landscape, config.p_c, config.p_m, rng, trace);
}

struct PopulationStats {
    double f_star = 0.0;            // max fitness
    double f_bar = 0.0;             // mean fitness
    std::size_t n_master = 0;       // N*: exact all-ones chromosomes
    std::size_t n_descendants = 0;  // T: descendant-flagged chromosomes
    std::size_t n_at_least = 0;     // N(x, reference): fitness >= reference
    std::size_t d_max = 0;          // D: max ones among non-descendants (0 if none)
};

// Recomputes every statistic from the genotypes, ignoring the cached fitness.
inline PopulationStats population_stats(const Population& pop, const Landscape& landscape, double reference_level)
{
    PopulationStats s;
    s.f_star = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& c : pop.members) {
        const double f = landscape(c);
        sum += f;
        s.f_star = std::max(s.f_star, f);
        const std::size_t ones = c.count_ones();
        s.n_master += static_cast<std::size_t>(ones == c.length());
        s.n_at_least += static_cast<std::size_t>(f >= reference_level);
        if (c.descendant) {
            ++s.n_descendants;
        } else {
            s.d_max = std::max(s.d_max, ones);
        }
    }
    s.f_bar = pop.members.empty() ? 0.0 : sum / static_cast<double>(pop.members.size());
    return s;
}

// Same statistics from the cached fitness vector; used on hot paths.
inline PopulationStats cached_stats(const Population& pop, double reference_level)
{
    PopulationStats s;
    s.f_star = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& c = pop.members[i];
        const double f = pop.fitness[i];
        sum += f;
        s.f_star = std::max(s.f_star, f);
        const std::size_t ones = c.count_ones();
        s.n_master += static_cast<std::size_t>(ones == c.length());
        s.n_at_least += static_cast<std::size_t>(f >= reference_level);
        if (c.descendant) {
            ++s.n_descendants;
        } else {
            s.d_max = std::max(s.d_max, ones);
        }
    }
    s.f_bar = pop.members.empty() ? 0.0 : sum / static_cast<double>(pop.size());
    return s;
}

} // namespace sgalab
