#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sgalab/core.hpp"
#include "sgalab/error.hpp"
#include "sgalab/probability.hpp"

namespace sgalab {

enum class TuneTarget { mutation, crossover, both, none };

inline TuneTarget parse_tune_target(const std::string& s)
{
    if (s == "mutation" || s == "p_m") {
        return TuneTarget::mutation;
    }
    if (s == "crossover" || s == "p_c") {
        return TuneTarget::crossover;
    }
    if (s == "both") {
        return TuneTarget::both;
    }
    if (s == "none") {
        return TuneTarget::none;
    }
    throw ConfigError("adjust", "must be one of mutation, crossover, both, none (got '" + s + "')");
}

inline std::string to_string(TuneTarget t)
{
    switch (t) {
    case TuneTarget::mutation:
        return "mutation";
    case TuneTarget::crossover:
        return "crossover";
    case TuneTarget::both:
        return "both";
    case TuneTarget::none:
        return "none";
    }
    return "none";
}

struct TunerPolicy {
    double target_pi = 1.1;
    TuneTarget adjust = TuneTarget::mutation;
    double p_c_min = 0.0;
    double p_c_max = 1.0;
    double p_m_min = 0.0;
    double p_m_max = 1.0;

    void validate() const
    {
        if (!(target_pi > 1.0)) {
            throw ConfigError("target_pi", "must be > 1");
        }
        if (!(0.0 <= p_c_min && p_c_min <= p_c_max && p_c_max <= 1.0)) {
            throw ConfigError("p_c_min", "crossover bounds must satisfy 0 <= p_c_min <= p_c_max <= 1");
        }
        if (!(0.0 <= p_m_min && p_m_min <= p_m_max && p_m_max <= 1.0)) {
            throw ConfigError("p_m_min", "mutation bounds must satisfy 0 <= p_m_min <= p_m_max <= 1");
        }
    }
};

struct TunedParameters {
    double p_c = 0.0;
    double p_m = 0.0;
    bool feasible = false;
};

// Solves (f*/fbar)(1 - p_C)(1 - p_M)^ell = target_pi for the free parameter.
// With `both`, p_C stays put and p_M moves. Infeasible targets are flagged and
// the free parameter is clamped to its bounds; a flat population (f* = fbar)
// returns the lower bounds.
inline TunedParameters adapt_parameters(
    const PopulationStats& stats, double p_c, double p_m, std::size_t ell, const TunerPolicy& policy)
{
    if (!(stats.f_bar > 0.0)) {
        throw PreconditionError("tuning needs a positive mean fitness");
    }
    const double ratio = stats.f_star / stats.f_bar;
    if (policy.adjust == TuneTarget::none) {
        return {p_c, p_m, true};
    }
    if (!(ratio > 1.0)) {
        return {policy.p_c_min, policy.p_m_min, false};
    }
    TunedParameters out{std::clamp(p_c, policy.p_c_min, policy.p_c_max), std::clamp(p_m, policy.p_m_min, policy.p_m_max), true};
    if (policy.adjust == TuneTarget::crossover) {
        // 1 - p_C = target / (ratio (1 - p_M)^ell)
        const double keep = policy.target_pi / (ratio * std::pow(1.0 - out.p_m, static_cast<double>(ell)));
        const double solved = 1.0 - keep;
        out.feasible = solved >= policy.p_c_min && solved <= policy.p_c_max;
        out.p_c = std::clamp(solved, policy.p_c_min, policy.p_c_max);
        return out;
    }
    const double base = policy.target_pi / (ratio * (1.0 - out.p_c));
    const double solved = base > 1.0 ? -1.0 : 1.0 - std::pow(base, 1.0 / static_cast<double>(ell));
    out.feasible = solved >= policy.p_m_min && solved <= policy.p_m_max;
    out.p_m = std::clamp(solved, policy.p_m_min, policy.p_m_max);
    return out;
}

struct TelemetryRow {
    std::size_t gen = 0;
    double pi = 0.0;
    double p_c = 0.0;
    double p_m = 0.0;
    double f_star = 0.0;
    double f_bar = 0.0;
    bool feasible = false;
};

struct AdaptiveRun {
    std::vector<TelemetryRow> telemetry; // one row per generation 0..horizon-1, parameters used to produce gen+1
    std::vector<PopulationStats> stats;  // generations 0..horizon
    Population final_population;
};

// Before every generation: measure, re-tune, then breed with the tuned values.
// `reference_level` is passed to the statistics (masters are counted against it).
inline AdaptiveRun run_adaptive_ga(const Landscape& landscape, const Population& initial, const GaConfig& config,
    const TunerPolicy& policy, std::size_t horizon, RandomStream& rng, double reference_level)
{
    config.validate();
    policy.validate();
    AdaptiveRun run;
    Population pop = initial;
    double p_c = config.p_c;
    double p_m = config.p_m;
    for (std::size_t n = 0; n < horizon; ++n) {
        const auto s = cached_stats(pop, reference_level);
        run.stats.push_back(s);
        const auto tuned = adapt_parameters(s, p_c, p_m, config.ell, policy);
        p_c = tuned.p_c;
        p_m = tuned.p_m;
        run.telemetry.push_back({n, pi_parameter(s.f_star, s.f_bar, p_c, p_m, config.ell), p_c, p_m, s.f_star, s.f_bar, tuned.feasible});
        pop = next_generation(pop, landscape, p_c, p_m, rng);
    }
    run.stats.push_back(cached_stats(pop, reference_level));
    run.final_population = std::move(pop);
    return run;
}

} // namespace sgalab
