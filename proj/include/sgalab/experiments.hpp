#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgalab/branching.hpp"
#include "sgalab/core.hpp"
#include "sgalab/error.hpp"
#include "sgalab/landscape.hpp"
#include "sgalab/lowerchain.hpp"
#include "sgalab/parallel.hpp"
#include "sgalab/probability.hpp"
#include "sgalab/rng.hpp"
#include "sgalab/stats.hpp"

namespace sgalab {

// ---------------------------------------------------------------------------
// Parameter solving

// p_M solving 2 (1 - p_C)(1 - p_M)^ell = pi (sharp peak, fitness ratio 2).
inline double disordered_pm(double pi, double p_c, std::size_t ell)
{
    if (!(pi > 0.0 && pi < 1.0)) {
        throw PreconditionError("disordered regime needs 0 < pi < 1");
    }
    if (!(p_c >= 0.0 && p_c < 1.0)) {
        throw PreconditionError("disordered regime needs 0 <= p_c < 1");
    }
    const double base = pi / (2.0 * (1.0 - p_c));
    if (!(base <= 1.0)) {
        throw PreconditionError("pi >= 2 (1 - p_c): no mutation probability reaches this pi");
    }
    return 1.0 - std::pow(base, 1.0 / static_cast<double>(ell));
}

// p_M solving ratio (1 - p_C)(1 - p_M)^ell = pi.
inline double solve_pm(double pi, double ratio, double p_c, std::size_t ell)
{
    if (!(ratio > 0.0) || !(p_c >= 0.0 && p_c < 1.0) || !(pi > 0.0)) {
        throw PreconditionError("cannot solve for p_m with these parameters");
    }
    const double base = pi / (ratio * (1.0 - p_c));
    if (!(base <= 1.0)) {
        throw PreconditionError("pi > ratio (1 - p_c): no mutation probability reaches this pi");
    }
    return 1.0 - std::pow(base, 1.0 / static_cast<double>(ell));
}

// ceil(kappa ln m)
inline std::size_t regime_horizon(double kappa, std::size_t m)
{
    return static_cast<std::size_t>(std::ceil(kappa * std::log(static_cast<double>(m)) - 1e-12));
}

// ---------------------------------------------------------------------------
// Replica records

struct StoppingTimes {
    std::optional<std::size_t> tau0;     // first n >= 1 with N*_n = 0
    std::optional<std::size_t> tau1;     // first n >= 1 with T_n > m^{1/4}
    std::optional<std::size_t> tau2;     // first n >= 1 with D_n >= sqrt(ell)
    std::optional<std::size_t> tau_bar;  // first n >= 1 with mean fitness >= sqrt(pi) f0bar
    std::optional<std::size_t> tau_star; // lower chain only: first n >= 0 with N_n >= m / sqrt(pi)
};

struct GenerationRecord {
    double f_star = 0.0;
    double f_bar = 0.0;
    std::size_t n_master = 0;
    std::size_t n_descendants = 0;
    std::size_t d_max = 0;
    std::size_t max_mutations = 0;      // largest flip count in the step that produced this generation
    std::size_t descendant_parents = 0; // A_{n-1}
};

// Reference quantities of a run: initial max and mean fitness, the target pi,
// and the population geometry.
struct RegimeReference {
    double f_star0 = 0.0;
    double f_bar0 = 0.0;
    double pi = 0.0;
    std::size_t m = 0;
    std::size_t ell = 0;
    std::size_t horizon = 0;
};

struct ReplicaReport {
    std::size_t replica = 0;
    std::uint64_t seed = 0;
    StoppingTimes times;
    std::vector<GenerationRecord> series; // generations 0..horizon
    bool event_disordered = false;
    bool event_quasispecies = false;
    bool d_recursion_ok = true;
    bool tn_bound_ok = true; // T_{n+1} <= 2 A_n at every step
};

inline StoppingTimes stopping_times(const std::vector<GenerationRecord>& series, const RegimeReference& ref)
{
    StoppingTimes t;
    const double t_cap = std::pow(static_cast<double>(ref.m), 0.25);
    const double d_cap = std::sqrt(static_cast<double>(ref.ell));
    const double mean_cap = std::sqrt(ref.pi) * ref.f_bar0;
    for (std::size_t n = 1; n < series.size(); ++n) {
        const auto& g = series[n];
        if (!t.tau0 && g.n_master == 0) {
            t.tau0 = n;
        }
        if (!t.tau1 && static_cast<double>(g.n_descendants) > t_cap) {
            t.tau1 = n;
        }
        if (!t.tau2 && static_cast<double>(g.d_max) >= d_cap) {
            t.tau2 = n;
        }
        if (!t.tau_bar && g.f_bar >= mean_cap) {
            t.tau_bar = n;
        }
    }
    return t;
}

// {master lost by the horizon} and {mean fitness <= f0bar (1 + 1/sqrt m) throughout}.
inline bool disordered_event(
    const std::vector<GenerationRecord>& series, const StoppingTimes& t, const RegimeReference& ref)
{
    if (!t.tau0 || *t.tau0 > ref.horizon) {
        return false;
    }
    const double cap = ref.f_bar0 * (1.0 + 1.0 / std::sqrt(static_cast<double>(ref.m)));
    for (std::size_t n = 0; n <= ref.horizon && n < series.size(); ++n) {
        if (series[n].f_bar > cap) {
            return false;
        }
    }
    return true;
}

// {max fitness >= f0* throughout} and {mean fitness reaches sqrt(pi) f0bar by the horizon}.
inline bool quasispecies_event(
    const std::vector<GenerationRecord>& series, const StoppingTimes& t, const RegimeReference& ref)
{
    for (std::size_t n = 0; n <= ref.horizon && n < series.size(); ++n) {
        if (series[n].f_star < ref.f_star0) {
            return false;
        }
    }
    return t.tau_bar.has_value() && *t.tau_bar <= ref.horizon;
}

inline GenerationRecord record_of(const PopulationStats& s)
{
    return {s.f_star, s.f_bar, s.n_master, s.n_descendants, s.d_max, 0, 0};
}

// Runs one GA replica for ref.horizon generations and derives its stopping
// times and event indicators.
inline ReplicaReport run_replica(const Landscape& landscape, const Population& initial, double p_c, double p_m,
    const RegimeReference& ref, std::uint64_t seed, std::size_t replica = 0)
{
    ReplicaReport rep;
    rep.replica = replica;
    rep.seed = seed;
    RandomStream rng(seed);
    rep.series.reserve(ref.horizon + 1);
    rep.series.push_back(record_of(cached_stats(initial, ref.f_star0)));
    Population pop = initial;
    GenerationTrace trace;
    for (std::size_t n = 0; n < ref.horizon; ++n) {
        pop = next_generation(pop, landscape, p_c, p_m, rng, &trace);
        auto g = record_of(cached_stats(pop, ref.f_star0));
        g.max_mutations = trace.max_mutations;
        g.descendant_parents = trace.descendant_parents;
        const auto& prev = rep.series.back();
        if (g.d_max > 2 * prev.d_max + trace.max_mutations) {
            rep.d_recursion_ok = false;
        }
        if (g.n_descendants > 2 * trace.descendant_parents) {
            rep.tn_bound_ok = false;
        }
        rep.series.push_back(g);
    }
    rep.times = stopping_times(rep.series, ref);
    rep.event_disordered = disordered_event(rep.series, rep.times, ref);
    rep.event_quasispecies = quasispecies_event(rep.series, rep.times, ref);
    return rep;
}

// ---------------------------------------------------------------------------
// Regime protocols

struct RegimeSetup {
    std::string protocol; // "disordered" or "quasispecies"
    double pi = 0.0;
    std::size_t m = 0;
    std::size_t ell = 0;
    double p_c = 0.0;
    double p_m = 0.0;
    double kappa = 2.0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    std::string landscape;
};

struct RegimeReport {
    RegimeSetup setup;
    RegimeReference reference;
    std::size_t replicas = 0;
    std::size_t successes = 0; // of the protocol's own event
    double frequency = 0.0;
    Interval ci;
    std::size_t disordered_successes = 0;
    std::size_t quasispecies_successes = 0;
    std::vector<double> mean_f_bar;
    std::vector<double> sd_f_bar;
    std::vector<double> mean_f_star;
    std::vector<double> sd_f_star;
    std::vector<ReplicaReport> replica_reports;
};

inline RegimeReport aggregate(RegimeSetup setup, const RegimeReference& ref, std::vector<ReplicaReport> reports,
    bool disordered_protocol)
{
    RegimeReport out;
    out.setup = std::move(setup);
    out.reference = ref;
    out.replicas = reports.size();
    const std::size_t len = ref.horizon + 1;
    out.mean_f_bar.assign(len, 0.0);
    out.sd_f_bar.assign(len, 0.0);
    out.mean_f_star.assign(len, 0.0);
    out.sd_f_star.assign(len, 0.0);
    for (const auto& r : reports) {
        out.disordered_successes += static_cast<std::size_t>(r.event_disordered);
        out.quasispecies_successes += static_cast<std::size_t>(r.event_quasispecies);
        for (std::size_t n = 0; n < len; ++n) {
            out.mean_f_bar[n] += r.series[n].f_bar;
            out.mean_f_star[n] += r.series[n].f_star;
        }
    }
    const double count = static_cast<double>(std::max<std::size_t>(reports.size(), 1));
    for (std::size_t n = 0; n < len; ++n) {
        out.mean_f_bar[n] /= count;
        out.mean_f_star[n] /= count;
    }
    if (reports.size() > 1) {
        for (const auto& r : reports) {
            for (std::size_t n = 0; n < len; ++n) {
                out.sd_f_bar[n] += std::pow(r.series[n].f_bar - out.mean_f_bar[n], 2);
                out.sd_f_star[n] += std::pow(r.series[n].f_star - out.mean_f_star[n], 2);
            }
        }
        for (std::size_t n = 0; n < len; ++n) {
            out.sd_f_bar[n] = std::sqrt(out.sd_f_bar[n] / (count - 1.0));
            out.sd_f_star[n] = std::sqrt(out.sd_f_star[n] / (count - 1.0));
        }
    }
    out.successes = disordered_protocol ? out.disordered_successes : out.quasispecies_successes;
    out.frequency = reports.empty() ? 0.0 : static_cast<double>(out.successes) / count;
    out.ci = wilson_interval(out.successes, reports.size());
    out.replica_reports = std::move(reports);
    return out;
}

struct DisorderedConfig {
    double pi = 0.8;
    std::size_t m = 128; // ell = m
    double p_c = 0.1;
    double kappa = 2.0;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Sharp peak, ell = m, one master plus m-1 all-zeros chromosomes, p_M from
// 2 (1 - p_C)(1 - p_M)^ell = pi.
inline RegimeReport run_disordered(const DisorderedConfig& cfg)
{
    const double p_m = disordered_pm(cfg.pi, cfg.p_c, cfg.m);
    GaConfig ga{cfg.m, cfg.m, cfg.p_c, p_m, cfg.seed};
    ga.validate();
    const auto landscape = sharp_peak(cfg.m);
    const auto initial = master_and_zeros(cfg.m, cfg.m, landscape);
    const auto s0 = cached_stats(initial, 2.0);
    const RegimeReference ref{s0.f_star, s0.f_bar, cfg.pi, cfg.m, cfg.m, regime_horizon(cfg.kappa, cfg.m)};
    auto reports = run_indexed(cfg.replicas, cfg.threads, [&](std::size_t r) {
        return run_replica(landscape, initial, cfg.p_c, p_m, ref, derive_seed(cfg.seed, r), r);
    });
    RegimeSetup setup{"disordered", cfg.pi, cfg.m, cfg.m, cfg.p_c, p_m, cfg.kappa, cfg.replicas, cfg.seed, "sharp_peak"};
    return aggregate(std::move(setup), ref, std::move(reports), true);
}

struct QuasispeciesConfig {
    double pi = 1.5;
    double p_c = 0.1;
    double kappa = 2.0;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Any landscape and initial population with f0* > f0bar; p_M solves
// (f0*/f0bar)(1 - p_C)(1 - p_M)^ell = pi.
inline RegimeReport run_quasispecies(const QuasispeciesConfig& cfg, const Landscape& landscape, const Population& initial)
{
    if (!(cfg.pi > 1.0)) {
        throw PreconditionError("quasispecies regime needs pi > 1");
    }
    const std::size_t m = initial.size();
    const auto s0 = population_stats(initial, landscape, 0.0);
    if (!(s0.f_star > s0.f_bar)) {
        throw PreconditionError("initial population is flat (f0* = f0bar), so pi <= 1 for every p_c, p_m");
    }
    const double p_m = solve_pm(cfg.pi, s0.f_star / s0.f_bar, cfg.p_c, landscape.length());
    GaConfig ga{landscape.length(), m, cfg.p_c, p_m, cfg.seed};
    ga.validate();
    Population start = make_population(initial.members, landscape);
    const RegimeReference ref{s0.f_star, s0.f_bar, cfg.pi, m, landscape.length(), regime_horizon(cfg.kappa, m)};
    auto reports = run_indexed(cfg.replicas, cfg.threads, [&](std::size_t r) {
        return run_replica(landscape, start, cfg.p_c, p_m, ref, derive_seed(cfg.seed, r), r);
    });
    RegimeSetup setup{
        "quasispecies", cfg.pi, m, landscape.length(), cfg.p_c, p_m, cfg.kappa, cfg.replicas, cfg.seed, to_string(landscape.kind())};
    return aggregate(std::move(setup), ref, std::move(reports), false);
}

// Sharp peak, one master among m-1 zeros, chromosome length ell.
inline RegimeReport run_quasispecies_sharp_peak(const QuasispeciesConfig& cfg, std::size_t m, std::size_t ell)
{
    const auto landscape = sharp_peak(ell);
    return run_quasispecies(cfg, landscape, master_and_zeros(ell, m, landscape));
}

// ---------------------------------------------------------------------------
// Sweep over pi

struct SweepConfig {
    std::size_t m = 128; // ell = m
    double p_c = 0.1;
    std::vector<double> grid;
    double kappa = 2.0;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct SweepRow {
    double pi = 0.0;
    std::size_t m = 0;
    double freq_disordered = 0.0;
    Interval ci_disordered;
    double freq_quasispecies = 0.0;
    Interval ci_quasispecies;
};

// For each pi: the disordered protocol when pi < 1, the quasispecies protocol on
// the same sharp-peak start otherwise. Both event frequencies are reported for
// every row. All grid points share the master seed.
inline std::vector<SweepRow> pi_sweep(const SweepConfig& cfg)
{
    std::vector<SweepRow> rows;
    rows.reserve(cfg.grid.size());
    for (double pi : cfg.grid) {
        RegimeReport rep;
        if (pi < 1.0) {
            rep = run_disordered({pi, cfg.m, cfg.p_c, cfg.kappa, cfg.replicas, cfg.seed, cfg.threads});
        } else {
            rep = run_quasispecies_sharp_peak({pi, cfg.p_c, cfg.kappa, cfg.replicas, cfg.seed, cfg.threads}, cfg.m, cfg.m);
        }
        SweepRow row;
        row.pi = pi;
        row.m = cfg.m;
        row.freq_disordered = static_cast<double>(rep.disordered_successes) / static_cast<double>(rep.replicas);
        row.ci_disordered = wilson_interval(rep.disordered_successes, rep.replicas);
        row.freq_quasispecies = static_cast<double>(rep.quasispecies_successes) / static_cast<double>(rep.replicas);
        row.ci_quasispecies = wilson_interval(rep.quasispecies_successes, rep.replicas);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Dominance checks

struct DominanceConfig {
    double pi = 0.8;
    std::size_t m = 64; // ell = m
    double p_c = 0.1;
    std::size_t horizon = 10;
    std::size_t replicas = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    double confidence = 0.99;
};

namespace detail {

    // Tail table of process A (dominated) against process B (dominating), both
    // given as samples[replica][n].
    inline TailTable compare_processes(const std::vector<std::vector<std::size_t>>& a,
        const std::vector<std::vector<std::size_t>>& b, std::size_t horizon, std::size_t top, double confidence)
    {
        TailTable table;
        const double eps_a = dkw_epsilon(a.size(), confidence);
        const double eps_b = dkw_epsilon(b.size(), confidence);
        std::vector<std::size_t> col_a(a.size());
        std::vector<std::size_t> col_b(b.size());
        for (std::size_t n = 0; n <= horizon; ++n) {
            for (std::size_t r = 0; r < a.size(); ++r) {
                col_a[r] = a[r][n];
            }
            for (std::size_t r = 0; r < b.size(); ++r) {
                col_b[r] = b[r][n];
            }
            const auto ta = empirical_tails(col_a, top);
            const auto tb = empirical_tails(col_b, top);
            for (std::size_t k = 0; k <= top; ++k) {
                TailRow row{n, k, ta[k], tb[k], eps_a, eps_b, true};
                row.ok = tail_row_passes(row);
                table.rows.push_back(row);
            }
        }
        return table;
    }

    // GW sizes Z_0..Z_H per replica, saturated at `top` + 1.
    inline std::vector<std::vector<std::size_t>> gw_samples(const ReproductionLaw& law, std::size_t horizon,
        std::size_t replicas, std::size_t top, std::uint64_t seed, unsigned threads)
    {
        return run_indexed(replicas, threads, [&](std::size_t r) {
            RandomStream rng(derive_seed(seed, r));
            const auto t = gw_simulate(law, horizon, rng);
            std::vector<std::size_t> z(horizon + 1);
            for (std::size_t n = 0; n <= horizon; ++n) {
                z[n] = static_cast<std::size_t>(std::min<std::uint64_t>(size_at(t, n), top + 1));
            }
            return z;
        });
    }

    inline std::uint64_t gw_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x6A09E667F3BCC909ULL); }

} // namespace detail

// T_n 1{tau_1 >= n} against a Galton-Watson process with law 2 Poisson(4).
inline TailTable verify_tn_domination(const DominanceConfig& cfg)
{
    const double p_m = disordered_pm(cfg.pi, cfg.p_c, cfg.m);
    const auto landscape = sharp_peak(cfg.m);
    const auto initial = master_and_zeros(cfg.m, cfg.m, landscape);
    const auto s0 = cached_stats(initial, 2.0);
    const RegimeReference ref{s0.f_star, s0.f_bar, cfg.pi, cfg.m, cfg.m, cfg.horizon};
    const double cap = std::pow(static_cast<double>(cfg.m), 0.25);
    auto ga = run_indexed(cfg.replicas, cfg.threads, [&](std::size_t r) {
        const auto rep = run_replica(landscape, initial, cfg.p_c, p_m, ref, derive_seed(cfg.seed, r), r);
        std::vector<std::size_t> v(cfg.horizon + 1, 0);
        bool alive = true; // tau_1 >= n
        for (std::size_t n = 0; n <= cfg.horizon; ++n) {
            v[n] = alive ? rep.series[n].n_descendants : 0;
            if (n >= 1 && static_cast<double>(rep.series[n].n_descendants) > cap) {
                alive = false;
            }
        }
        return v;
    });
    const auto gw = detail::gw_samples(ReproductionLaw::scaled_poisson(2, 4.0), cfg.horizon, cfg.replicas, cfg.m + 1,
        detail::gw_seed(cfg.seed), cfg.threads);
    return detail::compare_processes(ga, gw, cfg.horizon, cfg.m + 1, cfg.confidence);
}

// N*_n 1{tau >= n}, tau = min(tau_0, tau_1, tau_2), against a Galton-Watson
// process with law nu* = law(Y' + 2Y''), Y' ~ P(pi(1 + 3 eps)), Y'' ~ P(eps).
inline TailTable verify_nstar_domination(const DominanceConfig& cfg, double eps)
{
    if (!(eps > 0.0) || !(cfg.pi * (1.0 + 5.0 * eps) < 1.0)) {
        throw PreconditionError("nu* needs eps > 0 with pi (1 + 5 eps) < 1");
    }
    const double p_m = disordered_pm(cfg.pi, cfg.p_c, cfg.m);
    const auto landscape = sharp_peak(cfg.m);
    const auto initial = master_and_zeros(cfg.m, cfg.m, landscape);
    const auto s0 = cached_stats(initial, 2.0);
    const RegimeReference ref{s0.f_star, s0.f_bar, cfg.pi, cfg.m, cfg.m, cfg.horizon};
    auto ga = run_indexed(cfg.replicas, cfg.threads, [&](std::size_t r) {
        const auto rep = run_replica(landscape, initial, cfg.p_c, p_m, ref, derive_seed(cfg.seed, r), r);
        std::size_t tau = cfg.horizon + 1;
        for (const auto& t : {rep.times.tau0, rep.times.tau1, rep.times.tau2}) {
            if (t) {
                tau = std::min(tau, *t);
            }
        }
        std::vector<std::size_t> v(cfg.horizon + 1, 0);
        for (std::size_t n = 0; n <= cfg.horizon; ++n) {
            v[n] = tau >= n ? rep.series[n].n_master : 0;
        }
        return v;
    });
    const auto gw = detail::gw_samples(
        ReproductionLaw::nu_star(cfg.pi, eps), cfg.horizon, cfg.replicas, cfg.m + 1, detail::gw_seed(cfg.seed), cfg.threads);
    return detail::compare_processes(ga, gw, cfg.horizon, cfg.m + 1, cfg.confidence);
}

struct OneStepConfig {
    double pi = 1.3;
    double p_c = 0.1;
    std::size_t samples = 100000; // conditioned samples per state
    std::uint64_t seed = 0;
    unsigned threads = 1;
    double confidence = 0.99;
    std::size_t max_attempts_factor = 1000;
};

struct OneStepReport {
    LowerChainParams chain;
    TailTable table;                  // n = conditioning state i, k = threshold j
    std::vector<std::size_t> tested;  // states with a full sample
    std::vector<std::size_t> vacuous; // conditioning event empty
    std::vector<std::size_t> short_sampled; // feasible but rejection sampling fell short
};

// Checks P(N(X_{n+1}, f0*) >= j | N(X_n, f0*) = i, mean < sqrt(pi) f0bar)
// >= P(N_1 >= j | N_0 = i) for every i, j. Conditioning populations are drawn
// directly: i genotypes uniformly among those with fitness >= f0*, m - i among
// the others, rejected unless the mean fitness stays below sqrt(pi) f0bar.
// f0* and f0bar come from `initial`.
inline OneStepReport verify_one_step_dominance(const OneStepConfig& cfg, const Landscape& landscape, const Population& initial)
{
    const std::size_t ell = landscape.length();
    const std::size_t m = initial.size();
    if (ell > max_table_length) {
        throw PreconditionError("one-step dominance enumerates genotypes: ell must be <= 20");
    }
    if (m > max_exact_m) {
        throw PreconditionError("one-step dominance needs the exact lower-chain matrix: m <= 64");
    }
    if (!(cfg.pi > 1.0)) {
        throw PreconditionError("one-step dominance needs pi > 1");
    }
    const auto s0 = population_stats(initial, landscape, 0.0);
    const double ratio = s0.f_star / s0.f_bar;
    OneStepReport out;
    out.chain = LowerChainParams::from_pi(m, cfg.pi, ratio, cfg.p_c, ell);
    const double p_m = out.chain.p_m;
    const auto matrix = transition_matrix(out.chain);
    const double mean_cap = std::sqrt(cfg.pi) * s0.f_bar;

    std::vector<std::uint64_t> good;
    std::vector<std::uint64_t> bad;
    double min_good = INFINITY;
    double min_bad = INFINITY;
    for (std::uint64_t g = 0; g < (std::uint64_t{1} << ell); ++g) {
        const double f = landscape(Chromosome::from_index(g, ell));
        if (f >= s0.f_star) {
            good.push_back(g);
            min_good = std::min(min_good, f);
        } else {
            bad.push_back(g);
            min_bad = std::min(min_bad, f);
        }
    }
    const double eps = dkw_epsilon(cfg.samples, cfg.confidence);
    for (std::size_t i = 0; i <= m; ++i) {
        const bool possible = (i == 0 || !good.empty()) && (i == m || !bad.empty());
        const double lowest_mean = possible
            ? ((i > 0 ? static_cast<double>(i) * min_good : 0.0) + (i < m ? static_cast<double>(m - i) * min_bad : 0.0)) /
                static_cast<double>(m)
            : INFINITY;
        if (!(lowest_mean < mean_cap)) {
            out.vacuous.push_back(i);
            continue;
        }
        const std::uint64_t state_seed = derive_seed(cfg.seed, i);
        const auto counts = run_indexed(cfg.samples, cfg.threads, [&](std::size_t s) -> long {
            RandomStream rng(derive_seed(state_seed, s));
            std::vector<Chromosome> members;
            members.reserve(m);
            for (std::size_t attempt = 0; attempt < cfg.max_attempts_factor; ++attempt) {
                members.clear();
                double total = 0.0;
                for (std::size_t a = 0; a < m; ++a) {
                    const auto& pool = a < i ? good : bad;
                    auto c = Chromosome::from_index(pool[rng.below(pool.size())], ell);
                    total += landscape(c);
                    members.push_back(std::move(c));
                }
                if (total / static_cast<double>(m) < mean_cap) {
                    const auto pop = make_population(std::move(members), landscape);
                    const auto next = next_generation(pop, landscape, cfg.p_c, p_m, rng);
                    return static_cast<long>(cached_stats(next, s0.f_star).n_at_least);
                }
            }
            return -1;
        });
        std::vector<std::size_t> sample;
        sample.reserve(counts.size());
        for (auto c : counts) {
            if (c >= 0) {
                sample.push_back(static_cast<std::size_t>(c));
            }
        }
        if (sample.size() < cfg.samples) {
            out.short_sampled.push_back(i);
        }
        if (sample.empty()) {
            continue;
        }
        out.tested.push_back(i);
        const auto ga_tails = empirical_tails(sample, m);
        const double eps_i = sample.size() == cfg.samples ? eps : dkw_epsilon(sample.size(), cfg.confidence);
        double chain_tail = 0.0;
        std::vector<double> chain_tails(m + 1, 0.0);
        for (std::size_t j = m + 1; j-- > 0;) {
            chain_tail += matrix[i][j];
            chain_tails[j] = chain_tail;
        }
        for (std::size_t j = 0; j <= m; ++j) {
            TailRow row{i, j, std::min(1.0, chain_tails[j]), ga_tails[j], 0.0, eps_i, true};
            row.ok = tail_row_passes(row);
            out.table.rows.push_back(row);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// tau_2 and the D_n recursion

struct Tau2Config {
    double pi = 0.8;
    std::size_t m = 64; // ell = m
    double p_c = 0.1;
    std::size_t horizon = 10;
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct Tau2Report {
    std::size_t replicas = 0;
    std::vector<std::size_t> tau2_histogram; // index n = tau_2; last slot counts "not hit within horizon"
    std::vector<std::size_t> max_d;          // max over replicas of D_n
    std::size_t recursion_violations = 0;    // replicas where D_{n+1} > 2 D_n + max mutations
    std::size_t late = 0;                    // replicas with tau_2 > ln(ell) / 5
    double freq_late = 0.0;
    Interval ci_late;
};

inline Tau2Report measure_tau2_and_D(const Tau2Config& cfg)
{
    const double p_m = disordered_pm(cfg.pi, cfg.p_c, cfg.m);
    const auto landscape = sharp_peak(cfg.m);
    const auto initial = master_and_zeros(cfg.m, cfg.m, landscape);
    const auto s0 = cached_stats(initial, 2.0);
    const RegimeReference ref{s0.f_star, s0.f_bar, cfg.pi, cfg.m, cfg.m, cfg.horizon};
    const auto reports = run_indexed(cfg.replicas, cfg.threads, [&](std::size_t r) {
        return run_replica(landscape, initial, cfg.p_c, p_m, ref, derive_seed(cfg.seed, r), r);
    });
    Tau2Report out;
    out.replicas = reports.size();
    out.tau2_histogram.assign(cfg.horizon + 2, 0);
    out.max_d.assign(cfg.horizon + 1, 0);
    const double late_cut = std::log(static_cast<double>(cfg.m)) / 5.0;
    for (const auto& rep : reports) {
        if (rep.times.tau2) {
            ++out.tau2_histogram[*rep.times.tau2];
        } else {
            ++out.tau2_histogram.back();
        }
        if (!rep.times.tau2 || static_cast<double>(*rep.times.tau2) > late_cut) {
            ++out.late;
        }
        out.recursion_violations += static_cast<std::size_t>(!rep.d_recursion_ok);
        for (std::size_t n = 0; n <= cfg.horizon; ++n) {
            out.max_d[n] = std::max(out.max_d[n], rep.series[n].d_max);
        }
    }
    out.freq_late = out.replicas == 0 ? 0.0 : static_cast<double>(out.late) / static_cast<double>(out.replicas);
    out.ci_late = wilson_interval(out.late, out.replicas);
    return out;
}

} // namespace sgalab
