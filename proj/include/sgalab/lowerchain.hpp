#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sgalab/error.hpp"
#include "sgalab/rng.hpp"

namespace sgalab {

// Parameters of the lower Markov chain (N_n) on {0, ..., m}. `ratio` is
// f0*/f0bar; pi must equal ratio (1 - p_C)(1 - p_M)^ell.
struct LowerChainParams {
    std::size_t m = 0;
    double pi = 1.0;
    double ratio = 1.0;
    double p_c = 0.0;
    double p_m = 0.0;
    std::size_t ell = 1;
    // Modified chain: 0 moves to 1 with probability 1 instead of being absorbing.
    bool restart_from_zero = false;

    void validate() const
    {
        if (m == 0 || m % 2 != 0) {
            throw ConfigError("m", "must be a positive even integer");
        }
        if (!(pi > 0.0)) {
            throw ConfigError("pi", "must be > 0");
        }
        if (!(ratio > 1.0)) {
            throw ConfigError("ratio", "f0*/f0bar must be > 1");
        }
        if (!(p_c >= 0.0 && p_c <= 1.0)) {
            throw ConfigError("p_c", "must lie in [0, 1]");
        }
        if (!(p_m >= 0.0 && p_m <= 1.0)) {
            throw ConfigError("p_m", "must lie in [0, 1]");
        }
        const double implied = ratio * (1.0 - p_c) * std::pow(1.0 - p_m, static_cast<double>(ell));
        if (std::abs(implied - pi) > 1e-12 * std::max(1.0, pi)) {
            throw ConfigError("pi", "inconsistent with ratio (1 - p_c)(1 - p_m)^ell = " + std::to_string(implied));
        }
    }

    // Solve for p_M so that the parameters are consistent.
    static LowerChainParams from_pi(std::size_t m, double pi, double ratio, double p_c, std::size_t ell)
    {
        const double base = pi / (ratio * (1.0 - p_c));
        if (!(base > 0.0 && base <= 1.0)) {
            throw ConfigError("pi", "no p_m in [0, 1] reaches this pi with the given ratio and p_c");
        }
        LowerChainParams p{m, pi, ratio, p_c, 1.0 - std::pow(base, 1.0 / static_cast<double>(ell)), ell};
        // Recompute pi from the rounded p_m so validate() holds exactly.
        p.pi = ratio * (1.0 - p_c) * std::pow(1.0 - p.p_m, static_cast<double>(ell));
        p.validate();
        return p;
    }

    double threshold() const { return static_cast<double>(m) / std::sqrt(pi); }
};

// i f0* (1 - p_M)^ell / (m sqrt(pi) f0bar), before clamping.
inline double epsilon_m_unclamped(const LowerChainParams& p, std::size_t i)
{
    return static_cast<double>(i) * p.ratio * std::pow(1.0 - p.p_m, static_cast<double>(p.ell)) /
        (static_cast<double>(p.m) * std::sqrt(p.pi));
}

inline double epsilon_m(const LowerChainParams& p, std::size_t i)
{
    if (i > p.m) {
        throw DomainError("state outside {0, ..., m}");
    }
    return std::min(1.0, epsilon_m_unclamped(p, i));
}

// One transition from state i. In law, sum_k Z_k (Y_{2k-1} + Y_{2k}) equals a
// Binomial(2B, eps) with B ~ Binomial(m/2, 1 - p_C), which is what is drawn.
inline std::size_t transition_sample(const LowerChainParams& p, std::size_t i, RandomStream& rng)
{
    if (i == 0) {
        return p.restart_from_zero ? 1 : 0;
    }
    const auto b = rng.binomial(p.m / 2, 1.0 - p.p_c);
    const auto n = rng.binomial(2 * b, epsilon_m(p, i));
    return std::min<std::size_t>(static_cast<std::size_t>(n), p.m);
}

inline constexpr std::size_t max_exact_m = 64;

using Matrix = std::vector<std::vector<double>>;

// P(N_{n+1} = j | N_n = i) =
//   sum_b C(m/2, b) (1-p_C)^b p_C^{m/2-b} C(2b, j) eps_i^j (1 - eps_i)^{2b-j}.
inline Matrix transition_matrix(const LowerChainParams& p)
{
    if (p.m > max_exact_m) {
        throw CapabilityError("exact transition matrix limited to m <= " + std::to_string(max_exact_m));
    }
    const std::size_t m = p.m;
    const std::size_t half = m / 2;
    // Pascal's triangle up to m; exact in double for m <= 64.
    std::vector<std::vector<double>> choose(m + 1, std::vector<double>(m + 1, 0.0));
    for (std::size_t n = 0; n <= m; ++n) {
        choose[n][0] = 1.0;
        for (std::size_t k = 1; k <= n; ++k) {
            choose[n][k] = choose[n - 1][k - 1] + (k <= n - 1 ? choose[n - 1][k] : 0.0);
        }
    }
    std::vector<double> pairs(half + 1);
    for (std::size_t b = 0; b <= half; ++b) {
        pairs[b] = choose[half][b] * std::pow(1.0 - p.p_c, static_cast<double>(b)) *
            std::pow(p.p_c, static_cast<double>(half - b));
    }
    Matrix mat(m + 1, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i <= m; ++i) {
        if (i == 0) {
            mat[0][p.restart_from_zero ? 1 : 0] = 1.0;
            continue;
        }
        const double e = epsilon_m(p, i);
        for (std::size_t b = 0; b <= half; ++b) {
            for (std::size_t j = 0; j <= 2 * b; ++j) {
                mat[i][j] += pairs[b] * choose[2 * b][j] * std::pow(e, static_cast<double>(j)) *
                    std::pow(1.0 - e, static_cast<double>(2 * b - j));
            }
        }
    }
    return mat;
}

// Dense text export: one row per line, entries separated by a space, %.17g.
inline std::string matrix_to_text(const Matrix& mat)
{
    std::string out;
    char buf[32];
    for (const auto& row : mat) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            if (j > 0) {
                out += ' ';
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

// Runs one chain per distinct initial state on shared randomness: at each
// step every chain sees the same no-crossover indicators Z_k and uniforms
// U_{2k-1}, U_{2k}, and moves to sum_k Z_k (1{U_{2k-1} < eps(N)} + 1{U_{2k} < eps(N)}).
inline std::map<std::size_t, std::vector<std::size_t>> coupled_trajectories(
    const LowerChainParams& p, const std::set<std::size_t>& initial_states, std::size_t horizon, RandomStream& rng)
{
    std::map<std::size_t, std::vector<std::size_t>> out;
    for (auto s : initial_states) {
        if (s > p.m) {
            throw DomainError("initial state outside {0, ..., m}");
        }
        out[s].reserve(horizon + 1);
        out[s].push_back(s);
    }
    const std::size_t half = p.m / 2;
    std::vector<unsigned char> z(half);
    std::vector<double> u(p.m);
    for (std::size_t n = 0; n < horizon; ++n) {
        for (std::size_t k = 0; k < half; ++k) {
            z[k] = rng.bernoulli(1.0 - p.p_c) ? 1 : 0;
            u[2 * k] = rng.uniform();
            u[2 * k + 1] = rng.uniform();
        }
        for (auto& [start, path] : out) {
            const std::size_t cur = path.back();
            if (cur == 0) {
                path.push_back(p.restart_from_zero ? 1 : 0);
                continue;
            }
            const double e = epsilon_m(p, cur);
            std::size_t next = 0;
            for (std::size_t k = 0; k < half; ++k) {
                if (z[k] != 0) {
                    next += static_cast<std::size_t>(u[2 * k] < e) + static_cast<std::size_t>(u[2 * k + 1] < e);
                }
            }
            path.push_back(next);
        }
    }
    return out;
}

struct HittingResult {
    double frequency = 0.0;              // P(tau* <= horizon)
    std::size_t hits = 0;
    std::size_t replicas = 0;
    std::vector<std::size_t> histogram;  // histogram[n] = #replicas with tau* = n
};

// tau* = inf{n >= 0 : N_n >= m / sqrt(pi)} from N_0 = 1.
inline HittingResult hitting_time_tau_star(
    const LowerChainParams& p, std::size_t horizon, std::size_t replicas, RandomStream& rng)
{
    if (!(p.pi > 1.0)) {
        throw PreconditionError("tau* experiments need pi > 1");
    }
    const double threshold = p.threshold();
    HittingResult res;
    res.replicas = replicas;
    res.histogram.assign(horizon + 1, 0);
    for (std::size_t r = 0; r < replicas; ++r) {
        auto stream = rng.substream(r);
        std::size_t state = 1;
        for (std::size_t n = 0; n <= horizon; ++n) {
            if (static_cast<double>(state) >= threshold) {
                ++res.histogram[n];
                ++res.hits;
                break;
            }
            if (n == horizon || (state == 0 && !p.restart_from_zero)) {
                break;
            }
            state = transition_sample(p, state, stream);
        }
    }
    res.frequency = replicas == 0 ? 0.0 : static_cast<double>(res.hits) / static_cast<double>(replicas);
    return res;
}

// Frequency of the one-step failure {N_1 <= rho i | N_0 = i}.
inline double geometric_growth_check(
    const LowerChainParams& p, std::size_t i, double rho, std::size_t replicas, RandomStream& rng)
{
    if (!(p.pi > 1.0)) {
        throw PreconditionError("geometric growth needs pi > 1");
    }
    if (!(rho > 1.0 && rho < std::sqrt(p.pi))) {
        throw PreconditionError("rho must lie in (1, sqrt(pi))");
    }
    if (static_cast<double>(i) > p.threshold()) {
        throw PreconditionError("state must satisfy i <= m / sqrt(pi)");
    }
    std::size_t failures = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        auto stream = rng.substream(r);
        const auto next = transition_sample(p, i, stream);
        failures += static_cast<std::size_t>(static_cast<double>(next) <= rho * static_cast<double>(i));
    }
    return replicas == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(replicas);
}

// Successor values N_{T(s)+1} at the first visit T(s) of each state in `states`,
// for one run of the chain from `start`. Entries stay -1 for states not visited
// within `max_steps`.
inline std::vector<long> first_visit_successors(const LowerChainParams& p, const std::vector<std::size_t>& states,
    std::size_t start, std::size_t max_steps, RandomStream& rng)
{
    std::vector<long> out(states.size(), -1);
    std::size_t remaining = states.size();
    std::size_t cur = start;
    for (std::size_t n = 0; n < max_steps && remaining > 0; ++n) {
        const auto next = transition_sample(p, cur, rng);
        for (std::size_t a = 0; a < states.size(); ++a) {
            if (out[a] < 0 && states[a] == cur) {
                out[a] = static_cast<long>(next);
                --remaining;
            }
        }
        cur = next;
    }
    return out;
}

} // namespace sgalab
