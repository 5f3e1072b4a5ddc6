#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "sgalab/error.hpp"

namespace sgalab {

// Probability law on {0, 1, 2, ...}. Infinite-support laws are truncated and
// the discarded mass is carried in `tail_mass`.
struct DiscreteLaw {
    std::vector<double> pmf;
    double tail_mass = 0.0;

    std::size_t support_size() const noexcept { return pmf.size(); }

    double mass(std::size_t k) const noexcept { return k < pmf.size() ? pmf[k] : 0.0; }

    double mean() const noexcept
    {
        double s = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            s += static_cast<double>(k) * pmf[k];
        }
        return s;
    }

    // P(X >= i) over the stored pmf.
    double upper_tail(std::size_t i) const noexcept
    {
        double s = 0.0;
        for (std::size_t k = pmf.size(); k-- > i;) {
            s += pmf[k];
        }
        return s;
    }

    // Upper tails at 0..size-1, accumulated from the right.
    std::vector<double> upper_tails() const
    {
        std::vector<double> t(pmf.size() + 1, 0.0);
        for (std::size_t k = pmf.size(); k-- > 0;) {
            t[k] = t[k + 1] + pmf[k];
        }
        return t;
    }

    void validate() const
    {
        double total = tail_mass;
        for (double p : pmf) {
            if (!(p >= 0.0)) {
                throw DomainError("negative or NaN probability in law");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw DomainError("law mass differs from 1 by " + std::to_string(total - 1.0));
        }
    }
};

inline constexpr double default_truncation = 1e-12;

inline DiscreteLaw point_mass(std::size_t k)
{
    DiscreteLaw law;
    law.pmf.assign(k + 1, 0.0);
    law.pmf[k] = 1.0;
    return law;
}

inline DiscreteLaw binomial_law(std::size_t n, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("binomial probability outside [0, 1]");
    }
    if (p == 0.0) {
        return point_mass(0);
    }
    if (p == 1.0) {
        return point_mass(n);
    }
    DiscreteLaw law;
    law.pmf.resize(n + 1);
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double dn = static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double lc = std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
        law.pmf[k] = std::exp(lc + dk * lp + (dn - dk) * lq);
    }
    return law;
}

// Poisson(lambda) truncated at the first k whose remaining mass is below `truncation`.
inline DiscreteLaw poisson_law(double lambda, double truncation = default_truncation)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("Poisson mean must be finite and >= 0");
    }
    if (lambda == 0.0) {
        return point_mass(0);
    }
    DiscreteLaw law;
    double p = std::exp(-lambda);
    double cumulative = 0.0;
    // Work in log space once e^-lambda underflows.
    const bool use_log = p == 0.0;
    const double log_lambda = std::log(lambda);
    for (std::size_t k = 0;; ++k) {
        if (use_log) {
            const double dk = static_cast<double>(k);
            p = std::exp(-lambda + dk * log_lambda - std::lgamma(dk + 1.0));
        } else if (k > 0) {
            p *= lambda / static_cast<double>(k);
        }
        law.pmf.push_back(p);
        cumulative += p;
        const double dk = static_cast<double>(k);
        if (dk + 1.0 > lambda) {
            // Past the mode the terms shrink at least geometrically with ratio
            // lambda / (k + 1), which bounds the rest even when rounding keeps
            // 1 - cumulative from ever dropping below the truncation level.
            const double rest = std::min(1.0 - cumulative, p * lambda / (dk + 1.0 - lambda));
            if (dk > lambda && rest < truncation) {
                law.tail_mass = std::max(0.0, rest);
                return law;
            }
        }
    }
}

// Law of c * X for an integer c >= 1.
inline DiscreteLaw scale_law(const DiscreteLaw& law, std::size_t c)
{
    if (c == 0) {
        return point_mass(0);
    }
    DiscreteLaw out;
    out.pmf.assign((law.pmf.size() - 1) * c + 1, 0.0);
    for (std::size_t k = 0; k < law.pmf.size(); ++k) {
        out.pmf[k * c] = law.pmf[k];
    }
    out.tail_mass = law.tail_mass;
    return out;
}

// Law of X + Y for independent X, Y.
inline DiscreteLaw convolve(const DiscreteLaw& a, const DiscreteLaw& b)
{
    DiscreteLaw out;
    out.pmf.assign(a.pmf.size() + b.pmf.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.pmf.size(); ++i) {
        for (std::size_t j = 0; j < b.pmf.size(); ++j) {
            out.pmf[i + j] += a.pmf[i] * b.pmf[j];
        }
    }
    out.tail_mass = std::min(1.0, a.tail_mass + b.tail_mass);
    return out;
}

// Empirical law of a sample of nonnegative integers.
inline DiscreteLaw empirical_law(const std::vector<std::size_t>& samples)
{
    DiscreteLaw law;
    if (samples.empty()) {
        return law;
    }
    const auto top = *std::max_element(samples.begin(), samples.end());
    law.pmf.assign(top + 1, 0.0);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (auto s : samples) {
        law.pmf[s] += w;
    }
    return law;
}

// (f*/fbar)(1 - p_C)(1 - p_M)^ell
inline double pi_parameter(double f_star, double f_bar, double p_c, double p_m, std::size_t ell)
{
    if (!(f_bar > 0.0)) {
        throw DomainError("mean fitness must be > 0");
    }
    return (f_star / f_bar) * (1.0 - p_c) * std::pow(1.0 - p_m, static_cast<double>(ell));
}

// mu <= nu in the stochastic order on N: mu([i, inf)) <= nu([i, inf)) + tol for
// every i. Truncated mass of either law is added to the slack; the default
// tolerance absorbs rounding in the tail sums.
inline bool stochastic_dominates(const DiscreteLaw& mu, const DiscreteLaw& nu, double tol = 1e-12)
{
    const auto tm = mu.upper_tails();
    const auto tn = nu.upper_tails();
    const double slack = tol + mu.tail_mass + nu.tail_mass;
    const std::size_t top = std::max(tm.size(), tn.size());
    for (std::size_t i = 0; i < top; ++i) {
        const double a = i < tm.size() ? tm[i] : 0.0;
        const double b = i < tn.size() ? tn[i] : 0.0;
        if (a > b + slack) {
            return false;
        }
    }
    return true;
}

// Sufficient condition for Binomial(n, p) <= Poisson(lambda).
inline bool binomial_poisson_condition(std::size_t n, double p, double lambda)
{
    return std::pow(1.0 - p, static_cast<double>(n)) >= std::exp(-lambda);
}

// (lambda e / t)^t, an upper bound on P(Y >= t) for Y ~ Poisson(lambda), t >= lambda.
inline double poisson_tail_bound(double lambda, double t)
{
    if (!(lambda > 0.0)) {
        throw DomainError("Poisson tail bound needs lambda > 0");
    }
    if (!(t >= lambda)) {
        throw DomainError("Poisson tail bound needs t >= lambda");
    }
    return std::exp(t * (std::log(lambda) + 1.0 - std::log(t)));
}

// Closed form of the Cramer transform of alpha*Y, Y ~ Poisson(lambda).
inline double cramer_scaled_poisson(double lambda, double alpha, double x)
{
    if (alpha == 0.0 || !(lambda > 0.0)) {
        throw DomainError("scaled Poisson transform needs alpha != 0 and lambda > 0");
    }
    const double r = x / (lambda * alpha);
    if (!(r > 0.0)) {
        throw DomainError("scaled Poisson transform needs x / (lambda alpha) > 0");
    }
    return (x / alpha) * std::log(r) - x / alpha + lambda;
}

// exp(-(2/n)(np - t)^2) >= P(X < t) for X ~ Binomial(n, p), t < np.
inline double hoeffding_lower_tail(std::size_t n, double p, double t)
{
    const double dn = static_cast<double>(n);
    if (n == 0 || !(t < dn * p)) {
        throw DomainError("Hoeffding lower tail needs t < np");
    }
    const double d = dn * p - t;
    return std::exp(-2.0 / dn * d * d);
}

namespace detail {

    inline double log_sum_exp(const std::vector<double>& terms)
    {
        double top = -std::numeric_limits<double>::infinity();
        for (double v : terms) {
            top = std::max(top, v);
        }
        if (!std::isfinite(top)) {
            return top;
        }
        double s = 0.0;
        for (double v : terms) {
            s += std::exp(v - top);
        }
        return top + std::log(s);
    }

} // namespace detail

// Log-Laplace transform of a law scaled by alpha: t -> ln E exp(t alpha X).
inline double log_laplace(const DiscreteLaw& law, double alpha, double t)
{
    std::vector<double> terms;
    terms.reserve(law.pmf.size());
    for (std::size_t k = 0; k < law.pmf.size(); ++k) {
        if (law.pmf[k] > 0.0) {
            terms.push_back(std::log(law.pmf[k]) + t * alpha * static_cast<double>(k));
        }
    }
    return detail::log_sum_exp(terms);
}

struct CramerResult {
    double value = 0.0;
    double argmax = 0.0;
    int iterations = 0;
};

// Numerical Fenchel-Legendre transform sup_t (t x - L(t)) of a convex log-Laplace
// L with L(0) = 0. `lo` and `hi` bound the support of the variable (may be
// infinite); outside [lo, hi] the transform is +infinity. The maximiser is
// bracketed by doubling steps from 0 and then refined with Brent's method.
inline CramerResult cramer_transform(
    const std::function<double(double)>& log_laplace_fn, double x, double mean, double lo, double hi)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (x < lo || x > hi) {
        return {inf, std::numeric_limits<double>::quiet_NaN(), 0};
    }
    const auto objective = [&](double t) { return t * x - log_laplace_fn(t); };
    if (x == mean) {
        return {0.0, 0.0, 0};
    }
    const double dir = x > mean ? 1.0 : -1.0;
    // Steps stay below the overflow range of exp for |alpha| >= 1e-2.
    constexpr double t_limit = 600.0;
    double step = 0.25;
    double prev = 0.0;
    double prev_value = 0.0;
    double cur = dir * step;
    double cur_value = objective(cur);
    int expansions = 0;
    if (cur_value < prev_value) {
        // Maximiser lies in (0, cur).
        cur = dir * step;
    } else {
        while (true) {
            step *= 2.0;
            const double nxt = dir * std::min(step, t_limit);
            const double nxt_value = objective(nxt);
            ++expansions;
            if (!std::isfinite(nxt_value) || nxt_value <= cur_value) {
                cur = nxt;
                break;
            }
            prev = cur;
            prev_value = cur_value;
            cur = nxt;
            cur_value = nxt_value;
            if (std::abs(nxt) >= t_limit) {
                // x sits on the edge of the support: the supremum is the limit
                // at infinity, reached to double precision by now.
                return {cur_value, cur, expansions};
            }
        }
    }
    const double a = std::min(prev, cur);
    const double b = std::max(prev, cur);
    std::uintmax_t max_iter = 500;
    const auto neg = [&](double t) {
        const double v = objective(t);
        return std::isfinite(v) ? -v : inf;
    };
    const auto r = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits / 2, max_iter);
    if (max_iter >= 500) {
        throw NumericalError("Cramer maximisation did not converge on [" + std::to_string(a) + ", " +
            std::to_string(b) + "] for x = " + std::to_string(x));
    }
    return {-r.second, r.first, expansions + static_cast<int>(max_iter)};
}

// Cramer transform of a DiscreteLaw at x.
inline double cramer_of_law(const DiscreteLaw& law, double x)
{
    std::size_t lo = 0;
    while (lo < law.pmf.size() && law.pmf[lo] == 0.0) {
        ++lo;
    }
    std::size_t hi = law.pmf.size() - 1;
    while (hi > lo && law.pmf[hi] == 0.0) {
        --hi;
    }
    // A truncated infinite-support law is treated as unbounded above.
    const double upper = law.tail_mass > 0.0 ? std::numeric_limits<double>::infinity() : static_cast<double>(hi);
    return cramer_transform([&](double t) { return log_laplace(law, 1.0, t); }, x, law.mean(), static_cast<double>(lo),
        upper)
        .value;
}

// exp(-n Lambda*(x)) >= P((X_1 + ... + X_n)/n >= x) for x >= mean.
inline double chernoff_sum_bound(const DiscreteLaw& law, std::size_t n, double x)
{
    const double mean = law.mean();
    if (x < mean - 1e-12) {
        throw DomainError("Chernoff bound needs x >= mean of the law");
    }
    if (n == 0) {
        throw DomainError("Chernoff bound needs n >= 1");
    }
    if (x <= mean) {
        return 1.0;
    }
    return std::exp(-static_cast<double>(n) * cramer_of_law(law, x));
}

// (Lambda*_{alpha X}(x), Lambda*_{alpha Y}(x)) for X ~ Binomial(n, p) and
// Y ~ Poisson(np), both maximised numerically from their closed-form
// log-Laplace transforms.
inline std::pair<double, double> cramer_binomial_vs_poisson(std::size_t n, double p, double alpha, double x)
{
    if (!(p >= 0.0 && p <= 1.0) || n == 0) {
        throw DomainError("binomial parameters out of range");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double dn = static_cast<double>(n);
    const double lambda = dn * p;
    if (alpha == 0.0 || p == 0.0) {
        // Both variables are degenerate at 0.
        const double v = x == 0.0 ? 0.0 : inf;
        return {v, v};
    }
    const auto binom_ll = [=](double t) {
        // n ln(1 - p + p e^{alpha t}) = n ln(1 + p (e^{alpha t} - 1))
        const double at = alpha * t;
        if (at > 30.0) {
            return dn * (at + std::log(p + (1.0 - p) * std::exp(-at)));
        }
        return dn * std::log1p(p * std::expm1(at));
    };
    const auto poisson_ll = [=](double t) { return lambda * std::expm1(alpha * t); };
    const double mean = alpha * lambda;
    const double bx_lo = alpha > 0.0 ? 0.0 : alpha * dn;
    const double bx_hi = alpha > 0.0 ? alpha * dn : 0.0;
    const double py_lo = alpha > 0.0 ? 0.0 : -inf;
    const double py_hi = alpha > 0.0 ? inf : 0.0;
    const double first = cramer_transform(binom_ll, x, mean, bx_lo, bx_hi).value;
    const double second = cramer_transform(poisson_ll, x, mean, py_lo, py_hi).value;
    return {first, second};
}

} // namespace sgalab
