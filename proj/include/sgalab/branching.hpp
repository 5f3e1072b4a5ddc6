#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sgalab/error.hpp"
#include "sgalab/probability.hpp"
#include "sgalab/rng.hpp"
#include "sgalab/stats.hpp"

namespace sgalab {

// c * Poisson(lambda), c a nonnegative integer.
struct ScaledPoisson {
    std::size_t scale = 1;
    double lambda = 1.0;
};

// Law of Y' + 2 Y'' with Y' ~ Poisson(lambda1), Y'' ~ Poisson(lambda2) independent.
struct PoissonMixture {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct ExplicitLaw {
    DiscreteLaw law;
};

// Offspring distribution of a Galton-Watson process.
class ReproductionLaw {
public:
    using Kind = std::variant<ScaledPoisson, PoissonMixture, ExplicitLaw>;

    ReproductionLaw(Kind kind)
        : kind_(std::move(kind))
    {
        if (const auto* sp = std::get_if<ScaledPoisson>(&kind_)) {
            if (!(sp->lambda >= 0.0)) {
                throw DomainError("Poisson mean must be >= 0");
            }
        } else if (const auto* pm = std::get_if<PoissonMixture>(&kind_)) {
            if (!(pm->lambda1 >= 0.0 && pm->lambda2 >= 0.0)) {
                throw DomainError("Poisson means must be >= 0");
            }
        } else {
            const auto& e = std::get<ExplicitLaw>(kind_);
            e.law.validate();
            if (e.law.tail_mass > 0.0) {
                throw DomainError("explicit reproduction laws must have finite support");
            }
        }
    }

    static ReproductionLaw poisson(double lambda) { return ReproductionLaw(ScaledPoisson{1, lambda}); }
    static ReproductionLaw scaled_poisson(std::size_t c, double lambda) { return ReproductionLaw(ScaledPoisson{c, lambda}); }
    // nu* = law of Y' + 2 Y'', Y' ~ P(pi (1 + 3 eps)), Y'' ~ P(eps).
    static ReproductionLaw nu_star(double pi, double eps)
    {
        return ReproductionLaw(PoissonMixture{pi * (1.0 + 3.0 * eps), eps});
    }
    static ReproductionLaw point(std::size_t k) { return ReproductionLaw(ExplicitLaw{point_mass(k)}); }

    const Kind& kind() const noexcept { return kind_; }

    double mean() const
    {
        return std::visit(
            [](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ScaledPoisson>) {
                    return static_cast<double>(k.scale) * k.lambda;
                } else if constexpr (std::is_same_v<T, PoissonMixture>) {
                    return k.lambda1 + 2.0 * k.lambda2;
                } else {
                    return k.law.mean();
                }
            },
            kind_);
    }

    // Probability generating function E s^X, s in [0, 1].
    double pgf(double s) const
    {
        return std::visit(
            [s](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ScaledPoisson>) {
                    return std::exp(k.lambda * (std::pow(s, static_cast<double>(k.scale)) - 1.0));
                } else if constexpr (std::is_same_v<T, PoissonMixture>) {
                    return std::exp(k.lambda1 * (s - 1.0) + k.lambda2 * (s * s - 1.0));
                } else {
                    double v = 0.0;
                    for (std::size_t i = k.law.pmf.size(); i-- > 0;) {
                        v = v * s + k.law.pmf[i];
                    }
                    return v;
                }
            },
            kind_);
    }

    // Truncated pmf, used by the tail-bound routines.
    DiscreteLaw to_law(double truncation = default_truncation) const
    {
        return std::visit(
            [truncation](const auto& k) -> DiscreteLaw {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ScaledPoisson>) {
                    return scale_law(poisson_law(k.lambda, truncation), k.scale);
                } else if constexpr (std::is_same_v<T, PoissonMixture>) {
                    return convolve(poisson_law(k.lambda1, truncation), scale_law(poisson_law(k.lambda2, truncation), 2));
                } else {
                    return k.law;
                }
            },
            kind_);
    }

    // Sum of `count` independent draws. Poisson kinds use closure under
    // convolution; explicit laws draw multinomial counts by sequential binomials.
    std::uint64_t sample_sum(std::uint64_t count, RandomStream& rng) const
    {
        if (count == 0) {
            return 0;
        }
        const double n = static_cast<double>(count);
        if (const auto* sp = std::get_if<ScaledPoisson>(&kind_)) {
            return sp->scale * rng.poisson(n * sp->lambda);
        }
        if (const auto* pm = std::get_if<PoissonMixture>(&kind_)) {
            return rng.poisson(n * pm->lambda1) + 2 * rng.poisson(n * pm->lambda2);
        }
        const auto& pmf = std::get<ExplicitLaw>(kind_).law.pmf;
        std::uint64_t remaining = count;
        double mass_left = 1.0;
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < pmf.size() && remaining > 0; ++k) {
            const double p = mass_left > 0.0 ? std::min(1.0, pmf[k] / mass_left) : 1.0;
            const auto c = k + 1 == pmf.size() ? remaining : rng.binomial(remaining, p);
            total += c * k;
            remaining -= c;
            mass_left -= pmf[k];
        }
        return total;
    }

private:
    Kind kind_;
};

inline constexpr std::uint64_t default_population_cap = 1'000'000'000ULL;

struct GwTrajectory {
    std::vector<std::uint64_t> sizes; // Z_0 .. Z_H
    std::optional<std::size_t> extinct_at;
    bool overflow = false; // exceeded the cap; sizes stop at the first value above it
};

// Z_0 = 1, Z_{n+1} = sum of Z_n draws from `law`, up to `horizon`. Stops early on
// extinction (trailing zeros are implied) or when Z exceeds `cap`.
inline GwTrajectory gw_simulate(
    const ReproductionLaw& law, std::size_t horizon, RandomStream& rng, std::uint64_t cap = default_population_cap)
{
    GwTrajectory t;
    t.sizes.reserve(horizon + 1);
    t.sizes.push_back(1);
    for (std::size_t n = 0; n < horizon; ++n) {
        const auto next = law.sample_sum(t.sizes.back(), rng);
        t.sizes.push_back(next);
        if (next == 0) {
            t.extinct_at = n + 1;
            break;
        }
        if (next > cap) {
            t.overflow = true;
            break;
        }
    }
    return t;
}

// Z_n of a trajectory, extending absorbed trajectories with zeros and
// overflowed ones with their last (above-cap) value.
inline std::uint64_t size_at(const GwTrajectory& t, std::size_t n)
{
    if (n < t.sizes.size()) {
        return t.sizes[n];
    }
    return t.extinct_at ? 0 : t.sizes.back();
}

// Smallest root of q = G(q), by iterating G from 0. Laws with G(0) = 0 never
// die out; otherwise mean <= 1 means almost sure extinction.
inline double gw_extinction_pgf(const ReproductionLaw& law, double tol = 1e-12, std::size_t max_iter = 1'000'000)
{
    const double g0 = law.pgf(0.0);
    if (g0 == 0.0) {
        return 0.0;
    }
    const double mean = law.mean();
    if (mean <= 1.0) {
        return 1.0;
    }
    double q = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double next = law.pgf(q);
        if (std::abs(next - q) < tol) {
            return next;
        }
        q = next;
    }
    throw NumericalError("pgf iteration did not converge within " + std::to_string(max_iter) + " steps (q = " +
        std::to_string(q) + ")");
}

// Empirical P(Z_n > 0) for n = 0..horizon.
inline std::vector<double> gw_survival_decay(
    const ReproductionLaw& law, std::size_t horizon, std::size_t replicas, RandomStream& rng)
{
    if (!(law.mean() < 1.0)) {
        throw PreconditionError("survival decay needs a subcritical law (mean < 1)");
    }
    std::vector<double> alive(horizon + 1, 0.0);
    for (std::size_t r = 0; r < replicas; ++r) {
        auto stream = rng.substream(r);
        const auto t = gw_simulate(law, horizon, stream);
        const std::size_t last = t.extinct_at ? *t.extinct_at : horizon + 1;
        for (std::size_t n = 0; n < last && n <= horizon; ++n) {
            alive[n] += 1.0;
        }
    }
    for (auto& a : alive) {
        a /= static_cast<double>(replicas);
    }
    return alive;
}

// Fit ln P(Z_n > 0) = a + b n over n >= burn_in while at least `min_count`
// replicas survive. The decay rate c of P(Z_n > 0) <= e^{-cn} is -slope.
inline LinearFit fit_survival_decay(
    const std::vector<double>& survival, std::size_t replicas, std::size_t burn_in = 1, double min_count = 30.0)
{
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t n = burn_in; n < survival.size(); ++n) {
        if (survival[n] * static_cast<double>(replicas) < min_count) {
            break;
        }
        x.push_back(static_cast<double>(n));
        y.push_back(std::log(survival[n]));
    }
    return least_squares(x, y);
}

// Frequency of {tau_1 < kappa ln n}, tau_1 = inf{k >= 1 : Z_k > n^exponent}.
inline double gw_threshold_hitting(const ReproductionLaw& law, double exponent, double n, double kappa,
    std::size_t replicas, RandomStream& rng)
{
    if (!(law.mean() > 1.0)) {
        throw PreconditionError("threshold hitting needs a supercritical law (mean > 1)");
    }
    if (!(n >= 1.0) || kappa < 0.0) {
        throw PreconditionError("threshold hitting needs n >= 1 and kappa >= 0");
    }
    const double threshold = std::pow(n, exponent);
    const double limit = kappa * std::log(n);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        auto stream = rng.substream(r);
        std::uint64_t z = 1;
        for (std::size_t k = 1; static_cast<double>(k) < limit; ++k) {
            z = law.sample_sum(z, stream);
            if (static_cast<double>(z) > threshold) {
                ++hits;
                break;
            }
            if (z == 0) {
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(replicas);
}

} // namespace sgalab
