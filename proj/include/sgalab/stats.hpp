#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "sgalab/error.hpp"

namespace sgalab {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline double normal_quantile(double q)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(), q);
}

// Wilson score interval for a binomial proportion at two-sided level `confidence`.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence = 0.95)
{
    if (trials == 0) {
        return {0.0, 1.0};
    }
    const double z = normal_quantile(0.5 + confidence / 2.0);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    // The endpoints are exactly 0 and 1 at the extremes; rounding would leave a residue.
    return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

// Dvoretzky-Kiefer-Wolfowitz half-width: sup |F_n - F| <= eps with probability
// >= confidence.
inline double dkw_epsilon(std::size_t samples, double confidence = 0.99)
{
    if (samples == 0) {
        return 1.0;
    }
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(samples)));
}

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

// Pearson goodness of fit of `observed` counts against `probabilities`.
// Adjacent cells are pooled until each expected count reaches `min_expected`.
inline ChiSquareResult chi_square_gof(
    const std::vector<std::size_t>& observed, const std::vector<double>& probabilities, double min_expected = 5.0)
{
    if (observed.size() != probabilities.size()) {
        throw DomainError("chi-square: observed and expected cell counts differ");
    }
    double total = 0.0;
    for (auto o : observed) {
        total += static_cast<double>(o);
    }
    std::vector<double> obs;
    std::vector<double> exp;
    double o_acc = 0.0;
    double e_acc = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        o_acc += static_cast<double>(observed[k]);
        e_acc += probabilities[k] * total;
        if (e_acc >= min_expected) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (o_acc > 0.0 || e_acc > 0.0) {
        if (exp.empty()) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            exp.back() += e_acc;
        }
    }
    ChiSquareResult r;
    if (exp.size() < 2) {
        return r;
    }
    for (std::size_t k = 0; k < exp.size(); ++k) {
        const double d = obs[k] - exp[k];
        r.statistic += d * d / exp[k];
    }
    r.dof = exp.size() - 1;
    r.p_value = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared_distribution<double>(static_cast<double>(r.dof)), r.statistic));
    return r;
}

// Pearson test of independence on an r x c contingency table; empty rows and
// columns are dropped.
inline ChiSquareResult chi_square_independence(const std::vector<std::vector<std::size_t>>& table)
{
    std::vector<double> rows;
    std::vector<std::size_t> row_idx;
    std::vector<double> cols;
    double total = 0.0;
    const std::size_t nc = table.empty() ? 0 : table.front().size();
    cols.assign(nc, 0.0);
    for (std::size_t r = 0; r < table.size(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            s += static_cast<double>(table[r][c]);
            cols[c] += static_cast<double>(table[r][c]);
        }
        if (s > 0.0) {
            rows.push_back(s);
            row_idx.push_back(r);
        }
        total += s;
    }
    std::vector<std::size_t> col_idx;
    for (std::size_t c = 0; c < nc; ++c) {
        if (cols[c] > 0.0) {
            col_idx.push_back(c);
        }
    }
    ChiSquareResult res;
    if (rows.size() < 2 || col_idx.size() < 2) {
        return res;
    }
    for (std::size_t a = 0; a < row_idx.size(); ++a) {
        for (auto c : col_idx) {
            const double e = rows[a] * cols[c] / total;
            const double d = static_cast<double>(table[row_idx[a]][c]) - e;
            res.statistic += d * d / e;
        }
    }
    res.dof = (rows.size() - 1) * (col_idx.size() - 1);
    res.p_value = boost::math::cdf(boost::math::complement(
        boost::math::chi_squared_distribution<double>(static_cast<double>(res.dof)), res.statistic));
    return res;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit f;
    f.points = x.size();
    if (x.size() != y.size() || x.size() < 2) {
        return f;
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

// Empirical P(X >= k) for k = 0..top.
inline std::vector<double> empirical_tails(const std::vector<std::size_t>& samples, std::size_t top)
{
    std::vector<double> counts(top + 2, 0.0);
    for (auto s : samples) {
        counts[std::min(s, top + 1)] += 1.0;
    }
    std::vector<double> tails(top + 1, 0.0);
    double acc = counts[top + 1];
    for (std::size_t k = top + 1; k-- > 0;) {
        acc += counts[k];
        tails[k] = acc;
    }
    const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
    for (auto& t : tails) {
        t /= n;
    }
    return tails;
}

// One cell of a dominance table: P(A >= k) for the dominated process against
// P(B >= k) for the dominating one, each with its statistical half-width.
struct TailRow {
    std::size_t n = 0; // generation (or conditioning state)
    std::size_t k = 0; // tail threshold
    double dominated = 0.0;
    double dominating = 0.0;
    double eps_dominated = 0.0;
    double eps_dominating = 0.0;
    bool ok = true;
};

// A row fails only when the lower band of the dominated tail clears the upper
// band of the dominating tail.
inline bool tail_row_passes(const TailRow& r)
{
    return r.dominated - r.eps_dominated <= r.dominating + r.eps_dominating + 1e-15;
}

struct TailTable {
    std::vector<TailRow> rows;

    std::size_t violations() const
    {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const TailRow& r) { return !r.ok; }));
    }
    bool passes() const { return violations() == 0; }
};

} // namespace sgalab
