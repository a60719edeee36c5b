#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include "refcast/error.hpp"
#include "refcast/stats/distribution.hpp"
#include "refcast/stats/rank_tests.hpp"
#include "refcast/stats/transform.hpp"

namespace refcast::stats {

namespace detail {

inline double f_upper_tail(double f, double df1, double df2) {
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    const boost::math::fisher_f_distribution<double> dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

}  // namespace detail

/// Classical one-way ANOVA. statistic = F with (k-1, N-k) degrees of freedom.
inline TestResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw DomainError("ANOVA needs at least two groups");
    std::size_t total_n = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw DomainError("every ANOVA group needs at least two observations");
        total_n += g.size();
        for (double v : g) grand_sum += v;
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double m = detail::mean(g);
        ss_between += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
        for (double v : g) ss_within += (v - m) * (v - m);
    }
    if (ss_within <= 0.0) throw DomainError("ANOVA undefined: zero within-group variance in every group");
    const auto k = static_cast<double>(groups.size());
    const auto n = static_cast<double>(total_n);
    const double df1 = k - 1.0;
    const double df2 = n - k;
    TestResult out;
    out.statistic = (ss_between / df1) / (ss_within / df2);
    out.p_value = detail::f_upper_tail(out.statistic, df1, df2);
    out.method = "one-way ANOVA F(" + std::to_string(static_cast<int>(df1)) + ", " +
                 std::to_string(static_cast<int>(df2)) + ")";
    return out;
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double f = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Simple linear regression of transform_y(y) on transform_x(x).
/// F = R^2 (n-2) / (1-R^2) on (1, n-2) df.
inline OlsFit ols_univariate(std::span<const double> x, std::span<const double> y,
                             Transformation x_transform = Transformation::identity(),
                             Transformation y_transform = Transformation::identity()) {
    if (x.size() != y.size()) throw DomainError("x and y differ in length");
    if (x.size() < 3) throw DomainError("univariate OLS needs at least three points");
    const std::size_t n = x.size();
    std::vector<double> tx(n);
    std::vector<double> ty(n);
    for (std::size_t i = 0; i < n; ++i) {
        tx[i] = x_transform.forward(x[i]);
        ty[i] = y_transform.forward(y[i]);
    }
    const double mx = detail::mean(tx);
    const double my = detail::mean(ty);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (tx[i] - mx) * (tx[i] - mx);
        sxy += (tx[i] - mx) * (ty[i] - my);
        syy += (ty[i] - my) * (ty[i] - my);
    }
    if (sxx <= 0.0) throw DomainError("univariate OLS undefined: zero variance in x");
    OlsFit out;
    out.n = n;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ty[i] - (out.intercept + out.slope * tx[i]);
        sse += e * e;
    }
    if (syy <= 0.0) {
        out.r2 = 0.0;
        out.f = 0.0;
        out.p_value = 1.0;
        return out;
    }
    out.r2 = std::max(0.0, std::min(1.0, 1.0 - sse / syy));
    const auto df2 = static_cast<double>(n) - 2.0;
    if (out.r2 >= 1.0) {
        out.f = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
    } else {
        out.f = out.r2 * df2 / (1.0 - out.r2);
        out.p_value = detail::f_upper_tail(out.f, 1.0, df2);
    }
    return out;
}

}  // namespace refcast::stats
