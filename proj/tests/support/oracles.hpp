#pragma once

// Brute-force reference implementations used as test oracles. They share no
// code with the library: ranks are counted pairwise and null distributions
// are enumerated outright.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

enum class Tail { two_sided, greater, less };

// Midrank of each value: (#less) + (#equal + 1) / 2.
inline std::vector<double> naive_midranks(std::span<const double> v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0.0;
        double equal = 0.0;
        for (double w : v) {
            if (w < v[i]) less += 1.0;
            if (w == v[i]) equal += 1.0;
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

// Probability of a statistic at least/at most as extreme as `observed`
// under an enumerated null (all outcomes equally likely).
inline double tail_probability(const std::vector<double>& null_stats, double observed, Tail tail) {
    const double eps = 1e-9;
    double ge = 0.0;
    double le = 0.0;
    for (double s : null_stats) {
        if (s >= observed - eps) ge += 1.0;
        if (s <= observed + eps) le += 1.0;
    }
    ge /= static_cast<double>(null_stats.size());
    le /= static_cast<double>(null_stats.size());
    switch (tail) {
        case Tail::greater: return ge;
        case Tail::less: return le;
        case Tail::two_sided: return std::min(1.0, 2.0 * std::min(ge, le));
    }
    return 1.0;
}

// W+ over every one of the 2^n sign assignments of the given ranks.
inline std::vector<double> signed_rank_null(const std::vector<double>& ranks) {
    const std::size_t n = ranks.size();
    std::vector<double> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) w += ranks[i];
        }
        out.push_back(w);
    }
    return out;
}

// Wilcoxon signed-rank p-value by enumeration. Zero differences dropped.
inline double signed_rank_p(std::span<const double> sample, double reference, Tail tail) {
    std::vector<double> d;
    for (double x : sample) {
        if (x != reference) d.push_back(x - reference);
    }
    std::vector<double> mags(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
    const auto ranks = naive_midranks(mags);
    double w = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > 0) w += ranks[i];
    }
    return tail_probability(signed_rank_null(ranks), w, tail);
}

// Rank sums of x over every choice of which pooled positions belong to x.
inline std::vector<double> rank_sum_null(const std::vector<double>& ranks, std::size_t nx) {
    const std::size_t n = ranks.size();
    std::vector<double> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != nx) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) s += ranks[i];
        }
        out.push_back(s);
    }
    return out;
}

// Mann-Whitney p-value by enumerating all C(n, nx) labelings.
inline double mann_whitney_p(std::span<const double> x, std::span<const double> y, Tail tail) {
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = naive_midranks(pooled);
    double rx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rx += ranks[i];
    return tail_probability(rank_sum_null(ranks, x.size()), rx, tail);
}

struct Line {
    double slope;
    double intercept;
    double r2;
};

// Textbook least squares through the normal equations in raw sums.
inline Line least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    return {slope, intercept, r * r};
}

}  // namespace oracle
