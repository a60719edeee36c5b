#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "refcast/error.hpp"

namespace refcast::stats {

enum class Alternative { two_sided, greater, less };

enum class RankMethod {
    automatic,  // exact when the (nonzero) total sample size is <= kExactRankThreshold
    exact,
    normal,
};

// Total sample size at or below which rank tests enumerate the null
// distribution exactly.
inline constexpr std::size_t kExactRankThreshold = 12;

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::string method;
    Alternative alternative = Alternative::two_sided;
};

inline std::string to_string(Alternative a) {
    switch (a) {
        case Alternative::two_sided: return "two_sided";
        case Alternative::greater: return "greater";
        case Alternative::less: return "less";
    }
    return "?";
}

inline Alternative parse_alternative(const std::string& s) {
    if (s == "two_sided" || s == "two-sided") return Alternative::two_sided;
    if (s == "greater") return Alternative::greater;
    if (s == "less") return Alternative::less;
    throw InputError("unknown alternative '" + s + "'");
}

namespace detail {

// Values closer than this (relative to their magnitude) are treated as tied,
// so 1.1 - 1.0 and 1.0 - 0.9 share a rank.
inline constexpr double kTieTolerance = 1e-12;

struct Ranking {
    std::vector<double> ranks;          // midranks, aligned with input order
    std::vector<std::size_t> tie_sizes; // sizes of tie groups with more than one member
};

inline Ranking midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    Ranking r;
    r.ranks.assign(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n) {
            const double a = values[order[j - 1]];
            const double b = values[order[j]];
            const double scale = std::max({1.0, std::abs(a), std::abs(b)});
            if (b - a > kTieTolerance * scale) break;
            ++j;
        }
        // positions i..j-1 (0-based) hold ranks i+1..j
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) r.ranks[order[k]] = mid;
        if (j - i > 1) r.tie_sizes.push_back(j - i);
        i = j;
    }
    return r;
}

inline double tie_sum(const std::vector<std::size_t>& tie_sizes) {
    double s = 0.0;
    for (std::size_t t : tie_sizes) {
        const auto td = static_cast<double>(t);
        s += td * td * td - td;
    }
    return s;
}

// Midranks are multiples of 1/2; doubling them gives exact integers.
inline std::int64_t doubled(double rank) { return std::llround(2.0 * rank); }

inline double tail_p(const std::vector<double>& counts, std::int64_t observed, Alternative alt) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double le = 0.0;
    double ge = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        const auto si = static_cast<std::int64_t>(s);
        if (si <= observed) le += counts[s];
        if (si >= observed) ge += counts[s];
    }
    le /= total;
    ge /= total;
    switch (alt) {
        case Alternative::greater: return std::min(1.0, ge);
        case Alternative::less: return std::min(1.0, le);
        case Alternative::two_sided: return std::min(1.0, 2.0 * std::min(le, ge));
    }
    return 1.0;
}

inline double normal_p(double statistic, double mean, double variance, Alternative alt) {
    if (variance <= 0.0) return 1.0;
    const boost::math::normal_distribution<double> z;
    const double sd = std::sqrt(variance);
    const double upper = std::max(-40.0, std::min(40.0, (statistic - mean - 0.5) / sd));
    const double lower = std::max(-40.0, std::min(40.0, (statistic - mean + 0.5) / sd));
    const double p_greater = boost::math::cdf(boost::math::complement(z, upper));
    const double p_less = boost::math::cdf(z, lower);
    switch (alt) {
        case Alternative::greater: return std::min(1.0, p_greater);
        case Alternative::less: return std::min(1.0, p_less);
        case Alternative::two_sided: return std::min(1.0, 2.0 * std::min(p_greater, p_less));
    }
    return 1.0;
}

}  // namespace detail

/// Wilcoxon signed-rank test of `sample` against a fixed reference value.
///
/// The statistic is W+, the sum of midranks of |x - reference| over the
/// positive differences. Zero differences are dropped. With at most
/// kExactRankThreshold nonzero differences the null distribution (every sign
/// assignment equally likely) is counted exactly; otherwise a normal
/// approximation with tie-corrected variance and continuity correction is
/// used.
inline TestResult signed_rank_vs_reference(std::span<const double> sample, double reference,
                                           Alternative alternative,
                                           RankMethod method = RankMethod::automatic) {
    std::vector<double> diffs;
    diffs.reserve(sample.size());
    const double zero_tol = detail::kTieTolerance * std::max(1.0, std::abs(reference));
    for (double x : sample) {
        if (!std::isfinite(x)) throw DomainError("signed-rank sample contains a non-finite value");
        const double d = x - reference;
        if (std::abs(d) > zero_tol) diffs.push_back(d);
    }
    if (diffs.empty()) throw DomainError("degenerate sample: all differences are zero");

    std::vector<double> abs_diffs(diffs.size());
    std::transform(diffs.begin(), diffs.end(), abs_diffs.begin(), [](double d) { return std::abs(d); });
    const auto ranking = detail::midranks(abs_diffs);

    std::int64_t w_doubled = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0.0) w_doubled += detail::doubled(ranking.ranks[i]);
    }
    const double w = 0.5 * static_cast<double>(w_doubled);
    const std::size_t n = diffs.size();

    const bool exact = method == RankMethod::exact ||
                       (method == RankMethod::automatic && n <= kExactRankThreshold);
    TestResult out;
    out.statistic = w;
    out.alternative = alternative;
    if (exact) {
        // Subset-sum counts over doubled ranks: counts[s] = #sign patterns with 2W+ = s.
        std::int64_t total = 0;
        for (double r : ranking.ranks) total += detail::doubled(r);
        std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
        counts[0] = 1.0;
        std::int64_t reach = 0;
        for (double r : ranking.ranks) {
            const std::int64_t step = detail::doubled(r);
            for (std::int64_t s = reach; s >= 0; --s) {
                counts[static_cast<std::size_t>(s + step)] += counts[static_cast<std::size_t>(s)];
            }
            reach += step;
        }
        out.p_value = detail::tail_p(counts, w_doubled, alternative);
        out.method = "Wilcoxon signed-rank (exact)";
    } else {
        const auto nd = static_cast<double>(n);
        const double mean = nd * (nd + 1.0) / 4.0;
        const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - detail::tie_sum(ranking.tie_sizes) / 48.0;
        out.p_value = detail::normal_p(w, mean, var, alternative);
        out.method = "Wilcoxon signed-rank (normal approximation, tie and continuity corrected)";
    }
    return out;
}

/// Mann-Whitney U test. The statistic is U for `x`:
/// R_x - n_x(n_x+1)/2 with midranks over the pooled sample. `greater` means
/// x tends to be larger than y.
inline TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                 Alternative alternative,
                                 RankMethod method = RankMethod::automatic) {
    if (x.empty() || y.empty()) throw DomainError("Mann-Whitney needs two nonempty samples");
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    for (double v : pooled) {
        if (!std::isfinite(v)) throw DomainError("Mann-Whitney sample contains a non-finite value");
    }
    const auto ranking = detail::midranks(pooled);
    const std::size_t nx = x.size();
    const std::size_t ny = y.size();
    const std::size_t n = nx + ny;

    std::int64_t rx_doubled = 0;
    for (std::size_t i = 0; i < nx; ++i) rx_doubled += detail::doubled(ranking.ranks[i]);
    const auto offset_doubled = static_cast<std::int64_t>(nx * (nx + 1));
    const std::int64_t u_doubled = rx_doubled - offset_doubled;

    const bool exact = method == RankMethod::exact ||
                       (method == RankMethod::automatic && n <= kExactRankThreshold);
    TestResult out;
    out.statistic = 0.5 * static_cast<double>(u_doubled);
    out.alternative = alternative;
    if (exact) {
        // counts[k][s]: number of k-subsets of the pooled ranks whose doubled sum is s.
        std::int64_t total = 0;
        for (double r : ranking.ranks) total += detail::doubled(r);
        const auto width = static_cast<std::size_t>(total) + 1;
        std::vector<std::vector<double>> counts(nx + 1, std::vector<double>(width, 0.0));
        counts[0][0] = 1.0;
        std::size_t used = 0;
        for (double r : ranking.ranks) {
            const auto step = static_cast<std::size_t>(detail::doubled(r));
            ++used;
            for (std::size_t k = std::min(nx, used); k >= 1; --k) {
                const auto& prev = counts[k - 1];
                auto& cur = counts[k];
                for (std::size_t s = width - 1; s >= step; --s) {
                    cur[s] += prev[s - step];
                    if (s == step) break;
                }
            }
        }
        out.p_value = detail::tail_p(counts[nx], rx_doubled, alternative);
        out.method = "Mann-Whitney U (exact)";
    } else {
        const auto fx = static_cast<double>(nx);
        const auto fy = static_cast<double>(ny);
        const auto fn = static_cast<double>(n);
        const double mean = fx * fy / 2.0;
        const double var = fx * fy / 12.0 * ((fn + 1.0) - detail::tie_sum(ranking.tie_sizes) / (fn * (fn - 1.0)));
        out.p_value = detail::normal_p(out.statistic, mean, var, alternative);
        out.method = "Mann-Whitney U (normal approximation, tie and continuity corrected)";
    }
    return out;
}

}  // namespace refcast::stats
