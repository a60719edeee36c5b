#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refcast/error.hpp"

namespace refcast::stats {

// Reference classes smaller than this get a small-sample warning whenever a
// quantile is read from them.
inline constexpr std::size_t kSmallSampleThreshold = 20;

namespace detail {

// Linear order-statistic interpolation, h = (n-1)q + 1 (1-based), on an
// already sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0,1]");
    const std::size_t n = sorted.size();
    if (q == 0.0 || n == 1) return sorted.front();
    if (q == 1.0) return sorted.back();
    const double h = static_cast<double>(n - 1) * q;  // 0-based position
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

/// Sorted sample of overrun factors (actual / estimated). Values must be
/// finite and strictly positive.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> sample) : sample_(std::move(sample)) {
        if (sample_.empty()) throw DomainError("empirical distribution needs at least one value");
        for (double x : sample_) {
            if (!std::isfinite(x) || x <= 0.0) {
                throw DomainError("overrun factors must be finite and > 0");
            }
        }
        std::sort(sample_.begin(), sample_.end());
    }

    std::span<const double> sample() const { return sample_; }
    std::size_t size() const { return sample_.size(); }
    double min() const { return sample_.front(); }
    double max() const { return sample_.back(); }

    friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

private:
    std::vector<double> sample_;
};

inline double quantile(const EmpiricalDistribution& dist, double q) {
    return detail::sorted_quantile(dist.sample(), q);
}

inline std::optional<std::string> small_sample_warning(const EmpiricalDistribution& dist) {
    if (dist.size() >= kSmallSampleThreshold) return std::nullopt;
    return "small reference class: " + std::to_string(dist.size()) + " observations (< " +
           std::to_string(kSmallSampleThreshold) + "); quantiles are unreliable";
}

/// |{x > threshold}| / n.
inline double fraction_above(const EmpiricalDistribution& dist, double threshold) {
    const auto s = dist.sample();
    const auto it = std::upper_bound(s.begin(), s.end(), threshold);
    return static_cast<double>(s.end() - it) / static_cast<double>(s.size());
}

// Complement of fraction_above, so the two always sum to exactly one.
inline double fraction_at_or_below(const EmpiricalDistribution& dist, double threshold) {
    return 1.0 - fraction_above(dist, threshold);
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline Summary summarize(const EmpiricalDistribution& dist) {
    Summary s;
    s.n = dist.size();
    s.mean = detail::mean(dist.sample());
    s.median = quantile(dist, 0.5);
    s.q25 = quantile(dist, 0.25);
    s.q75 = quantile(dist, 0.75);
    s.iqr = s.q75 - s.q25;
    s.min = dist.min();
    s.max = dist.max();
    return s;
}

}  // namespace refcast::stats
