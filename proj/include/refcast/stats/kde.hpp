#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/stats/distribution.hpp"

namespace refcast::stats {

struct DensityPoint {
    double x = 0.0;
    double density = 0.0;
};

/// Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
/// Falls back to whichever spread measure is positive when the other is 0.
inline double silverman_bandwidth(std::span<const double> sample) {
    if (sample.size() < 2) throw DomainError("bandwidth needs at least two observations");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = detail::sample_sd(sorted);
    const double iqr = detail::sorted_quantile(sorted, 0.75) - detail::sorted_quantile(sorted, 0.25);
    const double robust = iqr / 1.34;
    double spread = std::min(sd, robust);
    if (spread <= 0.0) spread = std::max(sd, robust);
    if (!(spread > 0.0)) throw DomainError("density trace undefined: sample has zero spread");
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

inline double kde_evaluate(std::span<const double> sample, double bandwidth, double x) {
    const double norm = 1.0 / (static_cast<double>(sample.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    double sum = 0.0;
    for (double xi : sample) {
        const double u = (x - xi) / bandwidth;
        sum += std::exp(-0.5 * u * u);
    }
    return sum * norm;
}

/// Gaussian kernel density on `grid_points` evenly spaced points covering
/// [min - 3h, max + 3h]. Summation order is fixed, so output is
/// deterministic.
inline std::vector<DensityPoint> kde_density(std::span<const double> sample, std::size_t grid_points) {
    if (grid_points < 2) throw DomainError("density grid needs at least two points");
    const double h = silverman_bandwidth(sample);
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it - 3.0 * h;
    const double hi = *hi_it + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    std::vector<DensityPoint> out(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x = (i + 1 == grid_points) ? hi : lo + step * static_cast<double>(i);
        out[i] = {x, kde_evaluate(sample, h, x)};
    }
    return out;
}

inline void write_density_csv(std::ostream& os, std::span<const DensityPoint> points) {
    const auto old = os.precision(10);
    os << "x,density\n";
    for (const auto& p : points) os << p.x << ',' << p.density << '\n';
    os.precision(old);
}

}  // namespace refcast::stats
