#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "refcast/error.hpp"
#include "refcast/synth/generate.hpp"

namespace refcast::synth {

/// Published cost-overrun summary: median, mean and IQR of the overrun
/// factor plus the fractions above 2x and 3x. Five targets for two lognormal
/// parameters, so an exact fit does not exist.
struct TailTargets {
    double median = 1.27;
    double mean = 1.96;
    double iqr = 0.86;
    double frac_above_2 = 0.20;
    double frac_above_3 = 0.10;
    // Relative-error weights, same order as the targets.
    std::vector<double> weights{1.0, 1.0, 1.0, 4.0, 4.0};
};

// Published fractions above 1x, 2x and 3x used by the tail report.
inline constexpr double kPublishedFractionAbove1 = 0.75;
inline constexpr double kPublishedFractionAbove2 = 0.20;
inline constexpr double kPublishedFractionAbove3 = 0.10;

struct LognormalFit {
    double mu = 0.0;
    double sigma = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double iqr = 0.0;
    double frac_above_2 = 0.0;
    double frac_above_3 = 0.0;
    double objective = 0.0;
};

inline double lognormal_fraction_above(double mu, double sigma, double t) {
    const boost::math::normal_distribution<double> z;
    return boost::math::cdf(boost::math::complement(z, (std::log(t) - mu) / sigma));
}

inline LognormalFit lognormal_summary(double mu, double sigma, const TailTargets& targets = {}) {
    constexpr double q75 = 0.67448975019608174;  // standard normal 75th percentile
    LognormalFit f;
    f.mu = mu;
    f.sigma = sigma;
    f.median = std::exp(mu);
    f.mean = std::exp(mu + 0.5 * sigma * sigma);
    f.iqr = std::exp(mu + q75 * sigma) - std::exp(mu - q75 * sigma);
    f.frac_above_2 = lognormal_fraction_above(mu, sigma, 2.0);
    f.frac_above_3 = lognormal_fraction_above(mu, sigma, 3.0);
    const double got[] = {f.median, f.mean, f.iqr, f.frac_above_2, f.frac_above_3};
    const double want[] = {targets.median, targets.mean, targets.iqr, targets.frac_above_2, targets.frac_above_3};
    for (std::size_t i = 0; i < 5; ++i) {
        const double rel = (got[i] - want[i]) / want[i];
        f.objective += targets.weights.at(i) * rel * rel;
    }
    return f;
}

/// Brute-force weighted least squares over a (mu, sigma) grid, refined
/// twice around the best cell.
inline LognormalFit calibrate_lognormal(const TailTargets& targets = {}) {
    if (targets.weights.size() != 5) throw DomainError("tail calibration needs five weights");
    double mu_lo = -1.0;
    double mu_hi = 1.5;
    double sd_lo = 0.05;
    double sd_hi = 2.0;
    LognormalFit best = lognormal_summary(0.0, 1.0, targets);
    for (int round = 0; round < 3; ++round) {
        constexpr int cells = 400;
        const double dmu = (mu_hi - mu_lo) / cells;
        const double dsd = (sd_hi - sd_lo) / cells;
        for (int i = 0; i <= cells; ++i) {
            for (int j = 0; j <= cells; ++j) {
                const auto f = lognormal_summary(mu_lo + i * dmu, sd_lo + j * dsd, targets);
                if (f.objective < best.objective) best = f;
            }
        }
        mu_lo = best.mu - 2 * dmu;
        mu_hi = best.mu + 2 * dmu;
        sd_lo = std::max(1e-3, best.sigma - 2 * dsd);
        sd_hi = best.sigma + 2 * dsd;
    }
    return best;
}

struct TailReport {
    double frac_above_1 = 0.0;
    double frac_above_2 = 0.0;
    double frac_above_3 = 0.0;
    double error_1 = 0.0;  // model minus published
    double error_2 = 0.0;
    double error_3 = 0.0;
    double rms_error = 0.0;
};

/// Exceedance fractions at 1x, 2x and 3x for a tail spec, compared with the
/// published fractions.
inline TailReport tail_report(const TailSpec& t) {
    auto above = [&](double x) {
        double ln = lognormal_fraction_above(t.mu, t.sigma, x);
        if (t.kind == TailSpec::Kind::pareto_mix) {
            const double pareto = x <= t.scale ? 1.0 : std::pow(t.scale / x, t.alpha);
            ln = t.weight * pareto + (1.0 - t.weight) * ln;
        }
        return ln;
    };
    TailReport r;
    r.frac_above_1 = above(1.0);
    r.frac_above_2 = above(2.0);
    r.frac_above_3 = above(3.0);
    r.error_1 = r.frac_above_1 - kPublishedFractionAbove1;
    r.error_2 = r.frac_above_2 - kPublishedFractionAbove2;
    r.error_3 = r.frac_above_3 - kPublishedFractionAbove3;
    r.rms_error = std::sqrt((r.error_1 * r.error_1 + r.error_2 * r.error_2 + r.error_3 * r.error_3) / 3.0);
    return r;
}

/// Pareto mixture on a fixed lognormal body, with (weight, alpha, scale)
/// chosen by grid search to match the three published exceedance fractions.
inline TailSpec calibrate_pareto_mix(double body_mu, double body_sigma) {
    TailSpec best;
    best.kind = TailSpec::Kind::pareto_mix;
    best.mu = body_mu;
    best.sigma = body_sigma;
    double best_err = tail_report(best).rms_error;
    for (int wi = 0; wi <= 50; ++wi) {
        for (int ai = 0; ai <= 40; ++ai) {
            for (int si = 0; si <= 40; ++si) {
                TailSpec t = best;
                t.weight = 0.01 * wi;
                t.alpha = 0.5 + 0.1 * ai;
                t.scale = 1.0 + 0.05 * si;
                const double err = tail_report(t).rms_error;
                if (err < best_err) {
                    best_err = err;
                    best = t;
                }
            }
        }
    }
    return best;
}

/// Draws `n` overrun factors from a tail spec on a single stream.
inline std::vector<double> sample_tail(const TailSpec& t, std::size_t n, std::uint64_t seed) {
    Stream s(seed, {5});
    std::vector<double> out(n);
    for (auto& x : out) x = t.draw(s);
    return out;
}

}  // namespace refcast::synth
