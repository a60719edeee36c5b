#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/stats/distribution.hpp"

namespace refcast::rcf {

inline void check_risk(double acceptable_risk) {
    if (!(acceptable_risk > 0.0 && acceptable_risk < 1.0)) {
        throw DomainError("acceptable risk must lie strictly between 0 and 1");
    }
}

/// Uplift needed so that the de-biased estimate is exceeded with probability
/// at most `acceptable_risk`: Q(1 - risk) - 1. Negative values are
/// downlifts and are returned as such.
inline double required_uplift(const stats::EmpiricalDistribution& dist, double acceptable_risk) {
    check_risk(acceptable_risk);
    return stats::quantile(dist, 1.0 - acceptable_risk) - 1.0;
}

inline double debias(double estimate, double uplift) {
    if (!(estimate > 0.0)) throw DomainError("estimate must be > 0");
    if (!(uplift > -1.0)) throw DomainError("uplift must be > -1");
    return estimate * (1.0 + uplift);
}

struct UpliftPoint {
    double acceptable_risk = 0.0;
    double uplift = 0.0;
};

/// Risk -> uplift mapping of one overrun distribution. Nonincreasing in
/// risk.
class UpliftCurve {
public:
    explicit UpliftCurve(stats::EmpiricalDistribution source) : source_(std::move(source)) {}

    const stats::EmpiricalDistribution& source() const { return source_; }

    double evaluate(double acceptable_risk) const { return required_uplift(source_, acceptable_risk); }

    // Evenly spaced risks step, 2*step, ... strictly below 1.
    std::vector<UpliftPoint> tabulate(double step = 0.01) const {
        if (!(step > 0.0 && step < 1.0)) throw DomainError("risk step must lie in (0,1)");
        std::vector<UpliftPoint> out;
        const auto count = static_cast<std::size_t>(std::floor((1.0 - 1e-12) / step));
        for (std::size_t k = 1; k <= count; ++k) {
            const double p = step * static_cast<double>(k);
            if (p >= 1.0) break;
            out.push_back({p, evaluate(p)});
        }
        return out;
    }

private:
    stats::EmpiricalDistribution source_;
};

inline void write_uplift_csv(std::ostream& os, const std::vector<UpliftPoint>& points) {
    const auto old = os.precision(10);
    os << "acceptable_risk,uplift_pct\n";
    for (const auto& p : points) os << p.acceptable_risk << ',' << p.uplift * 100.0 << '\n';
    os.precision(old);
}

}  // namespace refcast::rcf
