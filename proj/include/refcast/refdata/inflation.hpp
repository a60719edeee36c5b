#pragma once

#include <cmath>
#include <span>
#include <string>

#include "refcast/error.hpp"
#include "refcast/refdata/macro.hpp"

namespace refcast::refdata {

struct Payment {
    int year = 0;
    double nominal = 0.0;
};

/// Converts a nominal payment stream to constant base-year currency:
/// sum of amount_t * deflator(base_year) / deflator(t).
inline double normalize_to_constant(std::span<const Payment> payments, const YearSeries& deflator, int base_year) {
    const auto base = value_at(deflator, base_year);
    if (!base) throw InputError("deflator missing for base year " + std::to_string(base_year));
    if (*base <= 0.0) throw InputError("deflator must be > 0 (base year " + std::to_string(base_year) + ")");
    double total = 0.0;
    for (const auto& p : payments) {
        const auto d = value_at(deflator, p.year);
        if (!d) throw InputError("deflator missing for year " + std::to_string(p.year));
        if (*d <= 0.0) throw InputError("deflator must be > 0 (year " + std::to_string(p.year) + ")");
        total += p.nominal * (*base / *d);
    }
    return total;
}

/// Long-term inflation rate in percent per year: OLS slope of
/// ln(deflator) on calendar year, reported as (e^slope - 1) * 100.
/// Years are centred before fitting, so the result does not depend on the
/// calendar origin or on the deflator's units.
inline double long_term_inflation(const YearSeries& deflator) {
    if (deflator.size() < 2) throw InputError("long-term inflation needs at least two deflator years");
    double mean_year = 0.0;
    double mean_log = 0.0;
    for (const auto& [year, value] : deflator) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw InputError("deflator must be > 0 (year " + std::to_string(year) + ")");
        }
        mean_year += static_cast<double>(year);
        mean_log += std::log(value);
    }
    const auto n = static_cast<double>(deflator.size());
    mean_year /= n;
    mean_log /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [year, value] : deflator) {
        const double dx = static_cast<double>(year) - mean_year;
        sxx += dx * dx;
        sxy += dx * (std::log(value) - mean_log);
    }
    const double slope = sxy / sxx;
    return std::expm1(slope) * 100.0;
}

}  // namespace refcast::refdata
