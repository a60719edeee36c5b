#pragma once

#include <cmath>
#include <string>

#include "refcast/error.hpp"

namespace refcast::rcf {

// Typical inside-view benefit-cost ratio of large dams.
inline constexpr double kTypicalForecastBcr = 1.4;
// Mean benefit shortfall observed on the hydropower subset.
inline constexpr double kMeanBenefitShortfall = 0.11;

struct ViabilityVerdict {
    double debiased_bcr = 0.0;
    bool stranded = false;
    std::string assumptions;
};

/// De-biased benefit-cost ratio: bcr * (1 - shortfall) / overrun. The
/// project is stranded when that falls below one.
inline ViabilityVerdict viability(double forecast_bcr, double cost_overrun_factor, double benefit_shortfall = 0.0) {
    if (!(forecast_bcr > 0.0)) throw DomainError("forecast BCR must be > 0");
    if (!(cost_overrun_factor > 0.0)) throw DomainError("cost overrun factor must be > 0");
    if (!(benefit_shortfall >= 0.0 && benefit_shortfall < 1.0)) {
        throw DomainError("benefit shortfall must lie in [0,1)");
    }
    ViabilityVerdict v;
    v.debiased_bcr = forecast_bcr * (1.0 - benefit_shortfall) / cost_overrun_factor;
    v.stranded = v.debiased_bcr < 1.0;
    v.assumptions = "forecast BCR " + std::to_string(forecast_bcr) + " divided by cost overrun factor " +
                    std::to_string(cost_overrun_factor) + ", benefit shortfall " + std::to_string(benefit_shortfall) +
                    "; stranded when de-biased BCR < 1";
    return v;
}

inline constexpr const char* kLumpSumConvention =
    "lump-sum-at-completion: the whole cost is priced at the completion date (no spend profile); "
    "spend spread over the schedule sees less cumulative inflation";

struct NominalOverrun {
    double factor = 0.0;
    std::string convention;
};

/// Nominal overrun when planned and actual inflation/schedules differ:
/// real * (1+a)^(actual_months/12) / (1+p)^(planned_months/12).
/// Rates are in percent per year.
inline NominalOverrun nominal_overrun(double real_overrun, double planned_inflation_pct, double planned_months,
                                      double actual_inflation_pct, double actual_months) {
    if (!(planned_months > 0.0) || !(actual_months > 0.0)) throw DomainError("schedules must be > 0 months");
    if (!(planned_inflation_pct > -100.0) || !(actual_inflation_pct > -100.0)) {
        throw DomainError("inflation must exceed -100%");
    }
    if (!(real_overrun > 0.0)) throw DomainError("real overrun must be > 0");
    const double actual = std::pow(1.0 + actual_inflation_pct / 100.0, actual_months / 12.0);
    const double planned = std::pow(1.0 + planned_inflation_pct / 100.0, planned_months / 12.0);
    return {real_overrun * actual / planned, kLumpSumConvention};
}

/// Same, from cumulative price growth over each span (percent).
inline NominalOverrun nominal_overrun_cumulative(double real_overrun, double planned_cumulative_pct,
                                                 double actual_cumulative_pct) {
    if (!(planned_cumulative_pct > -100.0) || !(actual_cumulative_pct > -100.0)) {
        throw DomainError("cumulative inflation must exceed -100%");
    }
    if (!(real_overrun > 0.0)) throw DomainError("real overrun must be > 0");
    return {real_overrun * (1.0 + actual_cumulative_pct / 100.0) / (1.0 + planned_cumulative_pct / 100.0),
            kLumpSumConvention};
}

/// Share of a debt-stock increase accounted for by one project, percent.
inline double debt_impact(double dam_cost_nominal, double debt_before, double debt_after) {
    const double increase = debt_after - debt_before;
    if (!(increase > 0.0)) throw DomainError("debt increase must be positive");
    return 100.0 * dam_cost_nominal / increase;
}

}  // namespace refcast::rcf
