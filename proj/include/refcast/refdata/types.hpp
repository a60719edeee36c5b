#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/refdata/countries.hpp"
#include "refcast/stats/distribution.hpp"

namespace refcast::refdata {

// Dams with a wall at least this high count as "large".
inline constexpr double kLargeDamHeightM = 15.0;
// Allowed gap between reported actual months and 12 * (completion - decision).
inline constexpr double kScheduleToleranceMonths = 24.0;

enum class ProjectType { hydropower, irrigation, flood_control, water_supply, multipurpose };

constexpr std::string_view to_string(ProjectType t) {
    switch (t) {
        case ProjectType::hydropower: return "hydropower";
        case ProjectType::irrigation: return "irrigation";
        case ProjectType::flood_control: return "flood_control";
        case ProjectType::water_supply: return "water_supply";
        case ProjectType::multipurpose: return "multipurpose";
    }
    return "?";
}

inline std::optional<ProjectType> parse_project_type(std::string_view s) {
    for (auto t : {ProjectType::hydropower, ProjectType::irrigation, ProjectType::flood_control,
                   ProjectType::water_supply, ProjectType::multipurpose}) {
        if (s == to_string(t)) return t;
    }
    return std::nullopt;
}

/// One completed (or proposed) project. Costs are in constant base-year
/// local currency; schedules in months from the decision to build to full
/// commercial operation. Absent values are std::nullopt, never sentinels.
/// Actual cost, actual schedule and completion year are optional so that
/// proposed projects can be represented.
struct DamRecord {
    std::string id;
    std::string name;
    std::string country;
    Region region = Region::north_america;
    ProjectType project_type = ProjectType::hydropower;
    bool is_hydropower = true;
    bool is_new_station = true;
    double wall_height_m = 0.0;
    std::optional<double> wall_length_m;
    std::optional<double> installed_capacity_mw;
    std::optional<double> unit_capacity_mw;
    std::optional<double> reservoir_area_ha;
    std::optional<double> tunnel_length_km;
    double estimated_cost = 0.0;
    std::optional<double> actual_cost;
    std::string currency;
    int base_year = 0;
    int year_decision = 0;
    std::optional<int> year_completion;
    double estimated_schedule_months = 0.0;
    std::optional<double> actual_schedule_months;
    std::optional<double> fx_cost_share_pct;
    std::optional<double> icb_share_pct;
    std::optional<bool> local_contractor;
    std::optional<double> inflation_contingency_pct;
    std::optional<double> estimated_bcr;

    bool is_large_dam() const { return wall_height_m >= kLargeDamHeightM; }

    friend bool operator==(const DamRecord&, const DamRecord&) = default;
};

struct OverrunObservation {
    std::string dam_id;
    double cost_overrun = 0.0;       // actual_cost / estimated_cost
    double schedule_slippage = 0.0;  // actual / estimated months

    friend bool operator==(const OverrunObservation&, const OverrunObservation&) = default;
};

inline double overrun_ratio(std::optional<double> estimated, std::optional<double> actual, std::string_view what) {
    if (!estimated || !actual) throw InputError(std::string(what) + ": undefined ratio (value absent)");
    if (!(*estimated > 0.0) || !std::isfinite(*estimated)) {
        throw InputError(std::string(what) + ": undefined ratio (estimate must be > 0)");
    }
    if (!(*actual > 0.0) || !std::isfinite(*actual)) {
        throw InputError(std::string(what) + ": undefined ratio (actual must be > 0)");
    }
    return *actual / *estimated;
}

inline OverrunObservation derive_observation(const DamRecord& r) {
    return OverrunObservation{
        r.id,
        overrun_ratio(r.estimated_cost, r.actual_cost, "cost overrun"),
        overrun_ratio(r.estimated_schedule_months, r.actual_schedule_months, "schedule slippage"),
    };
}

inline bool has_outcomes(const DamRecord& r) {
    return r.actual_cost && *r.actual_cost > 0.0 && r.actual_schedule_months && *r.actual_schedule_months > 0.0 &&
           r.estimated_cost > 0.0 && r.estimated_schedule_months > 0.0;
}

/// A reference class: the comparable completed projects a forecast is
/// anchored on. Immutable once built; observations are derived from every
/// record carrying both actual cost and actual schedule.
class ReferenceClass {
public:
    ReferenceClass(std::vector<DamRecord> records, std::string filter_description)
        : records_(std::move(records)), filter_description_(std::move(filter_description)) {
        if (records_.empty()) throw InputError("empty reference class");
        for (const auto& r : records_) {
            if (has_outcomes(r)) observations_.push_back(derive_observation(r));
        }
    }

    const std::vector<DamRecord>& records() const { return records_; }
    const std::vector<OverrunObservation>& observations() const { return observations_; }
    const std::string& filter_description() const { return filter_description_; }

    const DamRecord* find(std::string_view id) const {
        for (const auto& r : records_) {
            if (r.id == id) return &r;
        }
        return nullptr;
    }

    stats::EmpiricalDistribution cost_overruns() const {
        std::vector<double> v;
        v.reserve(observations_.size());
        for (const auto& o : observations_) v.push_back(o.cost_overrun);
        if (v.empty()) throw InputError("reference class has no completed projects");
        return stats::EmpiricalDistribution(std::move(v));
    }

    stats::EmpiricalDistribution schedule_slippages() const {
        std::vector<double> v;
        v.reserve(observations_.size());
        for (const auto& o : observations_) v.push_back(o.schedule_slippage);
        if (v.empty()) throw InputError("reference class has no completed projects");
        return stats::EmpiricalDistribution(std::move(v));
    }

    ReferenceClass filter(const std::function<bool(const DamRecord&)>& keep, std::string_view description) const {
        std::vector<DamRecord> kept;
        for (const auto& r : records_) {
            if (keep(r)) kept.push_back(r);
        }
        std::string desc = filter_description_.empty() ? std::string(description)
                                                       : filter_description_ + " & " + std::string(description);
        return ReferenceClass(std::move(kept), std::move(desc));
    }

private:
    std::vector<DamRecord> records_;
    std::string filter_description_;
    std::vector<OverrunObservation> observations_;
};

}  // namespace refcast::refdata
