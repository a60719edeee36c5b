#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "refcast/error.hpp"
#include "refcast/lmm/spec.hpp"
#include "refcast/refdata/inflation.hpp"
#include "refcast/refdata/macro.hpp"
#include "refcast/refdata/types.hpp"

namespace refcast::lmm {

using refdata::DamRecord;
using refdata::MacroMap;
using refdata::ReferenceClass;

/// Variables a ModelSpec may reference. Project-level values come from the
/// DamRecord; country-level values from the country's macro series at the
/// record's decision year (long-term inflation uses the whole deflator
/// series; period averages run from decision to completion).
inline constexpr auto kKnownVariables = std::to_array<std::string_view>({
    "cost_overrun",
    "schedule_slippage",
    "estimated_cost",
    "actual_cost",
    "estimated_schedule_months",
    "actual_schedule_months",
    "wall_height_m",
    "wall_length_m",
    "installed_capacity_mw",
    "unit_capacity_mw",
    "reservoir_area_ha",
    "tunnel_length_km",
    "year_decision",
    "year_completion",
    "fx_cost_share_pct",
    "icb_share_pct",
    "inflation_contingency_pct",
    "estimated_bcr",
    "is_hydropower",
    "is_new_station",
    "local_contractor",
    "large_dam",
    "south_asia",
    "north_america",
    "long_term_inflation_pct",
    "per_capita_income_2000usd",
    "gdp_nominal_usd",
    "polity2",
    "democracy",
    "deflator_growth_pct",
    "muv_growth_pct",
    "fx_depreciation_pct",
    "constant",
});

inline bool is_known_variable(std::string_view name) {
    for (auto v : kKnownVariables) {
        if (v == name) return true;
    }
    return false;
}

struct Resolved {
    std::optional<double> value;
    std::string reason;  // why the value is absent
};

namespace detail {

inline Resolved present(double v) { return {v, {}}; }
inline Resolved absent(std::string_view variable) { return {std::nullopt, std::string(variable) + " absent"}; }
inline Resolved from(const std::optional<double>& v, std::string_view variable) {
    return v ? present(*v) : absent(variable);
}
inline Resolved from_flag(const std::optional<bool>& v, std::string_view variable) {
    return v ? present(*v ? 1.0 : 0.0) : absent(variable);
}

// Compound annual growth in percent between two years of a series.
inline Resolved period_growth(const refdata::YearSeries& s, int from_year, std::optional<int> to_year,
                              std::string_view variable) {
    if (!to_year) return {std::nullopt, std::string(variable) + ": year_completion absent"};
    const auto a = refdata::value_at(s, from_year);
    const auto b = refdata::value_at(s, *to_year);
    if (!a || !b) return {std::nullopt, std::string(variable) + ": macro series lacks decision or completion year"};
    const int years = *to_year - from_year;
    if (years <= 0) return {std::nullopt, std::string(variable) + ": zero-length implementation period"};
    return present((std::pow(*b / *a, 1.0 / static_cast<double>(years)) - 1.0) * 100.0);
}

}  // namespace detail

/// Resolves model variables for a record. Long-term inflation is computed
/// once per country at construction.
class VariableResolver {
public:
    explicit VariableResolver(const MacroMap& macro) : macro_(macro) {
        for (const auto& [country, m] : macro_) {
            Resolved res;
            try {
                res = detail::present(refdata::long_term_inflation(m.deflator));
            } catch (const InputError& e) {
                res = {std::nullopt, std::string("long_term_inflation_pct: ") + e.what()};
            }
            inflation_.emplace(country, std::move(res));
        }
    }

    Resolved resolve(const DamRecord& r, std::string_view name) const {
        using detail::absent;
        using detail::from;
        using detail::present;
        if (name == "constant") return present(1.0);
        if (name == "cost_overrun") {
            if (!r.actual_cost) return absent("actual_cost");
            return present(*r.actual_cost / r.estimated_cost);
        }
        if (name == "schedule_slippage") {
            if (!r.actual_schedule_months) return absent("actual_schedule_months");
            return present(*r.actual_schedule_months / r.estimated_schedule_months);
        }
        if (name == "estimated_cost") return present(r.estimated_cost);
        if (name == "actual_cost") return from(r.actual_cost, name);
        if (name == "estimated_schedule_months") return present(r.estimated_schedule_months);
        if (name == "actual_schedule_months") return from(r.actual_schedule_months, name);
        if (name == "wall_height_m") return present(r.wall_height_m);
        if (name == "wall_length_m") return from(r.wall_length_m, name);
        if (name == "installed_capacity_mw") return from(r.installed_capacity_mw, name);
        if (name == "unit_capacity_mw") return from(r.unit_capacity_mw, name);
        if (name == "reservoir_area_ha") return from(r.reservoir_area_ha, name);
        if (name == "tunnel_length_km") return from(r.tunnel_length_km, name);
        if (name == "year_decision") return present(r.year_decision);
        if (name == "year_completion") {
            return r.year_completion ? present(*r.year_completion) : absent(name);
        }
        if (name == "fx_cost_share_pct") return from(r.fx_cost_share_pct, name);
        if (name == "icb_share_pct") return from(r.icb_share_pct, name);
        if (name == "inflation_contingency_pct") return from(r.inflation_contingency_pct, name);
        if (name == "estimated_bcr") return from(r.estimated_bcr, name);
        if (name == "is_hydropower") return present(r.is_hydropower ? 1.0 : 0.0);
        if (name == "is_new_station") return present(r.is_new_station ? 1.0 : 0.0);
        if (name == "local_contractor") return detail::from_flag(r.local_contractor, name);
        if (name == "large_dam") return present(r.is_large_dam() ? 1.0 : 0.0);
        if (name == "south_asia") return present(r.region == refdata::Region::south_asia ? 1.0 : 0.0);
        if (name == "north_america") return present(r.region == refdata::Region::north_america ? 1.0 : 0.0);

        const auto it = macro_.find(r.country);
        if (is_known_variable(name) && it == macro_.end()) {
            return {std::nullopt, std::string(name) + ": no macro series for " + r.country};
        }
        if (it != macro_.end()) {
            const auto& m = it->second;
            if (name == "long_term_inflation_pct") return inflation_.at(r.country);
            if (name == "per_capita_income_2000usd") {
                return from(refdata::value_at(m.per_capita_income_const2000usd, r.year_decision), name);
            }
            if (name == "gdp_nominal_usd") return from(refdata::value_at(m.gdp_nominal_usd, r.year_decision), name);
            if (name == "polity2" || name == "democracy") {
                const auto p = m.polity2.find(r.year_decision);
                if (p == m.polity2.end()) return absent(name);
                if (name == "polity2") return present(p->second);
                return present(p->second >= refdata::kDemocracyPolityThreshold ? 1.0 : 0.0);
            }
            if (name == "deflator_growth_pct") {
                return detail::period_growth(m.deflator, r.year_decision, r.year_completion, name);
            }
            if (name == "muv_growth_pct") {
                return detail::period_growth(m.muv_index, r.year_decision, r.year_completion, name);
            }
            if (name == "fx_depreciation_pct") {
                return detail::period_growth(m.fx_rate_lcu_per_usd, r.year_decision, r.year_completion, name);
            }
        }
        throw ModelError("unknown variable '" + std::string(name) + "'");
    }

    std::string group_of(const DamRecord& r, std::string_view grouping) const {
        if (grouping == "country") return r.country;
        if (grouping == "region") return std::string(refdata::to_string(r.region));
        if (grouping == "project_type") return std::string(refdata::to_string(r.project_type));
        throw ModelError("unsupported grouping variable '" + std::string(grouping) + "'");
    }

private:
    const MacroMap& macro_;
    std::map<std::string, Resolved> inflation_;
};

struct DroppedRow {
    std::size_t row = 0;  // index into the reference class records
    std::string id;
    std::string reason;
};

/// Response vector, design matrix and grouping labels after listwise
/// deletion.
struct Design {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> groups;
    std::vector<std::string> column_names;
    std::vector<std::string> row_ids;
    std::vector<DroppedRow> dropped;
    std::size_t n_input = 0;
};

/// Builds the transformed design for `spec`. Rows where any variable is
/// absent or falls outside its transformation's domain are dropped and
/// reported with the reason.
inline Design build_design(const ReferenceClass& rc, const MacroMap& macro, const ModelSpec& spec) {
    spec.validate();
    for (const auto* t : {&spec.response}) {
        if (!is_known_variable(t->variable)) throw ModelError("unknown variable '" + t->variable + "'");
    }
    for (const auto& t : spec.terms) {
        if (!is_known_variable(t.variable)) throw ModelError("unknown variable '" + t.variable + "'");
    }
    const VariableResolver resolver(macro);
    const auto& records = rc.records();
    const std::size_t p = spec.column_count();

    std::vector<double> y;
    std::vector<std::vector<double>> rows;
    Design d;
    d.n_input = records.size();
    d.column_names = spec.column_names();

    auto transformed = [&](const DamRecord& r, const Term& t, std::string& reason) -> std::optional<double> {
        const auto v = resolver.resolve(r, t.variable);
        if (!v.value) {
            reason = v.reason;
            return std::nullopt;
        }
        if (!t.transform.in_domain(*v.value)) {
            reason = t.label() + " undefined for " + t.variable + " = " + std::to_string(*v.value);
            return std::nullopt;
        }
        return t.transform.forward(*v.value);
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::string reason;
        const auto resp = transformed(r, spec.response, reason);
        if (!resp) {
            d.dropped.push_back({i, r.id, reason});
            continue;
        }
        std::vector<double> row;
        row.reserve(p);
        if (spec.intercept) row.push_back(1.0);
        bool ok = true;
        std::vector<double> term_values;
        for (const auto& t : spec.terms) {
            const auto v = transformed(r, t, reason);
            if (!v) {
                ok = false;
                break;
            }
            term_values.push_back(*v);
            row.push_back(*v);
        }
        if (!ok) {
            d.dropped.push_back({i, r.id, reason});
            continue;
        }
        for (const auto& in : spec.interactions) {
            row.push_back(term_values[spec.find_term(in.left)] * term_values[spec.find_term(in.right)]);
        }
        y.push_back(*resp);
        rows.push_back(std::move(row));
        d.groups.push_back(resolver.group_of(r, spec.grouping));
        d.row_ids.push_back(r.id);
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    d.y = Eigen::Map<Eigen::VectorXd>(y.data(), n);
    d.X.resize(n, static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
            d.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return d;
}

}  // namespace refcast::lmm
