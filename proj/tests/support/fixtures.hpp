#pragma once

// Small hand-built inputs shared by the unit and CLI tests.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "refcast/refdata/ingest.hpp"

namespace fixture {

// A valid refclass.csv row; `overrides` replaces cells by column name.
inline std::string csv_row(const std::map<std::string, std::string>& overrides = {}) {
    std::map<std::string, std::string> cells{
        {"id", "D1"},
        {"name", "Test dam"},
        {"country", "COL"},
        {"region", ""},
        {"project_type", "hydropower"},
        {"is_hydropower", "true"},
        {"is_new_station", "true"},
        {"wall_height_m", "50"},
        {"wall_length_m", "300"},
        {"installed_capacity_mw", "100"},
        {"unit_capacity_mw", "25"},
        {"reservoir_area_ha", "1000"},
        {"tunnel_length_km", ""},
        {"estimated_cost", "100"},
        {"actual_cost", "120"},
        {"currency", "COP"},
        {"base_year", "1970"},
        {"year_decision", "1970"},
        {"year_completion", "1977"},
        {"estimated_schedule_months", "72"},
        {"actual_schedule_months", "84"},
        {"fx_cost_share_pct", "40"},
        {"icb_share_pct", "50"},
        {"local_contractor", "false"},
        {"inflation_contingency_pct", "5"},
        {"estimated_bcr", "1.4"},
    };
    for (const auto& [k, v] : overrides) cells.at(k) = v;
    std::string out;
    for (std::size_t i = 0; i < refcast::refdata::kReferenceCsvHeader.size(); ++i) {
        if (i) out += ',';
        out += cells.at(std::string(refcast::refdata::kReferenceCsvHeader[i]));
    }
    return out + "\n";
}

inline std::string csv_header() {
    std::string out;
    for (std::size_t i = 0; i < refcast::refdata::kReferenceCsvHeader.size(); ++i) {
        if (i) out += ',';
        out += refcast::refdata::kReferenceCsvHeader[i];
    }
    return out + "\n";
}

// A reference class whose cost overruns are exactly `factors` (estimated
// cost 100, actual 100 * factor).
inline std::string csv_with_overruns(const std::vector<double>& factors) {
    std::string out = csv_header();
    for (std::size_t i = 0; i < factors.size(); ++i) {
        std::ostringstream actual;
        actual.precision(17);
        actual << 100.0 * factors[i];
        out += csv_row({{"id", "R" + std::to_string(i + 1)}, {"actual_cost", actual.str()}});
    }
    return out;
}

}  // namespace fixture
