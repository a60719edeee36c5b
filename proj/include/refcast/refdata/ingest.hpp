#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/refdata/countries.hpp"
#include "refcast/refdata/csv.hpp"
#include "refcast/refdata/types.hpp"

namespace refcast::refdata {

inline constexpr std::array<std::string_view, 26> kReferenceCsvHeader{
    "id",
    "name",
    "country",
    "region",
    "project_type",
    "is_hydropower",
    "is_new_station",
    "wall_height_m",
    "wall_length_m",
    "installed_capacity_mw",
    "unit_capacity_mw",
    "reservoir_area_ha",
    "tunnel_length_km",
    "estimated_cost",
    "actual_cost",
    "currency",
    "base_year",
    "year_decision",
    "year_completion",
    "estimated_schedule_months",
    "actual_schedule_months",
    "fx_cost_share_pct",
    "icb_share_pct",
    "local_contractor",
    "inflation_contingency_pct",
    "estimated_bcr",
};

enum class Severity { warning, error };

inline std::string_view to_string(Severity s) { return s == Severity::warning ? "warning" : "error"; }

struct Diagnostic {
    std::size_t row = 0;  // 1-based data row (header excluded); 0 = file level
    std::string dam_id;
    Severity severity = Severity::error;
    std::string message;
};

inline std::string format(const Diagnostic& d) {
    std::string out = "row " + std::to_string(d.row);
    if (!d.dam_id.empty()) out += " (" + d.dam_id + ")";
    out += ": " + std::string(to_string(d.severity)) + ": " + d.message;
    return out;
}

struct IngestResult {
    ReferenceClass reference;
    std::vector<Diagnostic> diagnostics;
};

class IngestFailure : public InputError {
public:
    IngestFailure(const std::string& what, std::vector<Diagnostic> diags)
        : InputError(what), diagnostics(std::move(diags)) {}
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

struct RowParser {
    const std::vector<std::string>& cells;

    std::string_view cell(std::size_t col) const { return csv::trim(cells[col]); }

    std::optional<double> number(std::size_t col) const {
        try {
            return csv::parse_double(cell(col));
        } catch (const InputError&) {
            throw InputError(std::string(kReferenceCsvHeader[col]) + ": not a number '" + std::string(cell(col)) + "'");
        }
    }
    std::optional<long long> integer(std::size_t col) const {
        try {
            return csv::parse_int(cell(col));
        } catch (const InputError&) {
            throw InputError(std::string(kReferenceCsvHeader[col]) + ": not an integer '" + std::string(cell(col)) + "'");
        }
    }
    std::optional<bool> boolean(std::size_t col) const {
        try {
            return csv::parse_bool(cell(col));
        } catch (const InputError&) {
            throw InputError(std::string(kReferenceCsvHeader[col]) + ": not a boolean '" + std::string(cell(col)) + "'");
        }
    }
    template <class T>
    static T required(const std::optional<T>& v, std::size_t col) {
        if (!v) throw InputError(std::string(kReferenceCsvHeader[col]) + " absent");
        return *v;
    }
};

inline void require_positive(const std::optional<double>& v, std::size_t col, bool allow_zero = false) {
    if (!v) return;
    if (allow_zero ? *v < 0.0 : *v <= 0.0) {
        throw InputError(std::string(kReferenceCsvHeader[col]) + (allow_zero ? " must be >= 0" : " must be > 0"));
    }
}

inline void require_percent(const std::optional<double>& v, std::size_t col) {
    if (v && (*v < 0.0 || *v > 100.0)) throw InputError(std::string(kReferenceCsvHeader[col]) + " must lie in [0,100]");
}

// Parses one data row; throws InputError with the rejection reason.
// Non-fatal findings are appended to `warnings`.
inline DamRecord parse_record(const std::vector<std::string>& cells, std::vector<std::string>& warnings) {
    const RowParser p{cells};
    DamRecord r;
    r.id = std::string(p.cell(0));
    if (r.id.empty()) throw InputError("id absent");
    r.name = std::string(p.cell(1));
    r.country = std::string(p.cell(2));
    const auto table_region = region_of(r.country);
    if (!table_region) throw InputError("unknown country code '" + r.country + "'");
    if (p.cell(3).empty()) {
        r.region = *table_region;
    } else {
        const auto region = parse_region(p.cell(3));
        if (!region) throw InputError("unknown region '" + std::string(p.cell(3)) + "'");
        if (*region != *table_region) {
            throw InputError("region '" + std::string(p.cell(3)) + "' inconsistent with country " + r.country +
                             " (expected " + std::string(to_string(*table_region)) + ")");
        }
        r.region = *region;
    }
    const auto type = parse_project_type(p.cell(4));
    if (!type) throw InputError("unknown project_type '" + std::string(p.cell(4)) + "'");
    r.project_type = *type;
    r.is_hydropower = RowParser::required(p.boolean(5), 5);
    r.is_new_station = RowParser::required(p.boolean(6), 6);

    const auto height = p.number(7);
    require_positive(height, 7);
    r.wall_height_m = RowParser::required(height, 7);
    if (r.wall_height_m < kLargeDamHeightM) warnings.emplace_back("below large-dam threshold 15 m");

    r.wall_length_m = p.number(8);
    require_positive(r.wall_length_m, 8);
    r.installed_capacity_mw = p.number(9);
    require_positive(r.installed_capacity_mw, 9, true);
    r.unit_capacity_mw = p.number(10);
    require_positive(r.unit_capacity_mw, 10);
    r.reservoir_area_ha = p.number(11);
    require_positive(r.reservoir_area_ha, 11);
    r.tunnel_length_km = p.number(12);
    require_positive(r.tunnel_length_km, 12, true);

    const auto est_cost = p.number(13);
    if (est_cost && *est_cost <= 0.0) throw InputError("negative or zero estimated_cost");
    r.estimated_cost = RowParser::required(est_cost, 13);
    r.actual_cost = p.number(14);
    if (r.actual_cost && *r.actual_cost <= 0.0) throw InputError("negative or zero actual_cost");
    if (!r.actual_cost) warnings.emplace_back("actual_cost absent");

    r.currency = std::string(p.cell(15));
    r.year_decision = static_cast<int>(RowParser::required(p.integer(17), 17));
    const auto base = p.integer(16);
    r.base_year = base ? static_cast<int>(*base) : r.year_decision;
    if (const auto yc = p.integer(18)) r.year_completion = static_cast<int>(*yc);
    if (r.year_completion && *r.year_completion < r.year_decision) {
        throw InputError("year_completion precedes year_decision");
    }

    const auto est_months = p.number(19);
    if (est_months && *est_months <= 0.0) throw InputError("estimated_schedule_months must be > 0");
    r.estimated_schedule_months = RowParser::required(est_months, 19);
    r.actual_schedule_months = p.number(20);
    if (r.actual_schedule_months && *r.actual_schedule_months <= 0.0) {
        throw InputError("actual_schedule_months must be > 0");
    }
    if (!r.actual_schedule_months) warnings.emplace_back("actual_schedule_months absent");
    if (r.actual_schedule_months && r.year_completion) {
        const double span = 12.0 * static_cast<double>(*r.year_completion - r.year_decision);
        if (std::abs(span - *r.actual_schedule_months) > kScheduleToleranceMonths) {
            throw InputError("actual_schedule_months inconsistent with year_decision..year_completion by more than 24 months");
        }
    }

    r.fx_cost_share_pct = p.number(21);
    require_percent(r.fx_cost_share_pct, 21);
    r.icb_share_pct = p.number(22);
    require_percent(r.icb_share_pct, 22);
    r.local_contractor = p.boolean(23);
    r.inflation_contingency_pct = p.number(24);
    require_positive(r.inflation_contingency_pct, 24, true);
    r.estimated_bcr = p.number(25);
    require_positive(r.estimated_bcr, 25);
    return r;
}

}  // namespace detail

/// Reads a `refclass.csv` stream.
///
/// Each valid row becomes a DamRecord; rejected rows and warnings are
/// reported as diagnostics with their data-row number. A malformed file
/// (bad header, ragged rows, broken quoting) throws InputError. With
/// `strict`, any diagnostic at all turns into an IngestFailure.
inline IngestResult ingest_reference_csv(std::istream& source, bool strict) {
    const auto rows = csv::read(source);
    if (rows.empty()) throw InputError("empty reference class");
    const auto& header = rows.front().cells;
    if (header.size() != kReferenceCsvHeader.size()) {
        throw InputError("malformed header: expected " + std::to_string(kReferenceCsvHeader.size()) + " columns, got " +
                         std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) != kReferenceCsvHeader[i]) {
            throw InputError("malformed header: column " + std::to_string(i + 1) + " is '" + header[i] +
                             "', expected '" + std::string(kReferenceCsvHeader[i]) + "'");
        }
    }

    std::vector<DamRecord> records;
    std::vector<Diagnostic> diags;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.cells.size() != kReferenceCsvHeader.size()) {
            throw InputError("malformed CSV at line " + std::to_string(row.line) + ": expected " +
                             std::to_string(kReferenceCsvHeader.size()) + " fields, got " +
                             std::to_string(row.cells.size()));
        }
        const std::string id{csv::trim(row.cells[0])};
        std::vector<std::string> warnings;
        try {
            auto rec = detail::parse_record(row.cells, warnings);
            for (auto& w : warnings) diags.push_back({i, id, Severity::warning, std::move(w)});
            records.push_back(std::move(rec));
        } catch (const InputError& e) {
            diags.push_back({i, id, Severity::error, std::string("row rejected: ") + e.what()});
        }
    }
    if (strict && !diags.empty()) {
        throw IngestFailure("strict ingestion failed: " + std::to_string(diags.size()) + " diagnostic(s); first: " +
                                format(diags.front()),
                            diags);
    }
    if (records.empty()) throw IngestFailure("empty reference class", diags);
    return IngestResult{ReferenceClass(std::move(records), "all ingested records"), std::move(diags)};
}

/// Writes records in `refclass.csv` format. Doubles use the shortest
/// round-trip representation, so re-ingesting reproduces identical values.
inline void write_reference_csv(std::ostream& os, const std::vector<DamRecord>& records) {
    std::vector<std::string> header(kReferenceCsvHeader.begin(), kReferenceCsvHeader.end());
    csv::write_row(os, header);
    auto num = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string{}; };
    auto flag = [](std::optional<bool> v) { return v ? std::string(*v ? "true" : "false") : std::string{}; };
    for (const auto& r : records) {
        csv::write_row(os, {
                               r.id,
                               r.name,
                               r.country,
                               std::string(to_string(r.region)),
                               std::string(to_string(r.project_type)),
                               flag(r.is_hydropower),
                               flag(r.is_new_station),
                               csv::format_double(r.wall_height_m),
                               num(r.wall_length_m),
                               num(r.installed_capacity_mw),
                               num(r.unit_capacity_mw),
                               num(r.reservoir_area_ha),
                               num(r.tunnel_length_km),
                               csv::format_double(r.estimated_cost),
                               num(r.actual_cost),
                               r.currency,
                               std::to_string(r.base_year),
                               std::to_string(r.year_decision),
                               r.year_completion ? std::to_string(*r.year_completion) : std::string{},
                               csv::format_double(r.estimated_schedule_months),
                               num(r.actual_schedule_months),
                               num(r.fx_cost_share_pct),
                               num(r.icb_share_pct),
                               flag(r.local_contractor),
                               num(r.inflation_contingency_pct),
                               num(r.estimated_bcr),
                           });
    }
}

inline void write_reference_csv(std::ostream& os, const ReferenceClass& rc) { write_reference_csv(os, rc.records()); }

}  // namespace refcast::refdata
