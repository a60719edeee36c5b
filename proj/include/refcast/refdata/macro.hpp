#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/refdata/countries.hpp"
#include "refcast/refdata/csv.hpp"

namespace refcast::refdata {

using YearSeries = std::map<int, double>;

// Polity2 scores at or above this count as democracy.
inline constexpr int kDemocracyPolityThreshold = 6;

struct CountryMacroSeries {
    std::string country;
    YearSeries deflator;
    YearSeries fx_rate_lcu_per_usd;
    YearSeries per_capita_income_const2000usd;
    YearSeries gdp_nominal_usd;
    std::map<int, int> polity2;
    YearSeries muv_index;

    std::optional<bool> democracy(int year) const {
        const auto it = polity2.find(year);
        if (it == polity2.end()) return std::nullopt;
        return it->second >= kDemocracyPolityThreshold;
    }

    friend bool operator==(const CountryMacroSeries&, const CountryMacroSeries&) = default;
};

using MacroMap = std::map<std::string, CountryMacroSeries>;

inline std::optional<double> value_at(const YearSeries& s, int year) {
    const auto it = s.find(year);
    if (it == s.end()) return std::nullopt;
    return it->second;
}

inline constexpr std::array<std::string_view, 8> kMacroCsvHeader{
    "country", "year", "deflator", "fx_rate", "per_capita_income_2000usd", "gdp_nominal_usd", "polity2", "muv_index"};

/// Reads the long-format `macro.csv`. Every present value must be strictly
/// positive (polity2: integer in [-10, 10]); a (country, year) pair may
/// appear only once. Any violation throws InputError naming the line.
inline MacroMap ingest_macro_csv(std::istream& in) {
    const auto rows = csv::read(in);
    if (rows.empty()) throw InputError("empty macro file");
    const auto& header = rows.front().cells;
    if (header.size() != kMacroCsvHeader.size()) throw InputError("malformed macro header");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) != kMacroCsvHeader[i]) {
            throw InputError("malformed macro header: expected '" + std::string(kMacroCsvHeader[i]) + "'");
        }
    }
    MacroMap out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string where = "macro line " + std::to_string(row.line) + ": ";
        if (row.cells.size() != kMacroCsvHeader.size()) throw InputError(where + "wrong number of fields");
        try {
            const std::string country{csv::trim(row.cells[0])};
            if (!is_known_country(country)) throw InputError("unknown country code '" + country + "'");
            const auto year_opt = csv::parse_int(row.cells[1]);
            if (!year_opt) throw InputError("year absent");
            const int year = static_cast<int>(*year_opt);
            auto& series = out[country];
            series.country = country;
            auto put = [&](YearSeries& s, std::size_t col) {
                const auto v = csv::parse_double(row.cells[col]);
                if (!v) return;
                if (*v <= 0.0) throw InputError(std::string(kMacroCsvHeader[col]) + " must be > 0");
                if (!s.emplace(year, *v).second) {
                    throw InputError("duplicate year " + std::to_string(year) + " for " + country);
                }
            };
            put(series.deflator, 2);
            put(series.fx_rate_lcu_per_usd, 3);
            put(series.per_capita_income_const2000usd, 4);
            put(series.gdp_nominal_usd, 5);
            if (const auto p = csv::parse_int(row.cells[6])) {
                if (*p < -10 || *p > 10) throw InputError("polity2 must lie in [-10, 10]");
                if (!series.polity2.emplace(year, static_cast<int>(*p)).second) {
                    throw InputError("duplicate year " + std::to_string(year) + " for " + country);
                }
            }
            put(series.muv_index, 7);
        } catch (const InputError& e) {
            throw InputError(where + e.what());
        }
    }
    return out;
}

inline void write_macro_csv(std::ostream& os, const MacroMap& macro) {
    csv::write_row(os, std::vector<std::string>(kMacroCsvHeader.begin(), kMacroCsvHeader.end()));
    for (const auto& [country, s] : macro) {
        std::map<int, bool> years;
        for (const auto* series : {&s.deflator, &s.fx_rate_lcu_per_usd, &s.per_capita_income_const2000usd,
                                   &s.gdp_nominal_usd, &s.muv_index}) {
            for (const auto& kv : *series) years[kv.first] = true;
        }
        for (const auto& kv : s.polity2) years[kv.first] = true;
        auto num = [](const YearSeries& ys, int y) {
            const auto v = value_at(ys, y);
            return v ? csv::format_double(*v) : std::string{};
        };
        for (const auto& [year, unused] : years) {
            (void)unused;
            const auto pol = s.polity2.find(year);
            csv::write_row(os, {country, std::to_string(year), num(s.deflator, year), num(s.fx_rate_lcu_per_usd, year),
                                num(s.per_capita_income_const2000usd, year), num(s.gdp_nominal_usd, year),
                                pol == s.polity2.end() ? std::string{} : std::to_string(pol->second),
                                num(s.muv_index, year)});
        }
    }
}

}  // namespace refcast::refdata
