#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/rcf/uplift.hpp"
#include "refcast/stats/distribution.hpp"

namespace refcast::rcf {

/// Capital-expenditure optimism-bias uplifts for one asset class, in
/// percent. Values the source gives only as ranges are null, with the range
/// kept in `range_note`.
struct AssetClassBenchmark {
    std::string category;
    std::vector<std::string> project_types;
    std::optional<double> mean_overrun_pct;
    std::optional<double> p50_uplift_pct;
    std::optional<double> p80_uplift_pct;
    std::string range_note;
    std::string source;

    friend bool operator==(const AssetClassBenchmark&, const AssetClassBenchmark&) = default;
};

inline std::vector<AssetClassBenchmark> builtin_benchmarks() {
    const std::string flyvbjerg = "Flyvbjerg (2006, 2008)";
    return {
        {"Roads",
         {"Motorway", "Trunk roads", "Local roads", "Bicycle facilities", "Pedestrian facilities", "Park and ride",
          "Bus lane schemes", "Guided buses"},
         20.0, 15.0, 32.0, "", flyvbjerg},
        {"Rail",
         {"Metro", "Light rail", "Guided buses on tracks", "Conventional rail", "High speed rail"},
         45.0, 40.0, 57.0, "", flyvbjerg},
        {"Fixed links", {"Bridges", "Tunnels"}, 34.0, 23.0, 55.0, "", flyvbjerg},
        {"Building projects", {"Stations", "Terminal buildings"}, std::nullopt, std::nullopt, std::nullopt,
         "optimism bias uplift range 4-51%", "Mott MacDonald (2002)"},
        {"Standard civil engineering", {}, std::nullopt, std::nullopt, std::nullopt,
         "optimism bias uplift range 3-44%", "Mott MacDonald (2002)"},
        {"Non-standard civil engineering", {}, std::nullopt, std::nullopt, std::nullopt,
         "optimism bias uplift range 6-66%", "Mott MacDonald (2002)"},
        {"Mining projects", {}, 14.0, std::nullopt, std::nullopt, "", "Bertisen and Davis (2008)"},
        {"Thermal power plants", {}, 6.0, std::nullopt, std::nullopt,
         "approximate comparison only; reference class distribution not available",
         "Bacon and Besant-Jones (1998, p.321)"},
        {"Large dam projects",
         {"Large hydropower", "Large Irrigation", "Flood control", "Multipurpose dams"},
         96.0, 26.0, 99.0, "", "245 large dams, 1934-2007, constant local currency"},
        {"Nuclear power plants", {}, 207.0, std::nullopt, std::nullopt, "80th percentile range 109-281%",
         "Schlissel and Biewald (2008, p.8), CBO / EIA DOE/EIA-0485"},
    };
}

inline nlohmann::json to_json(const AssetClassBenchmark& b) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {
        {"category", b.category},
        {"project_types", b.project_types},
        {"mean_overrun_pct", opt(b.mean_overrun_pct)},
        {"p50_uplift_pct", opt(b.p50_uplift_pct)},
        {"p80_uplift_pct", opt(b.p80_uplift_pct)},
        {"range_note", b.range_note},
        {"source", b.source},
    };
}

inline AssetClassBenchmark benchmark_from_json(const nlohmann::json& j) {
    try {
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            return j.at(key).get<double>();
        };
        AssetClassBenchmark b;
        b.category = j.at("category").get<std::string>();
        if (j.contains("project_types")) b.project_types = j.at("project_types").get<std::vector<std::string>>();
        b.mean_overrun_pct = opt("mean_overrun_pct");
        b.p50_uplift_pct = opt("p50_uplift_pct");
        b.p80_uplift_pct = opt("p80_uplift_pct");
        b.range_note = j.value("range_note", "");
        b.source = j.value("source", "");
        if (b.p50_uplift_pct && b.p80_uplift_pct && *b.p80_uplift_pct < *b.p50_uplift_pct) {
            throw InputError("benchmark '" + b.category + "': p80 below p50");
        }
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid benchmark entry: ") + e.what());
    }
}

inline std::vector<AssetClassBenchmark> benchmarks_from_json(const nlohmann::json& j) {
    const auto& rows = j.contains("benchmarks") ? j.at("benchmarks") : j;
    if (!rows.is_array()) throw InputError("benchmarks must be a JSON array");
    std::vector<AssetClassBenchmark> out;
    for (const auto& row : rows) out.push_back(benchmark_from_json(row));
    return out;
}

struct ComparisonRow {
    std::string category;
    std::optional<double> mean_overrun_pct;
    std::optional<double> p50_uplift_pct;
    std::optional<double> p80_uplift_pct;
    std::string note;
};

/// Benchmarks followed by one row for the project's own reference class,
/// read off its uplift curve (mean overrun, uplift at 50% and 20% risk).
inline std::vector<ComparisonRow> compare_asset_classes(const UpliftCurve& project_curve,
                                                        const std::vector<AssetClassBenchmark>& benchmarks,
                                                        const std::string& project_label = "This reference class") {
    std::vector<ComparisonRow> table;
    table.reserve(benchmarks.size() + 1);
    for (const auto& b : benchmarks) {
        table.push_back({b.category, b.mean_overrun_pct, b.p50_uplift_pct, b.p80_uplift_pct, b.range_note});
    }
    const auto summary = stats::summarize(project_curve.source());
    std::string note = "n = " + std::to_string(summary.n);
    if (const auto w = stats::small_sample_warning(project_curve.source())) note += "; " + *w;
    table.push_back({project_label, (summary.mean - 1.0) * 100.0, project_curve.evaluate(0.5) * 100.0,
                     project_curve.evaluate(0.2) * 100.0, note});
    return table;
}

}  // namespace refcast::rcf
