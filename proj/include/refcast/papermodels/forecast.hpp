#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/papermodels/published.hpp"
#include "refcast/rcf/fixtures.hpp"
#include "refcast/rcf/stress.hpp"
#include "refcast/rcf/uplift.hpp"
#include "refcast/refdata/csv.hpp"
#include "refcast/refdata/types.hpp"

namespace refcast::papermodels {

inline constexpr const char* kConventionCaveat =
    "model inputs use natural logarithms and long-term inflation in percent units (8 means 8%/yr)";
inline constexpr const char* kNoBcrCaveat = "no BCR supplied; viability not assessed";
inline constexpr const char* kM1HeadlineCaveat =
    "M1: the published 44% cost overrun for the worked Diamer-Bhasha example is not reproducible from the "
    "published fixed effects (120 months at 8%/yr gives 34.0%); the gap is attributed to an unpublished country "
    "intercept and is not reconciled here";
inline constexpr const char* kM3UsCaveat =
    "M3: the published 0.05% slippage for the same project relocated to the US is not reproducible from the "
    "published fixed effects (democracy 1, outside South Asia, income 38,000 gives 8.5%); flagged, not reconciled";

struct RcfBranch {
    double cost_uplift = 0.0;
    std::optional<double> debiased_budget;
    double schedule_uplift = 0.0;
    std::optional<double> debiased_schedule_months;
    std::string source;
};

struct ModelBranchEntry {
    ModelId model = ModelId::M1_cost_overrun;
    std::string response;
    double linear_predictor = 0.0;
    double value = 0.0;
    std::string interpretation;
    std::vector<std::string> flags;
};

struct ForecastReport {
    std::string project;
    std::string currency;
    double acceptable_risk = 0.0;
    std::optional<RcfBranch> rcf_branch;
    std::vector<ModelBranchEntry> model_branch;
    std::optional<rcf::ViabilityVerdict> viability;        // from the RCF cost factor
    std::optional<rcf::ViabilityVerdict> model_viability;  // from the M1 cost factor
    std::vector<std::string> caveats;
};

struct ForecastOptions {
    std::vector<ModelId> models{kAllModels.begin(), kAllModels.end()};
    // When set, a requested model that cannot be evaluated is an error
    // rather than a skipped entry with a caveat.
    bool require_models = false;
    double benefit_shortfall = 0.0;
};

inline rcf::ReferenceDistributions distributions_of(const refdata::ReferenceClass& rc) {
    return {rc.cost_overruns(), rc.schedule_slippages(), rc.filter_description(), false};
}

namespace detail {

inline std::string pct(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
    return buf;
}

inline std::string interpret(ModelId id, double value) {
    switch (id) {
        case ModelId::M1_cost_overrun: return "expected cost overrun " + pct(value - 1.0);
        case ModelId::M3_schedule_slip: return "expected schedule slippage " + pct(value - 1.0);
        case ModelId::M2_est_schedule:
        case ModelId::M4_actual_schedule: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.1f months", value);
            return (id == ModelId::M2_est_schedule ? "typical estimated schedule " : "expected actual schedule ") +
                   std::string(buf);
        }
    }
    return {};
}

}  // namespace detail

/// RCF uplifts on cost and schedule at `acceptable_risk`, published-model
/// predictions for every applicable model, and viability when a BCR is
/// given.
inline ForecastReport forecast_report(const ProjectDescriptor& d, const rcf::ReferenceDistributions& reference,
                                      double acceptable_risk, const ForecastOptions& options = {}) {
    rcf::check_risk(acceptable_risk);
    ForecastReport r;
    r.project = d.name;
    r.currency = d.currency;
    r.acceptable_risk = acceptable_risk;

    if (d.estimated_cost || d.estimated_schedule_months) {
        RcfBranch b;
        b.source = reference.source;
        b.cost_uplift = rcf::required_uplift(reference.cost, acceptable_risk);
        b.schedule_uplift = rcf::required_uplift(reference.schedule, acceptable_risk);
        if (d.estimated_cost) b.debiased_budget = rcf::debias(*d.estimated_cost, b.cost_uplift);
        if (d.estimated_schedule_months) {
            b.debiased_schedule_months = rcf::debias(*d.estimated_schedule_months, b.schedule_uplift);
        }
        if (b.cost_uplift < 0.0 || b.schedule_uplift < 0.0) {
            r.caveats.emplace_back("negative uplift at this risk level is a downlift, reported unclamped");
        }
        r.rcf_branch = b;
        if (reference.reconstruction) r.caveats.push_back("reference distribution: " + reference.source);
        if (const auto w = stats::small_sample_warning(reference.cost)) r.caveats.push_back("cost: " + *w);
        if (const auto w = stats::small_sample_warning(reference.schedule)) r.caveats.push_back("schedule: " + *w);
    }

    bool m1_ran = false;
    bool m3_ran = false;
    for (const auto id : options.models) {
        try {
            const auto p = predict_published(id, d);
            r.model_branch.push_back(
                {id, p.response, p.linear_predictor, p.value, detail::interpret(id, p.value), {lmm::kNoRandomEffectFlag}});
            m1_ran = m1_ran || id == ModelId::M1_cost_overrun;
            m3_ran = m3_ran || id == ModelId::M3_schedule_slip;
        } catch (const ModelError& e) {
            if (options.require_models) throw;
            r.caveats.push_back(std::string(short_name(id)) + " skipped: " + e.what());
        }
    }

    if (!r.rcf_branch && r.model_branch.empty()) {
        throw ModelError("neither the reference-class branch nor any published model could be computed for '" +
                         d.name + "'");
    }

    if (!r.model_branch.empty()) {
        r.caveats.emplace_back(kConventionCaveat);
        r.caveats.emplace_back(
            "published models carry no country random intercepts; predictions are fixed-effects only (no random "
            "effect applied)");
    }
    if (m1_ran) r.caveats.emplace_back(kM1HeadlineCaveat);
    if (m3_ran) r.caveats.emplace_back(kM3UsCaveat);

    if (d.estimated_bcr) {
        if (r.rcf_branch) {
            r.viability = rcf::viability(*d.estimated_bcr, 1.0 + r.rcf_branch->cost_uplift, options.benefit_shortfall);
        }
        for (const auto& e : r.model_branch) {
            if (e.model == ModelId::M1_cost_overrun) {
                r.model_viability = rcf::viability(*d.estimated_bcr, e.value, options.benefit_shortfall);
            }
        }
    } else {
        r.caveats.emplace_back(kNoBcrCaveat);
    }
    return r;
}

inline nlohmann::json to_json(const rcf::ViabilityVerdict& v) {
    return {{"debiased_bcr", v.debiased_bcr}, {"stranded", v.stranded}, {"assumptions", v.assumptions}};
}

inline nlohmann::json to_json(const ForecastReport& r) {
    nlohmann::json j{{"project", r.project},
                     {"currency", r.currency},
                     {"acceptable_risk", r.acceptable_risk},
                     {"caveats", r.caveats}};
    if (r.rcf_branch) {
        const auto& b = *r.rcf_branch;
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        j["rcf_branch"] = {{"cost_uplift", b.cost_uplift},
                           {"debiased_budget", opt(b.debiased_budget)},
                           {"schedule_uplift", b.schedule_uplift},
                           {"debiased_schedule_months", opt(b.debiased_schedule_months)},
                           {"source", b.source}};
    } else {
        j["rcf_branch"] = nullptr;
    }
    nlohmann::json models = nlohmann::json::array();
    for (const auto& e : r.model_branch) {
        models.push_back({{"model", std::string(to_string(e.model))},
                          {"response", e.response},
                          {"linear_predictor", e.linear_predictor},
                          {"value", e.value},
                          {"interpretation", e.interpretation},
                          {"flags", e.flags}});
    }
    j["model_branch"] = models;
    j["viability"] = r.viability ? to_json(*r.viability) : nlohmann::json(nullptr);
    j["model_viability"] = r.model_viability ? to_json(*r.model_viability) : nlohmann::json(nullptr);
    return j;
}

inline void write_text(std::ostream& os, const ForecastReport& r) {
    char buf[256];
    os << "Forecast for " << r.project << " at acceptable risk " << refdata::csv::format_double(r.acceptable_risk)
       << "\n";
    if (r.rcf_branch) {
        const auto& b = *r.rcf_branch;
        os << "\nReference class branch (" << b.source << ")\n";
        std::snprintf(buf, sizeof buf, "  cost uplift          %8.1f%%\n", b.cost_uplift * 100.0);
        os << buf;
        if (b.debiased_budget) {
            std::snprintf(buf, sizeof buf, "  de-biased budget     %10.2f %s\n", *b.debiased_budget, r.currency.c_str());
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "  schedule uplift      %8.1f%%\n", b.schedule_uplift * 100.0);
        os << buf;
        if (b.debiased_schedule_months) {
            std::snprintf(buf, sizeof buf, "  de-biased schedule   %10.1f months\n", *b.debiased_schedule_months);
            os << buf;
        }
    }
    if (!r.model_branch.empty()) {
        os << "\nPublished-model branch\n";
        std::snprintf(buf, sizeof buf, "  %-20s %-36s %12s %12s\n", "model", "response", "predictor", "value");
        os << buf;
        for (const auto& e : r.model_branch) {
            std::snprintf(buf, sizeof buf, "  %-20s %-36s %12.6f %12.6f  %s\n", std::string(to_string(e.model)).c_str(),
                          e.response.c_str(), e.linear_predictor, e.value, e.interpretation.c_str());
            os << buf;
        }
    }
    auto verdict = [&](const char* label, const rcf::ViabilityVerdict& v) {
        std::snprintf(buf, sizeof buf, "  %s de-biased BCR %.4f -> %s\n", label, v.debiased_bcr,
                      v.stranded ? "stranded" : "viable");
        os << buf;
    };
    if (r.viability || r.model_viability) {
        os << "\nViability\n";
        if (r.viability) verdict("reference class:", *r.viability);
        if (r.model_viability) verdict("M1 model:       ", *r.model_viability);
    }
    os << "\nCaveats\n";
    for (const auto& c : r.caveats) os << "  - " << c << "\n";
}

/// Long-format CSV: section,item,value.
inline void write_csv(std::ostream& os, const ForecastReport& r) {
    using refdata::csv::format_double;
    using refdata::csv::write_row;
    write_row(os, {"acceptable_risk", "section", "item", "value"});
    const auto risk = format_double(r.acceptable_risk);
    auto row = [&](const std::string& section, const std::string& item, const std::string& value) {
        write_row(os, {risk, section, item, value});
    };
    if (r.rcf_branch) {
        const auto& b = *r.rcf_branch;
        row("rcf", "cost_uplift", format_double(b.cost_uplift));
        if (b.debiased_budget) row("rcf", "debiased_budget", format_double(*b.debiased_budget));
        row("rcf", "schedule_uplift", format_double(b.schedule_uplift));
        if (b.debiased_schedule_months) row("rcf", "debiased_schedule_months", format_double(*b.debiased_schedule_months));
    }
    for (const auto& e : r.model_branch) {
        const std::string id(to_string(e.model));
        row("model", id + ".linear_predictor", format_double(e.linear_predictor));
        row("model", id + ".value", format_double(e.value));
    }
    if (r.viability) {
        row("viability", "debiased_bcr", format_double(r.viability->debiased_bcr));
        row("viability", "stranded", r.viability->stranded ? "true" : "false");
    }
    if (r.model_viability) {
        row("model_viability", "debiased_bcr", format_double(r.model_viability->debiased_bcr));
        row("model_viability", "stranded", r.model_viability->stranded ? "true" : "false");
    }
    for (const auto& c : r.caveats) row("caveat", "", c);
}

}  // namespace refcast::papermodels
