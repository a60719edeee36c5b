#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/predict.hpp"
#include "refcast/lmm/spec.hpp"
#include "refcast/stats/transform.hpp"

namespace refcast::papermodels {

using stats::Transformation;

enum class ModelId { M1_cost_overrun, M2_est_schedule, M3_schedule_slip, M4_actual_schedule };

inline constexpr std::array kAllModels{ModelId::M1_cost_overrun, ModelId::M2_est_schedule,
                                       ModelId::M3_schedule_slip, ModelId::M4_actual_schedule};

inline std::string_view to_string(ModelId id) {
    switch (id) {
        case ModelId::M1_cost_overrun: return "M1_cost_overrun";
        case ModelId::M2_est_schedule: return "M2_est_schedule";
        case ModelId::M3_schedule_slip: return "M3_schedule_slip";
        case ModelId::M4_actual_schedule: return "M4_actual_schedule";
    }
    return "?";
}

inline std::string_view short_name(ModelId id) { return to_string(id).substr(0, 2); }

/// Accepts "M1" or the full id.
inline ModelId parse_model_id(std::string_view s) {
    for (auto id : kAllModels) {
        if (s == to_string(id) || s == short_name(id)) return id;
    }
    throw InputError("unknown model '" + std::string(s) + "' (expected M1..M4)");
}

/// One printed row of a coefficient table. `interaction_with` names the
/// second variable of a product term.
struct PublishedTerm {
    std::string printed_label;
    std::string variable;
    Transformation transform;
    std::optional<std::string> interaction_with;
    double coefficient = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 0.0;

    friend bool operator==(const PublishedTerm&, const PublishedTerm&) = default;
};

/// A published fitted model, coefficients as printed. Logs are natural and
/// inflation is in percent units.
struct PublishedModel {
    ModelId id = ModelId::M1_cost_overrun;
    std::string title;
    lmm::Term response;
    PublishedTerm intercept;
    std::vector<PublishedTerm> terms;
    int n_observations = 0;
    std::string provenance;

    friend bool operator==(const PublishedModel&, const PublishedModel&) = default;
};

inline const std::vector<PublishedModel>& published_models() {
    using T = Transformation;
    static const std::vector<PublishedModel> models{
        {ModelId::M1_cost_overrun,
         "Significant variables for cost accuracy (constant local currency)",
         {"cost_overrun", T::reciprocal()},
         {"Intercept", "constant", T::identity(), std::nullopt, 1.402, 0.185, 7.560, 0.000},
         {
             {"Log estimated duration (months)", "estimated_schedule_months", T::log(), std::nullopt, -0.100, 0.041,
              -2.424, 0.016},
             {"Log of country's long-term inflation rate (%)", "long_term_inflation_pct", T::log(), std::nullopt,
              -0.085, 0.029, -2.930, 0.005},
         },
         239,
         "printed coefficients; response is estimated/actual cost (1/x of the cost overrun)"},
        {ModelId::M2_est_schedule,
         "Significant variables for estimated construction schedule (months)",
         {"estimated_schedule_months", T::log()},
         {"Intercept", "constant", T::identity(), std::nullopt, 3.444, 0.197, 17.464, 0.000},
         {
             {"Sq rt of dam wall height (m)", "wall_height_m", T::sqrt(), std::nullopt, 0.029, 0.012, 2.414, 0.017},
             {"Log of dam wall length (m)", "wall_length_m", T::log(), std::nullopt, 0.058, 0.027, 2.153, 0.033},
             {"Log of hydropower installed capacity (MW)", "installed_capacity_mw", T::log(), std::nullopt, 0.016,
              0.007, 2.141, 0.034},
         },
         239,
         "printed coefficients; response is log of the estimated construction schedule"},
        {ModelId::M3_schedule_slip,
         "Significant variables for schedule slippage",
         {"schedule_slippage", T::reciprocal()},
         {"Intercept", "constant", T::identity(), std::nullopt, 0.405, 0.163, 2.483, 0.014},
         {
             {"Democracy dummy", "democracy", T::identity(), std::nullopt, -0.134, 0.055, -2.439, 0.016},
             {"Log of country's per capita income in year of decision to build (constant USD)",
              "per_capita_income_2000usd", T::log(), std::nullopt, 0.065, 0.019, 3.334, 0.001},
             {"Log of dam wall length (m)", "wall_length_m", T::log(), std::nullopt, -0.027, 0.013, -2.081, 0.039},
             {"Log of hydropower installed capacity (MW)", "installed_capacity_mw", T::log(), std::nullopt, 0.018,
              0.006, 3.207, 0.002},
             {"South Asia dummy", "south_asia", T::identity(), std::nullopt, 0.211, 0.113, 1.874, 0.066},
             {"Democracy in South Asia interaction effect", "democracy", T::identity(), "south_asia", -0.239, 0.113,
              -2.114, 0.036},
         },
         239,
         "printed coefficients; response is 1/x of the actual/estimated schedule ratio; democracy = polity2 >= +6"},
        {ModelId::M4_actual_schedule,
         "Significant variables for actual construction schedule (months)",
         {"actual_schedule_months", T::log()},
         {"Intercept", "constant", T::identity(), std::nullopt, -17.712, 6.401, -2.767, 0.007},
         {
             {"Log of dam wall length (m)", "wall_length_m", T::log(), std::nullopt, 0.105, 0.029, 3.567, 0.001},
             {"Year of actual project completion", "year_completion", T::identity(), std::nullopt, 0.011, 0.003,
              3.358, 0.001},
         },
         239,
         "printed coefficients; response is log of the actual construction schedule"},
    };
    return models;
}

inline const PublishedModel& published_model(ModelId id) {
    for (const auto& m : published_models()) {
        if (m.id == id) return m;
    }
    throw ModelError("unknown published model");
}

/// Inputs for a proposed project. Every model input is optional; each model
/// checks the fields it needs when called.
struct ProjectDescriptor {
    std::string name;
    std::string country;
    std::optional<double> estimated_cost;
    std::string currency;
    std::optional<double> estimated_schedule_months;
    std::optional<double> long_term_inflation_pct;
    std::optional<bool> democracy;
    std::optional<bool> south_asia;
    std::optional<double> per_capita_income_2000usd;
    std::optional<double> wall_height_m;
    std::optional<double> wall_length_m;
    std::optional<double> installed_capacity_mw;
    std::optional<double> estimated_bcr;
    std::optional<int> year_decision;
    std::optional<int> year_completion;

    friend bool operator==(const ProjectDescriptor&, const ProjectDescriptor&) = default;

    std::optional<double> value_of(std::string_view variable) const {
        auto flag = [](const std::optional<bool>& b) -> std::optional<double> {
            if (!b) return std::nullopt;
            return *b ? 1.0 : 0.0;
        };
        auto year = [](const std::optional<int>& y) -> std::optional<double> {
            if (!y) return std::nullopt;
            return static_cast<double>(*y);
        };
        if (variable == "constant") return 1.0;
        if (variable == "estimated_cost") return estimated_cost;
        if (variable == "estimated_schedule_months") return estimated_schedule_months;
        if (variable == "long_term_inflation_pct") return long_term_inflation_pct;
        if (variable == "democracy") return flag(democracy);
        if (variable == "south_asia") return flag(south_asia);
        if (variable == "per_capita_income_2000usd") return per_capita_income_2000usd;
        if (variable == "wall_height_m") return wall_height_m;
        if (variable == "wall_length_m") return wall_length_m;
        if (variable == "installed_capacity_mw") return installed_capacity_mw;
        if (variable == "estimated_bcr") return estimated_bcr;
        if (variable == "year_decision") return year(year_decision);
        if (variable == "year_completion") return year(year_completion);
        return std::nullopt;
    }

    // Copy with one numeric or dummy field replaced.
    ProjectDescriptor with(std::string_view variable, double v) const {
        ProjectDescriptor d = *this;
        if (variable == "estimated_cost") d.estimated_cost = v;
        else if (variable == "estimated_schedule_months") d.estimated_schedule_months = v;
        else if (variable == "long_term_inflation_pct") d.long_term_inflation_pct = v;
        else if (variable == "democracy") d.democracy = v != 0.0;
        else if (variable == "south_asia") d.south_asia = v != 0.0;
        else if (variable == "per_capita_income_2000usd") d.per_capita_income_2000usd = v;
        else if (variable == "wall_height_m") d.wall_height_m = v;
        else if (variable == "wall_length_m") d.wall_length_m = v;
        else if (variable == "installed_capacity_mw") d.installed_capacity_mw = v;
        else if (variable == "estimated_bcr") d.estimated_bcr = v;
        else if (variable == "year_decision") d.year_decision = static_cast<int>(std::lround(v));
        else if (variable == "year_completion") d.year_completion = static_cast<int>(std::lround(v));
        else throw ModelError("unknown descriptor field '" + std::string(variable) + "'");
        return d;
    }
};

inline ProjectDescriptor descriptor_from_json(const nlohmann::json& j) {
    try {
        ProjectDescriptor d;
        auto num = [&](const char* key) -> std::optional<double> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            return j.at(key).get<double>();
        };
        auto integer = [&](const char* key) -> std::optional<int> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            return j.at(key).get<int>();
        };
        auto flag = [&](const char* key) -> std::optional<bool> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            const auto& v = j.at(key);
            if (v.is_boolean()) return v.get<bool>();
            return v.get<double>() != 0.0;
        };
        d.name = j.value("name", std::string("unnamed project"));
        d.country = j.value("country", std::string());
        d.estimated_cost = num("estimated_cost");
        d.currency = j.value("currency", std::string());
        d.estimated_schedule_months = num("estimated_schedule_months");
        d.long_term_inflation_pct = num("long_term_inflation_pct");
        d.democracy = flag("democracy");
        d.south_asia = flag("south_asia");
        d.per_capita_income_2000usd = num("per_capita_income_2000usd");
        d.wall_height_m = num("wall_height_m");
        d.wall_length_m = num("wall_length_m");
        d.installed_capacity_mw = num("installed_capacity_mw");
        d.estimated_bcr = num("estimated_bcr");
        d.year_decision = integer("year_decision");
        d.year_completion = integer("year_completion");
        for (const auto* key : {"estimated_cost", "estimated_schedule_months", "wall_height_m", "wall_length_m",
                                "per_capita_income_2000usd", "estimated_bcr"}) {
            if (const auto v = num(key); v && !(*v > 0.0)) throw InputError(std::string(key) + " must be > 0");
        }
        if (d.installed_capacity_mw && *d.installed_capacity_mw < 0.0) {
            throw InputError("installed_capacity_mw must be >= 0");
        }
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid project descriptor: ") + e.what());
    }
}

inline nlohmann::json to_json(const ProjectDescriptor& d) {
    nlohmann::json j{{"name", d.name}, {"country", d.country}, {"currency", d.currency}};
    auto put = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
    };
    put("estimated_cost", d.estimated_cost);
    put("estimated_schedule_months", d.estimated_schedule_months);
    put("long_term_inflation_pct", d.long_term_inflation_pct);
    put("democracy", d.democracy);
    put("south_asia", d.south_asia);
    put("per_capita_income_2000usd", d.per_capita_income_2000usd);
    put("wall_height_m", d.wall_height_m);
    put("wall_length_m", d.wall_length_m);
    put("installed_capacity_mw", d.installed_capacity_mw);
    put("estimated_bcr", d.estimated_bcr);
    put("year_decision", d.year_decision);
    put("year_completion", d.year_completion);
    return j;
}

struct PublishedPrediction {
    ModelId model = ModelId::M1_cost_overrun;
    std::string response;  // e.g. "reciprocal(cost_overrun)"
    double linear_predictor = 0.0;
    double value = 0.0;  // back-transformed
};

namespace detail {

inline double term_value(const PublishedTerm& t, const ProjectDescriptor& d) {
    auto fetch = [&](const std::string& variable) {
        const auto v = d.value_of(variable);
        if (!v) throw ModelError("missing term: " + variable);
        return *v;
    };
    auto transformed = [&](const std::string& variable, const Transformation& tr) {
        const double raw = fetch(variable);
        if (!tr.in_domain(raw)) {
            throw ModelError(tr.apply_label(variable) + " undefined for " + variable + " = " + std::to_string(raw));
        }
        return tr.forward(raw);
    };
    double v = transformed(t.variable, t.transform);
    if (t.interaction_with) v *= transformed(*t.interaction_with, Transformation::identity());
    return v;
}

}  // namespace detail

/// Fixed-effects prediction from the printed coefficients. No random
/// intercept is applied because none were published.
inline PublishedPrediction predict_published(ModelId id, const ProjectDescriptor& d) {
    const auto& m = published_model(id);
    double eta = m.intercept.coefficient;
    for (const auto& t : m.terms) eta += t.coefficient * detail::term_value(t, d);
    const auto& tr = m.response.transform;
    if (!tr.in_range(eta)) {
        throw ModelError(std::string(lmm::kOutsideResponseDomain) + ": " + std::string(short_name(id)) + " " +
                         m.response.label() + " = " + std::to_string(eta));
    }
    return {id, m.response.label(), eta, tr.inverse(eta)};
}

struct Sensitivity {
    std::string variable;
    double delta = 0.0;
    double base = 0.0;
    double shifted = 0.0;
    double change = 0.0;  // shifted - base, back-transformed scale
};

/// Finite difference of the back-transformed prediction when `variable` is
/// moved by `delta`.
inline Sensitivity sensitivity(ModelId id, const ProjectDescriptor& d, const std::string& variable, double delta) {
    const auto& m = published_model(id);
    bool used = false;
    for (const auto& t : m.terms) used = used || t.variable == variable || t.interaction_with == variable;
    if (!used) throw ModelError("variable '" + variable + "' is not a term of " + std::string(short_name(id)));
    const auto current = d.value_of(variable);
    if (!current) throw ModelError("missing term: " + variable);
    const double base = predict_published(id, d).value;
    const double shifted = predict_published(id, d.with(variable, *current + delta)).value;
    return {variable, delta, base, shifted, shifted - base};
}

/// The published model as an lmm spec (main terms then the interaction).
inline lmm::ModelSpec to_spec(const PublishedModel& m) {
    lmm::ModelSpec s;
    s.response = m.response;
    for (const auto& t : m.terms) {
        if (!t.interaction_with) s.terms.push_back({t.variable, t.transform});
    }
    for (const auto& t : m.terms) {
        if (t.interaction_with) s.interactions.push_back({t.variable, *t.interaction_with});
    }
    return s;
}

/// FittedModel carrying the printed coefficients and zero variance
/// components, for use with lmm::predict.
inline lmm::FittedModel to_fitted_model(const PublishedModel& m) {
    lmm::FittedModel fm;
    fm.spec = to_spec(m);
    fm.names = fm.spec.column_names();
    std::vector<const PublishedTerm*> order{&m.intercept};
    for (const auto& t : m.terms) {
        if (!t.interaction_with) order.push_back(&t);
    }
    for (const auto& t : m.terms) {
        if (t.interaction_with) order.push_back(&t);
    }
    const auto p = static_cast<Eigen::Index>(order.size());
    fm.beta.resize(p);
    fm.se.resize(p);
    fm.t_stats.resize(p);
    fm.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& t = *order[static_cast<std::size_t>(j)];
        fm.beta(j) = t.coefficient;
        fm.se(j) = t.std_error;
        fm.t_stats(j) = t.t_stat;
        fm.p_values(j) = t.p_value;
    }
    fm.n_used = static_cast<std::size_t>(m.n_observations);
    fm.df_convention = "as published (method not stated)";
    fm.warnings.emplace_back("frozen published coefficients; variance components not published");
    return fm;
}

inline lmm::TermValues term_values(const ProjectDescriptor& d, const lmm::ModelSpec& spec) {
    lmm::TermValues values;
    for (const auto& t : spec.terms) {
        if (const auto v = d.value_of(t.variable)) values[t.variable] = *v;
    }
    return values;
}

inline nlohmann::json to_json(const PublishedTerm& t) {
    nlohmann::json j{{"label", t.printed_label},           {"variable", t.variable},
                     {"transform", std::string(t.transform.name())}, {"coefficient", t.coefficient},
                     {"std_error", t.std_error},           {"t", t.t_stat},
                     {"p_value", t.p_value}};
    j["interaction_with"] = t.interaction_with ? nlohmann::json(*t.interaction_with) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const PublishedModel& m) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : m.terms) terms.push_back(to_json(t));
    return {{"id", std::string(to_string(m.id))},
            {"title", m.title},
            {"response", lmm::to_json(m.response)},
            {"intercept", to_json(m.intercept)},
            {"terms", terms},
            {"n_observations", m.n_observations},
            {"provenance", m.provenance}};
}

inline nlohmann::json published_models_json() {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : published_models()) models.push_back(to_json(m));
    return {{"conventions",
             {{"logarithms", "natural"},
              {"inflation_units", "percent (8 means 8%/yr)"},
              {"df_note", "degrees of freedom method not published; p-values copied as printed"},
              {"random_effects", "country random intercepts not published; predictions are fixed-effects only"}}},
            {"models", models}};
}

inline PublishedTerm published_term_from_json(const nlohmann::json& j) {
    PublishedTerm t;
    t.printed_label = j.at("label").get<std::string>();
    t.variable = j.at("variable").get<std::string>();
    t.transform = Transformation::parse(j.at("transform").get<std::string>());
    if (j.contains("interaction_with") && !j.at("interaction_with").is_null()) {
        t.interaction_with = j.at("interaction_with").get<std::string>();
    }
    t.coefficient = j.at("coefficient").get<double>();
    t.std_error = j.at("std_error").get<double>();
    t.t_stat = j.at("t").get<double>();
    t.p_value = j.at("p_value").get<double>();
    return t;
}

inline std::vector<PublishedModel> published_models_from_json(const nlohmann::json& j) {
    try {
        std::vector<PublishedModel> out;
        for (const auto& mj : j.at("models")) {
            PublishedModel m;
            m.id = parse_model_id(mj.at("id").get<std::string>());
            m.title = mj.at("title").get<std::string>();
            m.response = lmm::term_from_json(mj.at("response"));
            m.intercept = published_term_from_json(mj.at("intercept"));
            for (const auto& t : mj.at("terms")) m.terms.push_back(published_term_from_json(t));
            m.n_observations = mj.at("n_observations").get<int>();
            m.provenance = mj.at("provenance").get<std::string>();
            out.push_back(std::move(m));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid published-model fixture: ") + e.what());
    }
}

struct SurfacePoint {
    double estimated_schedule_months = 0.0;
    double long_term_inflation_pct = 0.0;
    double cost_overrun = 0.0;
};

/// M1 predicted cost overrun over a duration grid at several inflation
/// levels. Points where the predictor leaves the response domain are skipped.
inline std::vector<SurfacePoint> m1_surface(double months_from, double months_to, double months_step,
                                            const std::vector<double>& inflation_levels) {
    if (!(months_step > 0.0) || months_to < months_from || months_from <= 0.0) {
        throw DomainError("invalid duration grid");
    }
    std::vector<SurfacePoint> out;
    ProjectDescriptor d;
    const auto steps = static_cast<long>(std::floor((months_to - months_from) / months_step + 1e-9));
    for (double infl : inflation_levels) {
        for (long k = 0; k <= steps; ++k) {
            const double months = months_from + static_cast<double>(k) * months_step;
            d.estimated_schedule_months = months;
            d.long_term_inflation_pct = infl;
            try {
                out.push_back({months, infl, predict_published(ModelId::M1_cost_overrun, d).value});
            } catch (const ModelError&) {
            }
        }
    }
    return out;
}

}  // namespace refcast::papermodels
