#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/spec.hpp"

namespace refcast::lmm {

inline constexpr const char* kNoRandomEffectFlag = "no random effect applied";
inline constexpr const char* kOutsideResponseDomain = "prediction outside response domain";

struct PredictionResult {
    double linear_predictor = 0.0;  // transformed scale, including the BLUP when applied
    double value = 0.0;             // back-transformed through the response transformation
    bool random_effect_applied = false;
    double random_effect = 0.0;
    std::vector<std::string> flags;
};

/// Raw (untransformed) variable values keyed by variable name.
using TermValues = std::map<std::string, double>;

/// Design row for one observation: intercept, transformed terms, then
/// interaction products, in the order of ModelSpec::column_names().
inline Eigen::VectorXd design_row(const ModelSpec& spec, const TermValues& values) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(spec.column_count()));
    Eigen::Index k = 0;
    if (spec.intercept) row(k++) = 1.0;
    std::vector<double> transformed;
    for (const auto& t : spec.terms) {
        const auto it = values.find(t.variable);
        if (it == values.end()) throw ModelError("missing term: " + t.variable);
        if (!t.transform.in_domain(it->second)) {
            throw ModelError(t.label() + " undefined for " + t.variable + " = " + std::to_string(it->second));
        }
        transformed.push_back(t.transform.forward(it->second));
        row(k++) = transformed.back();
    }
    for (const auto& in : spec.interactions) {
        row(k++) = transformed[spec.find_term(in.left)] * transformed[spec.find_term(in.right)];
    }
    return row;
}

/// Prediction from an already-built design row.
inline PredictionResult predict_row(const FittedModel& model, const Eigen::VectorXd& row,
                                    const std::optional<std::string>& group = std::nullopt) {
    if (row.size() != model.beta.size()) throw ModelError("design row length does not match the model");
    PredictionResult out;
    out.linear_predictor = row.dot(model.beta);
    const auto it = group ? model.group_effects.find(*group) : model.group_effects.end();
    if (it != model.group_effects.end()) {
        out.random_effect_applied = true;
        out.random_effect = it->second;
        out.linear_predictor += it->second;
    } else {
        out.flags.emplace_back(kNoRandomEffectFlag);
    }
    const auto& tr = model.spec.response.transform;
    if (!tr.in_range(out.linear_predictor)) {
        throw ModelError(std::string(kOutsideResponseDomain) + ": " + model.spec.response.label() + " = " +
                         std::to_string(out.linear_predictor));
    }
    out.value = tr.inverse(out.linear_predictor);
    return out;
}

inline PredictionResult predict(const FittedModel& model, const TermValues& values,
                                const std::optional<std::string>& group = std::nullopt) {
    return predict_row(model, design_row(model.spec, values), group);
}

inline nlohmann::json to_json(const PredictionResult& p) {
    return {{"linear_predictor", p.linear_predictor},
            {"value", p.value},
            {"random_effect_applied", p.random_effect_applied},
            {"random_effect", p.random_effect},
            {"flags", p.flags}};
}

inline nlohmann::json to_json(const FittedModel& m) {
    nlohmann::json coefs = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.beta.size(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        coefs.push_back({{"term", idx < m.names.size() ? m.names[idx] : "x" + std::to_string(j)},
                         {"coefficient", m.beta(j)},
                         {"std_error", m.se(j)},
                         {"t", m.t_stats(j)},
                         {"p_value", m.p_values(j)}});
    }
    return {
        {"spec", to_json(m.spec)},
        {"method", to_string(m.method)},
        {"coefficients", coefs},
        {"variance_components",
         {{"sigma2_group", m.sigma2_group}, {"sigma2_resid", m.sigma2_resid}, {"lambda", m.lambda}}},
        {"loglik", m.loglik},
        {"df", m.df},
        {"df_convention", m.df_convention},
        {"n_used", m.n_used},
        {"n_dropped", m.n_dropped},
        {"n_groups", m.n_groups},
        {"group_effects", m.group_effects},
        {"residual_sum_squares", m.residual_sum_squares},
        {"warnings", m.warnings},
    };
}

/// Reads the output of to_json(FittedModel) back; enough for prediction
/// and reporting (the covariance matrix is not serialized).
inline FittedModel fitted_model_from_json(const nlohmann::json& j) {
    try {
        FittedModel m;
        m.spec = spec_from_json(j.at("spec"));
        m.method = parse_method(j.at("method").get<std::string>());
        const auto& coefs = j.at("coefficients");
        const auto p = static_cast<Eigen::Index>(coefs.size());
        m.beta.resize(p);
        m.se.resize(p);
        m.t_stats.resize(p);
        m.p_values.resize(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            const auto& c = coefs.at(static_cast<std::size_t>(k));
            m.names.push_back(c.at("term").get<std::string>());
            m.beta(k) = c.at("coefficient").get<double>();
            m.se(k) = c.at("std_error").get<double>();
            m.t_stats(k) = c.at("t").get<double>();
            m.p_values(k) = c.at("p_value").get<double>();
        }
        if (m.names != m.spec.column_names()) throw InputError("coefficient terms do not match the model spec");
        const auto& vc = j.at("variance_components");
        m.sigma2_group = vc.at("sigma2_group").get<double>();
        m.sigma2_resid = vc.at("sigma2_resid").get<double>();
        m.lambda = vc.at("lambda").get<double>();
        m.loglik = j.value("loglik", 0.0);
        m.df = j.value("df", 0);
        m.df_convention = j.value("df_convention", std::string(kDfConvention));
        m.n_used = j.value("n_used", std::size_t{0});
        m.n_dropped = j.value("n_dropped", std::size_t{0});
        m.n_groups = j.value("n_groups", std::size_t{0});
        if (j.contains("group_effects")) m.group_effects = j.at("group_effects").get<std::map<std::string, double>>();
        m.residual_sum_squares = j.value("residual_sum_squares", 0.0);
        if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid fitted model: ") + e.what());
    }
}

/// Four-column coefficient table (coefficient, standard error, t, two-tailed
/// p) followed by the variance components.
inline std::string format_table(const FittedModel& m) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-40s %12s %12s %9s %9s\n", "term", "coefficient", "std_error", "t", "p");
    out += buf;
    for (Eigen::Index j = 0; j < m.beta.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%-40s %12.6g %12.6g %9.3f %9.3f\n",
                      m.names[static_cast<std::size_t>(j)].c_str(), m.beta(j), m.se(j), m.t_stats(j),
                      m.p_values(j));
        out += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "\nmethod %s, n_used %zu, n_dropped %zu, groups %zu\n"
                  "sigma2_group %.6g, sigma2_resid %.6g, loglik %.6f\n",
                  to_string(m.method).c_str(), m.n_used, m.n_dropped, m.n_groups, m.sigma2_group, m.sigma2_resid,
                  m.loglik);
    out += buf;
    out += "df " + std::to_string(m.df) + " (" + m.df_convention + ")\n";
    for (const auto& w : m.warnings) out += "warning: " + w + "\n";
    return out;
}

}  // namespace refcast::lmm
