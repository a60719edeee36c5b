#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/stats/transform.hpp"

namespace refcast::lmm {

using stats::Transformation;

struct Term {
    std::string variable;
    Transformation transform;

    std::string label() const { return transform.apply_label(variable); }

    friend bool operator==(const Term&, const Term&) = default;
};

// Elementwise product of two declared terms. `left`/`right` name a term by
// its label or by its variable.
struct Interaction {
    std::string left;
    std::string right;

    friend bool operator==(const Interaction&, const Interaction&) = default;
};

inline constexpr const char* kInterceptName = "(Intercept)";

/// Transformation-aware regression specification with a single grouping
/// factor for the random intercept.
struct ModelSpec {
    Term response;
    std::vector<Term> terms;
    std::vector<Interaction> interactions;
    std::string grouping = "country";
    bool intercept = true;

    // Index into `terms` for a label or variable name, or terms.size().
    std::size_t find_term(const std::string& name) const {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].label() == name) return i;
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].variable == name) return i;
        }
        return terms.size();
    }

    std::string interaction_label(const Interaction& in) const {
        return terms.at(find_term(in.left)).label() + ":" + terms.at(find_term(in.right)).label();
    }

    void validate() const {
        if (response.variable.empty()) throw ModelError("model spec has no response");
        std::set<std::string> seen;
        for (const auto& t : terms) {
            if (t.variable.empty()) throw ModelError("model term with empty variable");
            if (!seen.insert(t.label()).second) throw ModelError("duplicate term '" + t.label() + "'");
        }
        for (const auto& in : interactions) {
            for (const auto* side : {&in.left, &in.right}) {
                if (find_term(*side) == terms.size()) {
                    throw ModelError("interaction references undeclared term '" + *side + "'");
                }
            }
            if (find_term(in.left) == find_term(in.right)) throw ModelError("interaction of a term with itself");
            if (!seen.insert(interaction_label(in)).second) {
                throw ModelError("duplicate interaction '" + interaction_label(in) + "'");
            }
        }
        if (grouping.empty()) throw ModelError("model spec has no grouping variable");
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        if (intercept) names.emplace_back(kInterceptName);
        for (const auto& t : terms) names.push_back(t.label());
        for (const auto& in : interactions) names.push_back(interaction_label(in));
        return names;
    }

    std::size_t column_count() const { return (intercept ? 1 : 0) + terms.size() + interactions.size(); }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline nlohmann::json to_json(const Term& t) {
    return {{"variable", t.variable}, {"transform", std::string(t.transform.name())}};
}

inline Term term_from_json(const nlohmann::json& j) {
    if (j.is_string()) return {j.get<std::string>(), Transformation::identity()};
    return {j.at("variable").get<std::string>(), Transformation::parse(j.value("transform", std::string("identity")))};
}

inline nlohmann::json to_json(const ModelSpec& s) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : s.terms) terms.push_back(to_json(t));
    nlohmann::json inter = nlohmann::json::array();
    for (const auto& in : s.interactions) inter.push_back(nlohmann::json::array({in.left, in.right}));
    return {{"response", to_json(s.response)}, {"terms", terms},       {"interactions", inter},
            {"grouping", s.grouping},          {"intercept", s.intercept}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
    try {
        ModelSpec s;
        s.response = term_from_json(j.at("response"));
        if (j.contains("terms")) {
            for (const auto& t : j.at("terms")) s.terms.push_back(term_from_json(t));
        }
        if (j.contains("interactions")) {
            for (const auto& in : j.at("interactions")) {
                if (in.is_array() && in.size() == 2) {
                    s.interactions.push_back({in[0].get<std::string>(), in[1].get<std::string>()});
                } else {
                    s.interactions.push_back({in.at("left").get<std::string>(), in.at("right").get<std::string>()});
                }
            }
        }
        s.grouping = j.value("grouping", std::string("country"));
        s.intercept = j.value("intercept", true);
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid model spec: ") + e.what());
    }
}

}  // namespace refcast::lmm
