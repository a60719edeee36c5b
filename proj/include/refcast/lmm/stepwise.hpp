#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/lmm/design.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/spec.hpp"

namespace refcast::lmm {

inline constexpr double kStepwiseTieTolerance = 1e-12;

struct StepwiseOptions {
    double alpha = 0.05;
    FitOptions fit{};
};

struct EliminationStep {
    std::size_t step = 0;
    std::string term;
    double p_value = 0.0;
    bool tie_broken = false;  // another eligible term had the same p within tolerance
    std::vector<std::string> tied_with;
};

struct StepwiseResult {
    ModelSpec spec;
    std::vector<EliminationStep> trace;
    std::vector<std::string> warnings;
};

using DesignBuilder = std::function<Design(const ModelSpec&)>;

/// Backward elimination. Each round fits the current spec and removes the
/// eligible term with the largest p-value above alpha. An interaction is
/// always eligible; a main effect is eligible only once no surviving
/// interaction uses it. Ties (p within 1e-12) go to the later declaration,
/// with main effects declared before interactions.
inline StepwiseResult stepwise(const ModelSpec& candidates, const DesignBuilder& build,
                               const StepwiseOptions& options = {}) {
    candidates.validate();
    if (candidates.terms.empty() && candidates.interactions.empty()) {
        throw ModelError("stepwise selection needs at least one candidate term");
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");

    StepwiseResult result;
    std::vector<bool> term_alive(candidates.terms.size(), true);
    std::vector<bool> inter_alive(candidates.interactions.size(), true);

    auto current_spec = [&] {
        ModelSpec s = candidates;
        s.terms.clear();
        s.interactions.clear();
        for (std::size_t i = 0; i < candidates.terms.size(); ++i) {
            if (term_alive[i]) s.terms.push_back(candidates.terms[i]);
        }
        for (std::size_t k = 0; k < candidates.interactions.size(); ++k) {
            if (inter_alive[k]) s.interactions.push_back(candidates.interactions[k]);
        }
        return s;
    };

    for (std::size_t step = 1;; ++step) {
        const ModelSpec spec = current_spec();
        if (spec.terms.empty() && spec.interactions.empty()) {
            result.spec = spec;
            result.warnings.emplace_back("all candidate terms eliminated; returning intercept-only model");
            return result;
        }
        const Design design = build(spec);
        const FittedModel fm = fit(design, spec, options.fit);

        struct Candidate {
            std::string label;
            double p;
            std::size_t order;  // declaration order, mains first
            bool interaction;
            std::size_t index;
        };
        std::vector<Candidate> eligible;
        const std::size_t offset = spec.intercept ? 1 : 0;
        std::size_t col = offset;
        for (std::size_t i = 0; i < candidates.terms.size(); ++i) {
            if (!term_alive[i]) continue;
            bool protected_main = false;
            for (std::size_t k = 0; k < candidates.interactions.size(); ++k) {
                if (!inter_alive[k]) continue;
                const auto& in = candidates.interactions[k];
                if (candidates.find_term(in.left) == i || candidates.find_term(in.right) == i) protected_main = true;
            }
            if (!protected_main) {
                eligible.push_back({candidates.terms[i].label(), fm.p_values(static_cast<Eigen::Index>(col)), i,
                                    false, i});
            }
            ++col;
        }
        for (std::size_t k = 0; k < candidates.interactions.size(); ++k) {
            if (!inter_alive[k]) continue;
            eligible.push_back({candidates.interaction_label(candidates.interactions[k]),
                                fm.p_values(static_cast<Eigen::Index>(col)), candidates.terms.size() + k, true, k});
            ++col;
        }

        const Candidate* worst = nullptr;
        for (const auto& c : eligible) {
            if (!(c.p > options.alpha)) continue;
            if (worst == nullptr || c.p > worst->p + kStepwiseTieTolerance ||
                (std::abs(c.p - worst->p) <= kStepwiseTieTolerance && c.order > worst->order)) {
                worst = &c;
            }
        }
        if (worst == nullptr) {
            result.spec = spec;
            return result;
        }

        EliminationStep entry{step, worst->label, worst->p, false, {}};
        for (const auto& c : eligible) {
            if (&c != worst && c.p > options.alpha && std::abs(c.p - worst->p) <= kStepwiseTieTolerance) {
                entry.tie_broken = true;
                entry.tied_with.push_back(c.label);
            }
        }
        result.trace.push_back(std::move(entry));
        if (worst->interaction) {
            inter_alive[worst->index] = false;
        } else {
            term_alive[worst->index] = false;
        }
    }
}

inline StepwiseResult stepwise(const ReferenceClass& rc, const MacroMap& macro, const ModelSpec& candidates,
                               const StepwiseOptions& options = {}) {
    return stepwise(
        candidates, [&](const ModelSpec& s) { return build_design(rc, macro, s); }, options);
}

inline nlohmann::json to_json(const StepwiseResult& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : r.trace) {
        trace.push_back({{"step", s.step},
                         {"dropped", s.term},
                         {"p_value", s.p_value},
                         {"tie_broken", s.tie_broken},
                         {"tied_with", s.tied_with}});
    }
    return {{"spec", to_json(r.spec)}, {"trace", trace}, {"warnings", r.warnings}};
}

}  // namespace refcast::lmm
