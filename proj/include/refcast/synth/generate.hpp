#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "refcast/error.hpp"
#include "refcast/lmm/design.hpp"
#include "refcast/lmm/spec.hpp"
#include "refcast/refdata/countries.hpp"
#include "refcast/refdata/macro.hpp"
#include "refcast/refdata/types.hpp"
#include "refcast/synth/rng.hpp"

namespace refcast::synth {

enum class CovariateKind { uniform, log_uniform, normal, lognormal, bernoulli };

/// Draw recipe for one covariate: uniform(a, b), log_uniform(a, b),
/// normal(mean a, sd b), lognormal(meanlog a, sdlog b) or bernoulli(p a).
struct CovariateGen {
    CovariateKind kind = CovariateKind::uniform;
    double a = 0.0;
    double b = 1.0;

    void validate(const std::string& variable) const {
        bool degenerate = false;
        switch (kind) {
            case CovariateKind::uniform: degenerate = !(b > a); break;
            case CovariateKind::log_uniform:
                if (!(a > 0.0)) throw ModelError(variable + ": log_uniform needs a lower bound > 0");
                degenerate = !(b > a);
                break;
            case CovariateKind::normal:
            case CovariateKind::lognormal: degenerate = !(b > 0.0); break;
            case CovariateKind::bernoulli: degenerate = !(a > 0.0 && a < 1.0); break;
        }
        if (degenerate) throw ModelError("degenerate covariate generator for '" + variable + "' (zero variance)");
    }

    double draw(Stream& s) const {
        switch (kind) {
            case CovariateKind::uniform: return s.uniform(a, b);
            case CovariateKind::log_uniform: return std::exp(s.uniform(std::log(a), std::log(b)));
            case CovariateKind::normal: return s.normal(a, b);
            case CovariateKind::lognormal: return std::exp(s.normal(a, b));
            case CovariateKind::bernoulli: return s.bernoulli(a) ? 1.0 : 0.0;
        }
        return 0.0;
    }
};

struct SynthTerm {
    lmm::Term term;
    CovariateGen gen;
    double beta = 0.0;
};

/// Overrun factor distribution used when cost overrun is not the modelled
/// response: lognormal(mu, sigma), or with probability `weight` a Pareto
/// draw scale * U^(-1/alpha) instead.
struct TailSpec {
    enum class Kind { lognormal, pareto_mix };
    Kind kind = Kind::lognormal;
    double mu = 0.1025;
    double sigma = 0.7475;
    double weight = 0.0;
    double alpha = 2.0;
    double scale = 2.0;

    double draw(Stream& s) const {
        if (kind == Kind::pareto_mix && s.uniform() < weight) {
            return scale * std::pow(1.0 - s.uniform(), -1.0 / alpha);
        }
        return std::exp(s.normal(mu, sigma));
    }
};

// Country-level variables are drawn once per country and written into that
// country's macro series; everything else is drawn per project.
inline constexpr std::string_view kCountryLevelVariables[] = {"long_term_inflation_pct", "per_capita_income_2000usd",
                                                              "democracy"};
inline constexpr std::string_view kProjectLevelVariables[] = {
    "estimated_schedule_months", "wall_height_m",       "wall_length_m",   "installed_capacity_mw",
    "unit_capacity_mw",          "reservoir_area_ha",   "tunnel_length_km", "fx_cost_share_pct",
    "icb_share_pct",             "inflation_contingency_pct", "estimated_bcr"};

inline bool is_country_level(std::string_view v) {
    for (auto c : kCountryLevelVariables) {
        if (c == v) return true;
    }
    return false;
}

inline bool is_project_level(std::string_view v) {
    for (auto c : kProjectLevelVariables) {
        if (c == v) return true;
    }
    return false;
}

struct SynthSpec {
    std::size_t n_countries = 60;
    std::size_t projects_min = 4;
    std::size_t projects_max = 4;
    lmm::Term response{"cost_overrun", stats::Transformation::log()};
    double intercept = 1.4;
    std::vector<SynthTerm> terms;
    double sigma2_group = 0.01;
    double sigma2_resid = 0.04;
    TailSpec overrun_tail{};
    std::uint64_t seed = 1;
    int year_from = 1950;
    int year_to = 2010;

    void validate() const {
        if (n_countries == 0) throw ModelError("synth: n_countries must be >= 1");
        if (n_countries > refdata::kCountryTable.size()) {
            throw ModelError("synth: at most " + std::to_string(refdata::kCountryTable.size()) + " countries");
        }
        if (projects_min == 0 || projects_max < projects_min) throw ModelError("synth: invalid projects per country");
        if (sigma2_group < 0.0 || sigma2_resid < 0.0) throw ModelError("synth: variances must be >= 0");
        if (year_to - year_from < 30) throw ModelError("synth: year span must cover at least 30 years");
        if (response.variable != "cost_overrun" && response.variable != "schedule_slippage") {
            throw ModelError("synth: response must be cost_overrun or schedule_slippage");
        }
        for (const auto& t : terms) {
            if (!is_country_level(t.term.variable) && !is_project_level(t.term.variable)) {
                throw ModelError("synth: cannot generate variable '" + t.term.variable + "'");
            }
            t.gen.validate(t.term.variable);
        }
    }
};

/// Parameters behind a generated dataset.
struct Truth {
    std::string generator = kGeneratorName;
    std::uint64_t seed = 0;
    lmm::Term response;
    std::vector<std::string> column_names;  // intercept first
    std::vector<double> beta;
    double sigma2_group = 0.0;
    double sigma2_resid = 0.0;
    std::map<std::string, double> country_effects;
    std::map<std::string, double> project_errors;  // residual draw per record id
};

struct SynthDataset {
    refdata::ReferenceClass reference;
    refdata::MacroMap macro;
    Truth truth;
};

struct CountryMacroParams {
    double inflation_pct = 5.0;
    double noise_sd = 0.0;  // on the log deflator
    double income = 2000.0;
    int polity2 = 8;
};

/// Geometric deflator path at the given drift, with optional lognormal
/// noise; income flat, polity constant, FX and MUV on fixed trends.
inline refdata::CountryMacroSeries build_country_macro(const std::string& country, int year_from, int year_to,
                                                       const CountryMacroParams& p, Stream* noise) {
    refdata::CountryMacroSeries s;
    s.country = country;
    const double log_drift = std::log1p(p.inflation_pct / 100.0);
    for (int y = year_from; y <= year_to; ++y) {
        const double t = static_cast<double>(y - year_from);
        double log_d = log_drift * t;
        if (noise != nullptr && p.noise_sd > 0.0) log_d += noise->normal(0.0, p.noise_sd);
        const double deflator = std::exp(log_d);
        s.deflator[y] = deflator;
        s.fx_rate_lcu_per_usd[y] = std::exp(log_drift * t * 0.8);
        s.per_capita_income_const2000usd[y] = p.income;
        s.gdp_nominal_usd[y] = p.income * 1e7 * std::exp(0.03 * t);
        s.polity2[y] = p.polity2;
        s.muv_index[y] = std::exp(0.025 * t);
    }
    return s;
}

struct MacroSpec {
    std::size_t n_countries = 2;
    int year_from = 1960;
    int year_to = 2000;
    std::vector<double> regimes_pct{5.0};  // country c gets regimes_pct[c % size]
    double noise_sd = 0.0;
    std::uint64_t seed = 1;
};

/// Country macro series for the first `n_countries` codes of the country
/// table.
inline refdata::MacroMap gen_macro_series(const MacroSpec& spec) {
    if (spec.year_to - spec.year_from < 1) throw ModelError("macro span must cover at least 2 years");
    if (spec.regimes_pct.empty()) throw ModelError("at least one inflation regime is required");
    if (spec.n_countries > refdata::kCountryTable.size()) throw ModelError("too many countries");
    refdata::MacroMap out;
    for (std::size_t c = 0; c < spec.n_countries; ++c) {
        Stream s(spec.seed, {4, c});
        CountryMacroParams p;
        p.inflation_pct = spec.regimes_pct[c % spec.regimes_pct.size()];
        p.noise_sd = spec.noise_sd;
        p.income = std::exp(s.uniform(std::log(300.0), std::log(40000.0)));
        p.polity2 = static_cast<int>(s.uniform_int(-10, 10));
        const std::string code(refdata::kCountryTable[c].code);
        out.emplace(code, build_country_macro(code, spec.year_from, spec.year_to, p, &s));
    }
    return out;
}

namespace detail {

struct CountryOutput {
    std::vector<refdata::DamRecord> records;
    refdata::CountryMacroSeries macro;
    double effect = 0.0;
    std::vector<std::pair<std::string, double>> errors;
    std::exception_ptr failure;
};

inline void set_project_field(refdata::DamRecord& r, std::string_view variable, double v) {
    if (variable == "estimated_schedule_months") r.estimated_schedule_months = v;
    else if (variable == "wall_height_m") r.wall_height_m = v;
    else if (variable == "wall_length_m") r.wall_length_m = v;
    else if (variable == "installed_capacity_mw") r.installed_capacity_mw = v;
    else if (variable == "unit_capacity_mw") r.unit_capacity_mw = v;
    else if (variable == "reservoir_area_ha") r.reservoir_area_ha = v;
    else if (variable == "tunnel_length_km") r.tunnel_length_km = v;
    else if (variable == "fx_cost_share_pct") r.fx_cost_share_pct = v;
    else if (variable == "icb_share_pct") r.icb_share_pct = v;
    else if (variable == "inflation_contingency_pct") r.inflation_contingency_pct = v;
    else if (variable == "estimated_bcr") r.estimated_bcr = v;
}

inline CountryOutput generate_country(const SynthSpec& spec, std::size_t c) {
    CountryOutput out;
    const auto& entry = refdata::kCountryTable[c];
    const std::string code(entry.code);
    Stream cs(spec.seed, {1, c});

    const auto n_projects = static_cast<std::size_t>(
        cs.uniform_int(static_cast<long>(spec.projects_min), static_cast<long>(spec.projects_max)));
    out.effect = spec.sigma2_group > 0.0 ? cs.normal(0.0, std::sqrt(spec.sigma2_group)) : 0.0;

    CountryMacroParams mp;
    mp.inflation_pct = 5.0;
    mp.income = 2000.0;
    mp.polity2 = 8;
    for (const auto& t : spec.terms) {
        if (!is_country_level(t.term.variable)) continue;
        const double v = t.gen.draw(cs);
        if (t.term.variable == "long_term_inflation_pct") {
            if (!(v > -100.0)) throw ModelError("synth: long-term inflation draw <= -100%");
            mp.inflation_pct = v;
        } else if (t.term.variable == "per_capita_income_2000usd") {
            if (!(v > 0.0)) throw ModelError("synth: per-capita income draw must be > 0");
            mp.income = v;
        } else {
            mp.polity2 = v != 0.0 ? 8 : -5;
        }
    }
    out.macro = build_country_macro(code, spec.year_from, spec.year_to, mp, nullptr);
    const refdata::MacroMap local{{code, out.macro}};
    const lmm::VariableResolver resolver(local);
    const double sd_e = std::sqrt(spec.sigma2_resid);

    for (std::size_t k = 0; k < n_projects; ++k) {
        Stream ps(spec.seed, {2, c, k});
        refdata::DamRecord r;
        char id[32];
        std::snprintf(id, sizeof id, "%s-%03zu", code.c_str(), k + 1);
        r.id = id;
        r.name = "synthetic " + code + " " + std::to_string(k + 1);
        r.country = code;
        r.region = entry.region;
        r.project_type = refdata::ProjectType::hydropower;
        r.is_hydropower = true;
        r.is_new_station = true;
        r.currency = "LCU";
        r.year_decision = static_cast<int>(ps.uniform_int(spec.year_from, spec.year_to - 30));
        r.base_year = r.year_decision;
        r.estimated_cost = std::exp(ps.normal(std::log(500.0), 1.0));
        r.estimated_schedule_months = ps.uniform(36.0, 120.0);
        r.wall_height_m = ps.uniform(20.0, 200.0);
        r.wall_length_m = std::exp(ps.uniform(std::log(100.0), std::log(3000.0)));
        r.installed_capacity_mw = std::exp(ps.uniform(std::log(10.0), std::log(3000.0)));
        for (const auto& t : spec.terms) {
            if (is_project_level(t.term.variable)) set_project_field(r, t.term.variable, t.gen.draw(ps));
        }
        if (!(r.estimated_schedule_months > 0.0) || !(r.wall_height_m > 0.0)) {
            throw ModelError("synth: schedule and wall height draws must be > 0");
        }
        for (const auto* pct : {&r.fx_cost_share_pct, &r.icb_share_pct}) {
            if (*pct && (**pct < 0.0 || **pct > 100.0)) throw ModelError("synth: percentage draw outside [0, 100]");
        }

        double eta = spec.intercept + out.effect;
        for (const auto& t : spec.terms) {
            const auto v = resolver.resolve(r, t.term.variable);
            if (!v.value) throw ModelError("synth: " + v.reason);
            if (!t.term.transform.in_domain(*v.value)) {
                throw ModelError("synth: " + t.term.label() + " undefined for generated value " +
                                 std::to_string(*v.value));
            }
            eta += t.beta * t.term.transform.forward(*v.value);
        }
        const double e = sd_e > 0.0 ? ps.normal(0.0, sd_e) : 0.0;
        eta += e;
        if (!spec.response.transform.in_range(eta)) {
            throw ModelError("synth: generated " + spec.response.label() + " = " + std::to_string(eta) +
                             " lies outside the response domain; choose a log response or smaller variances");
        }
        const double response = spec.response.transform.inverse(eta);
        double cost_overrun = 0.0;
        double slippage = 0.0;
        if (spec.response.variable == "cost_overrun") {
            cost_overrun = response;
            slippage = std::exp(ps.normal(0.2, 0.25));
        } else {
            cost_overrun = spec.overrun_tail.draw(ps);
            slippage = response;
        }
        r.actual_cost = r.estimated_cost * cost_overrun;
        r.actual_schedule_months = r.estimated_schedule_months * slippage;
        r.year_completion = r.year_decision + static_cast<int>(std::lround(*r.actual_schedule_months / 12.0));
        out.errors.emplace_back(r.id, e);
        out.records.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

/// Records and macro series from the random-intercept data-generating
/// process in `spec`. Each country draws from its own stream, so output is
/// identical for any `threads` value.
inline SynthDataset gen_reference_class(const SynthSpec& spec, unsigned threads = 1) {
    spec.validate();
    std::vector<detail::CountryOutput> parts(spec.n_countries);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t c = first; c < spec.n_countries; c += stride) {
            try {
                parts[c] = detail::generate_country(spec, c);
            } catch (...) {
                parts[c].failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }

    Truth truth;
    truth.seed = spec.seed;
    truth.response = spec.response;
    truth.column_names.emplace_back(lmm::kInterceptName);
    truth.beta.push_back(spec.intercept);
    for (const auto& t : spec.terms) {
        truth.column_names.push_back(t.term.label());
        truth.beta.push_back(t.beta);
    }
    truth.sigma2_group = spec.sigma2_group;
    truth.sigma2_resid = spec.sigma2_resid;

    std::vector<refdata::DamRecord> records;
    refdata::MacroMap macro;
    for (auto& part : parts) {
        if (part.failure) std::rethrow_exception(part.failure);
        const std::string code = part.macro.country;
        truth.country_effects[code] = part.effect;
        for (auto& [id, e] : part.errors) truth.project_errors[id] = e;
        for (auto& r : part.records) records.push_back(std::move(r));
        macro.emplace(code, std::move(part.macro));
    }
    return {refdata::ReferenceClass(std::move(records), "synthetic (" + std::string(kGeneratorName) + ", seed " +
                                                            std::to_string(spec.seed) + ")"),
            std::move(macro), std::move(truth)};
}

/// The model the generator draws from, ready for lmm::fit.
inline lmm::ModelSpec model_spec(const SynthSpec& spec) {
    lmm::ModelSpec m;
    m.response = spec.response;
    for (const auto& t : spec.terms) m.terms.push_back(t.term);
    return m;
}

/// 60 countries x 4 projects, log cost overrun on log estimated duration and
/// log long-term inflation with beta = (1.4, -0.1, -0.085).
inline SynthSpec default_cost_spec(std::uint64_t seed = 1) {
    SynthSpec s;
    s.seed = seed;
    s.terms = {
        {{"estimated_schedule_months", stats::Transformation::log()}, {CovariateKind::log_uniform, 12.0, 240.0}, -0.100},
        {{"long_term_inflation_pct", stats::Transformation::log()}, {CovariateKind::log_uniform, 1.0, 40.0}, -0.085},
    };
    return s;
}

}  // namespace refcast::synth
