#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "refcast/error.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/predict.hpp"
#include "refcast/lmm/stepwise.hpp"
#include "refcast/papermodels/forecast.hpp"
#include "refcast/papermodels/published.hpp"
#include "refcast/rcf/benchmarks.hpp"
#include "refcast/rcf/fixtures.hpp"
#include "refcast/rcf/uplift.hpp"
#include "refcast/refdata/csv.hpp"
#include "refcast/refdata/ingest.hpp"
#include "refcast/refdata/macro.hpp"
#include "refcast/stats/distribution.hpp"
#include "refcast/stats/kde.hpp"
#include "refcast/stats/rank_tests.hpp"
#include "refcast/synth/calibrate.hpp"
#include "refcast/synth/generate.hpp"

#ifndef REFCAST_DEFAULT_FIXTURE_DIR
#define REFCAST_DEFAULT_FIXTURE_DIR "data"
#endif

namespace refcast::cli {

enum class Format { text, json, csv };

inline Format parse_format(const std::string& s) {
    if (s == "text") return Format::text;
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw InputError("unknown format '" + s + "' (expected text, json or csv)");
}

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitModel = 3 };

struct GlobalOptions {
    Format format = Format::text;
    std::optional<std::string> out;
    std::uint64_t seed = 1;
    bool strict = false;
};

/// Fixture directory: REFCAST_FIXTURES when set, otherwise the data
/// directory the project was configured with.
inline std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("REFCAST_FIXTURES"); env != nullptr && *env != '\0') return env;
    return REFCAST_DEFAULT_FIXTURE_DIR;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

inline nlohmann::json read_fixture(const std::string& name) { return read_json(fixture_dir() / name); }

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Writes `content` to --out when given, otherwise to `out`.
inline void emit(const GlobalOptions& g, std::ostream& out, const std::string& content) {
    if (g.out) {
        std::ofstream f(*g.out, std::ios::binary);
        if (!f) throw InputError("cannot write '" + *g.out + "'");
        f << content;
        if (!f) throw InputError("write failed for '" + *g.out + "'");
    } else {
        out << content;
    }
}

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline refdata::IngestResult load_reference(const std::string& path, bool strict, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    try {
        auto result = refdata::ingest_reference_csv(in, strict);
        for (const auto& d : result.diagnostics) err << refdata::format(d) << "\n";
        return result;
    } catch (const refdata::IngestFailure& e) {
        for (const auto& d : e.diagnostics) err << refdata::format(d) << "\n";
        throw;
    }
}

inline refdata::MacroMap load_macro(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    return refdata::ingest_macro_csv(in);
}

inline rcf::ReferenceDistributions builtin_distributions() {
    return rcf::distributions_from_json(read_fixture("paper_summary.json"));
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string refclass;
    std::optional<std::string> macro;
};

inline int cmd_ingest(const GlobalOptions& g, const IngestArgs& a, std::ostream& out, std::ostream& err) {
    const auto result = load_reference(a.refclass, g.strict, err);
    std::size_t warnings = 0;
    std::size_t rejected = 0;
    for (const auto& d : result.diagnostics) (d.severity == refdata::Severity::error ? rejected : warnings)++;
    std::optional<refdata::MacroMap> macro;
    if (a.macro) macro = load_macro(*a.macro);

    if (g.format == Format::csv) {
        std::ostringstream ss;
        refdata::write_reference_csv(ss, result.reference);
        emit(g, out, ss.str());
        return kExitOk;
    }
    if (g.format == Format::json) {
        nlohmann::json diags = nlohmann::json::array();
        for (const auto& d : result.diagnostics) {
            diags.push_back({{"row", d.row},
                             {"dam_id", d.dam_id},
                             {"severity", std::string(refdata::to_string(d.severity))},
                             {"message", d.message}});
        }
        nlohmann::json j{{"records", result.reference.records().size()},
                         {"observations", result.reference.observations().size()},
                         {"rejected", rejected},
                         {"warnings", warnings},
                         {"diagnostics", diags}};
        if (macro) j["macro_countries"] = macro->size();
        emit(g, out, dump(j));
        return kExitOk;
    }
    std::string s = "records: " + std::to_string(result.reference.records().size()) + "\n" +
                    "observations: " + std::to_string(result.reference.observations().size()) + "\n" +
                    "rejected rows: " + std::to_string(rejected) + "\n" + "warnings: " + std::to_string(warnings) + "\n";
    if (macro) s += "macro countries: " + std::to_string(macro->size()) + "\n";
    emit(g, out, s);
    return kExitOk;
}

// ---------------------------------------------------------------- describe

struct DescribeArgs {
    std::optional<std::string> refclass;
    bool builtin = false;
    std::optional<std::string> density_out;
    std::size_t density_points = 512;
};

struct GroupSummary {
    std::string label;
    std::size_t n = 0;
    stats::Summary cost;
    double over_budget = 0.0;
    double over_schedule = 0.0;
    double above_2 = 0.0;
    double above_3 = 0.0;
};

inline GroupSummary summarize_group(const std::string& label, const stats::EmpiricalDistribution& cost,
                                    const stats::EmpiricalDistribution& schedule) {
    GroupSummary s;
    s.label = label;
    s.n = cost.size();
    s.cost = stats::summarize(cost);
    s.over_budget = stats::fraction_above(cost, 1.0);
    s.over_schedule = stats::fraction_above(schedule, 1.0);
    s.above_2 = stats::fraction_above(cost, 2.0);
    s.above_3 = stats::fraction_above(cost, 3.0);
    return s;
}

inline nlohmann::json to_json(const GroupSummary& s) {
    return {{"n", s.n},
            {"mean_cost_overrun", s.cost.mean},
            {"median_cost_overrun", s.cost.median},
            {"iqr_cost_overrun", s.cost.iqr},
            {"fraction_over_budget", s.over_budget},
            {"fraction_over_schedule", s.over_schedule},
            {"fraction_above_2x", s.above_2},
            {"fraction_above_3x", s.above_3}};
}

inline int cmd_describe(const GlobalOptions& g, const DescribeArgs& a, std::ostream& out, std::ostream& err) {
    std::string source;
    GroupSummary all;
    std::vector<GroupSummary> regions;
    std::vector<double> cost_sample;
    std::optional<std::string> small_sample;
    if (a.builtin) {
        const auto d = builtin_distributions();
        source = d.source;
        all = summarize_group("all", d.cost, d.schedule);
        cost_sample.assign(d.cost.sample().begin(), d.cost.sample().end());
        small_sample = stats::small_sample_warning(d.cost);
    } else {
        if (!a.refclass) throw InputError("describe needs a reference-class CSV or --builtin");
        const auto result = load_reference(*a.refclass, g.strict, err);
        const auto& rc = result.reference;
        if (rc.observations().empty()) throw InputError("empty reference class: no record has both outcomes");
        source = rc.filter_description();
        const auto cost = rc.cost_overruns();
        all = summarize_group("all", cost, rc.schedule_slippages());
        cost_sample.assign(cost.sample().begin(), cost.sample().end());
        small_sample = stats::small_sample_warning(cost);
        for (auto region : refdata::kAllRegions) {
            const auto in_region = [&](const refdata::DamRecord& r) { return r.region == region; };
            if (std::none_of(rc.records().begin(), rc.records().end(), in_region)) continue;
            const auto sub = rc.filter(in_region, std::string(refdata::to_string(region)));
            if (sub.observations().empty()) continue;
            regions.push_back(
                summarize_group(std::string(refdata::to_string(region)), sub.cost_overruns(), sub.schedule_slippages()));
        }
    }
    if (small_sample) err << "warning: " << *small_sample << "\n";

    std::optional<stats::TestResult> bias;
    try {
        bias = stats::signed_rank_vs_reference(cost_sample, 1.0, stats::Alternative::greater);
    } catch (const DomainError&) {
    }

    if (a.density_out) {
        std::ofstream f(*a.density_out);
        if (!f) throw InputError("cannot write '" + *a.density_out + "'");
        const auto pts = stats::kde_density(cost_sample, a.density_points);
        stats::write_density_csv(f, pts);
    }

    if (g.format == Format::json) {
        nlohmann::json j = to_json(all);
        j["source"] = source;
        nlohmann::json reg = nlohmann::json::object();
        for (const auto& r : regions) reg[r.label] = to_json(r);
        j["regions"] = reg;
        if (bias) {
            j["signed_rank_vs_1"] = {{"statistic", bias->statistic},
                                     {"p_value", bias->p_value},
                                     {"method", bias->method},
                                     {"alternative", stats::to_string(bias->alternative)}};
        }
        if (small_sample) j["warning"] = *small_sample;
        emit(g, out, dump(j));
        return kExitOk;
    }
    if (g.format == Format::csv) {
        std::ostringstream ss;
        refdata::csv::write_row(ss, {"group", "n", "mean_cost_overrun", "median_cost_overrun", "iqr_cost_overrun",
                                     "fraction_over_budget", "fraction_over_schedule", "fraction_above_2x",
                                     "fraction_above_3x"});
        auto row = [&](const GroupSummary& s) {
            using refdata::csv::format_double;
            refdata::csv::write_row(ss, {s.label, std::to_string(s.n), format_double(s.cost.mean),
                                         format_double(s.cost.median), format_double(s.cost.iqr),
                                         format_double(s.over_budget), format_double(s.over_schedule),
                                         format_double(s.above_2), format_double(s.above_3)});
        };
        row(all);
        for (const auto& r : regions) row(r);
        emit(g, out, ss.str());
        return kExitOk;
    }
    std::ostringstream ss;
    ss << "reference class: " << source << "\n"
       << "n: " << all.n << "\n"
       << "mean cost overrun: " << num(all.cost.mean) << "\n"
       << "median cost overrun: " << num(all.cost.median) << "\n"
       << "iqr cost overrun: " << num(all.cost.iqr) << "\n"
       << "fraction over budget: " << num(all.over_budget) << "\n"
       << "fraction over schedule: " << num(all.over_schedule) << "\n"
       << "fraction above 2x budget: " << num(all.above_2) << "\n"
       << "fraction above 3x budget: " << num(all.above_3) << "\n";
    if (bias) {
        ss << "signed-rank vs 1.0 (greater): W+ = " << num(bias->statistic) << ", p = " << num(bias->p_value) << " ("
           << bias->method << ")\n";
    }
    if (!regions.empty()) {
        char buf[160];
        ss << "\nper region:\n";
        std::snprintf(buf, sizeof buf, "  %-22s %5s %10s %10s %12s %14s\n", "region", "n", "mean", "median",
                      "over budget", "over schedule");
        ss << buf;
        for (const auto& r : regions) {
            std::snprintf(buf, sizeof buf, "  %-22s %5zu %10.4f %10.4f %12.4f %14.4f\n", r.label.c_str(), r.n,
                          r.cost.mean, r.cost.median, r.over_budget, r.over_schedule);
            ss << buf;
        }
    }
    emit(g, out, ss.str());
    return kExitOk;
}

// ---------------------------------------------------------------- rcf

struct RcfArgs {
    std::optional<std::string> refclass;
    bool builtin = false;
    std::string variable = "cost";  // cost | schedule
    double step = 0.01;
    std::vector<double> risks;
};

inline int cmd_rcf(const GlobalOptions& g, const RcfArgs& a, std::ostream& out, std::ostream& err) {
    if (a.variable != "cost" && a.variable != "schedule") {
        throw InputError("--variable must be cost or schedule");
    }
    std::optional<stats::EmpiricalDistribution> dist;
    std::string source;
    if (a.builtin) {
        auto d = builtin_distributions();
        dist = a.variable == "cost" ? d.cost : d.schedule;
        source = d.source;
    } else {
        if (!a.refclass) throw InputError("rcf needs a reference-class CSV or --builtin");
        const auto result = load_reference(*a.refclass, g.strict, err);
        dist = a.variable == "cost" ? result.reference.cost_overruns() : result.reference.schedule_slippages();
        source = result.reference.filter_description();
    }
    if (const auto w = stats::small_sample_warning(*dist)) err << "warning: " << *w << "\n";
    const rcf::UpliftCurve curve(*dist);
    std::vector<rcf::UpliftPoint> points;
    if (a.risks.empty()) {
        points = curve.tabulate(a.step);
    } else {
        for (double p : a.risks) points.push_back({p, curve.evaluate(p)});
    }

    if (g.format == Format::json) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : points) pts.push_back({{"acceptable_risk", p.acceptable_risk}, {"uplift_pct", p.uplift * 100.0}});
        emit(g, out, dump({{"variable", a.variable}, {"source", source}, {"n", dist->size()}, {"curve", pts}}));
    } else if (g.format == Format::csv) {
        std::ostringstream ss;
        rcf::write_uplift_csv(ss, points);
        emit(g, out, ss.str());
    } else {
        std::ostringstream ss;
        ss << "required " << a.variable << " uplift (" << source << ", n = " << dist->size() << ")\n";
        char buf[96];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof buf, "  risk %5.2f  uplift %8.2f%%\n", p.acceptable_risk, p.uplift * 100.0);
            ss << buf;
        }
        emit(g, out, ss.str());
    }
    return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string refclass;
    std::string macro;
    std::string spec;
    std::string method = "reml";
    bool stepwise = false;
    double alpha = 0.05;
};

inline int cmd_fit(const GlobalOptions& g, const FitArgs& a, std::ostream& out, std::ostream& err) {
    const auto result = load_reference(a.refclass, g.strict, err);
    const auto macro = load_macro(a.macro);
    auto spec = lmm::spec_from_json(read_json(a.spec));
    lmm::FitOptions fo;
    fo.method = lmm::parse_method(a.method);

    nlohmann::json stepwise_json;
    if (a.stepwise) {
        lmm::StepwiseOptions so;
        so.alpha = a.alpha;
        so.fit = fo;
        const auto sw = lmm::stepwise(result.reference, macro, spec, so);
        for (const auto& w : sw.warnings) err << "warning: " << w << "\n";
        stepwise_json = lmm::to_json(sw);
        spec = sw.spec;
    }
    const auto design = lmm::build_design(result.reference, macro, spec);
    for (const auto& d : design.dropped) err << "dropped row " << d.row + 1 << " (" << d.id << "): " << d.reason << "\n";
    const auto fm = lmm::fit(design, spec, fo);
    for (const auto& w : fm.warnings) err << "warning: " << w << "\n";

    nlohmann::json j = lmm::to_json(fm);
    if (a.stepwise) j["stepwise"] = stepwise_json;

    if (g.format == Format::json) {
        emit(g, out, dump(j));
        return kExitOk;
    }
    std::string body;
    if (g.format == Format::csv) {
        std::ostringstream ss;
        refdata::csv::write_row(ss, {"term", "coefficient", "std_error", "t", "p_value"});
        for (Eigen::Index k = 0; k < fm.beta.size(); ++k) {
            using refdata::csv::format_double;
            refdata::csv::write_row(ss, {fm.names[static_cast<std::size_t>(k)], format_double(fm.beta(k)),
                                         format_double(fm.se(k)), format_double(fm.t_stats(k)),
                                         format_double(fm.p_values(k))});
        }
        body = ss.str();
    } else {
        body = lmm::format_table(fm);
        if (a.stepwise) {
            body += "\nstepwise elimination (alpha " + num(a.alpha) + "):\n";
            for (const auto& s : stepwise_json.at("trace")) {
                body += "  step " + std::to_string(s.at("step").get<int>()) + ": dropped " +
                        s.at("dropped").get<std::string>() + " (p = " + num(s.at("p_value").get<double>()) + ")";
                if (s.at("tie_broken").get<bool>()) body += " [tie broken by declaration order]";
                body += "\n";
            }
        }
    }
    if (g.out) {
        // --out always receives the serialized model; the table goes to stdout.
        emit(g, out, dump(j));
        out << body;
    } else {
        out << body;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::optional<std::string> model;      // FittedModel JSON
    std::optional<std::string> published;  // M1..M4
    std::optional<std::string> values;     // JSON object of raw variable values / descriptor
    std::optional<std::string> group;
    bool surface = false;
    std::vector<double> surface_inflation{2.0, 5.0, 8.0, 15.0, 30.0};
};

inline int cmd_predict(const GlobalOptions& g, const PredictArgs& a, std::ostream& out, std::ostream&) {
    if (a.surface) {
        const auto pts = papermodels::m1_surface(12.0, 240.0, 6.0, a.surface_inflation);
        if (g.format == Format::json) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& p : pts) {
                arr.push_back({{"estimated_schedule_months", p.estimated_schedule_months},
                               {"long_term_inflation_pct", p.long_term_inflation_pct},
                               {"cost_overrun", p.cost_overrun}});
            }
            emit(g, out, dump({{"model", "M1_cost_overrun"}, {"surface", arr}}));
        } else {
            std::ostringstream ss;
            refdata::csv::write_row(ss, {"estimated_schedule_months", "long_term_inflation_pct", "cost_overrun"});
            for (const auto& p : pts) {
                using refdata::csv::format_double;
                refdata::csv::write_row(ss, {format_double(p.estimated_schedule_months),
                                             format_double(p.long_term_inflation_pct), format_double(p.cost_overrun)});
            }
            emit(g, out, ss.str());
        }
        return kExitOk;
    }
    if (!a.values) throw InputError("predict needs --values (JSON object of variable values)");
    const auto values_json = read_json(*a.values);
    nlohmann::json j;
    std::string text;
    if (a.published) {
        const auto id = papermodels::parse_model_id(*a.published);
        const auto d = papermodels::descriptor_from_json(values_json);
        const auto p = papermodels::predict_published(id, d);
        j = {{"model", std::string(papermodels::to_string(id))},
             {"response", p.response},
             {"linear_predictor", p.linear_predictor},
             {"value", p.value},
             {"flags", {lmm::kNoRandomEffectFlag}}};
        text = std::string(papermodels::to_string(id)) + ": " + p.response + " = " + num(p.linear_predictor) +
               " -> " + num(p.value) + " (" + lmm::kNoRandomEffectFlag + ")\n";
    } else {
        if (!a.model) throw InputError("predict needs --model or --published");
        const auto fm = lmm::fitted_model_from_json(read_json(*a.model));
        lmm::TermValues values;
        try {
            for (const auto& [k, v] : values_json.items()) {
                if (v.is_number()) values[k] = v.get<double>();
                if (v.is_boolean()) values[k] = v.get<bool>() ? 1.0 : 0.0;
            }
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("invalid values: ") + e.what());
        }
        const auto p = lmm::predict(fm, values, a.group);
        j = lmm::to_json(p);
        text = fm.spec.response.label() + " = " + num(p.linear_predictor) + " -> " + num(p.value);
        if (p.random_effect_applied) text += " (random effect " + num(p.random_effect) + ")";
        for (const auto& f : p.flags) text += " (" + f + ")";
        text += "\n";
    }
    if (g.format == Format::json) {
        emit(g, out, dump(j));
    } else if (g.format == Format::csv) {
        std::ostringstream ss;
        refdata::csv::write_row(ss, {"linear_predictor", "value"});
        refdata::csv::write_row(ss, {refdata::csv::format_double(j.at("linear_predictor").get<double>()),
                                     refdata::csv::format_double(j.at("value").get<double>())});
        emit(g, out, ss.str());
    } else {
        emit(g, out, text);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- forecast

struct ForecastArgs {
    std::optional<std::string> descriptor;
    bool builtin = false;
    std::optional<std::string> refclass;
    std::vector<double> risks;
    std::vector<std::string> models;
    double benefit_shortfall = 0.0;
};

inline int cmd_forecast(const GlobalOptions& g, const ForecastArgs& a, std::ostream& out, std::ostream& err) {
    if (a.risks.empty()) throw InputError("forecast needs at least one --risk level");
    const auto descriptor = papermodels::descriptor_from_json(
        a.descriptor ? read_json(*a.descriptor) : read_fixture("diamer_bhasha.json"));
    rcf::ReferenceDistributions reference = [&] {
        if (a.refclass) {
            const auto result = load_reference(*a.refclass, g.strict, err);
            return papermodels::distributions_of(result.reference);
        }
        if (!a.builtin && a.descriptor) {
            err << "note: no --refclass given; using the bundled reference distribution\n";
        }
        return builtin_distributions();
    }();
    papermodels::ForecastOptions fo;
    fo.benefit_shortfall = a.benefit_shortfall;
    if (!a.models.empty()) {
        fo.models.clear();
        for (const auto& m : a.models) fo.models.push_back(papermodels::parse_model_id(m));
        fo.require_models = true;
    }
    std::vector<papermodels::ForecastReport> reports;
    for (double r : a.risks) reports.push_back(papermodels::forecast_report(descriptor, reference, r, fo));

    std::ostringstream ss;
    if (g.format == Format::json) {
        if (reports.size() == 1) {
            ss << dump(papermodels::to_json(reports.front()));
        } else {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : reports) arr.push_back(papermodels::to_json(r));
            ss << dump(arr);
        }
    } else if (g.format == Format::csv) {
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::ostringstream one;
            papermodels::write_csv(one, reports[i]);
            const auto s = one.str();
            ss << (i == 0 ? s : s.substr(s.find('\n') + 1));
        }
    } else {
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (i > 0) ss << "\n";
            papermodels::write_text(ss, reports[i]);
        }
    }
    emit(g, out, ss.str());
    return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string out_dir = ".";
    std::size_t countries = 60;
    std::size_t projects_min = 4;
    std::size_t projects_max = 4;
    double sigma2_group = 0.01;
    double sigma2_resid = 0.04;
    unsigned threads = 1;
    bool calibrate = false;
};

inline int cmd_synth(const GlobalOptions& g, const SynthArgs& a, std::ostream& out, std::ostream&) {
    if (a.calibrate) {
        const auto fit = synth::calibrate_lognormal();
        synth::TailSpec ln;
        ln.mu = fit.mu;
        ln.sigma = fit.sigma;
        const auto ln_report = synth::tail_report(ln);
        const auto mix = synth::calibrate_pareto_mix(fit.mu, fit.sigma);
        const auto mix_report = synth::tail_report(mix);
        nlohmann::json j{
            {"lognormal",
             {{"mu", fit.mu},
              {"sigma", fit.sigma},
              {"median", fit.median},
              {"mean", fit.mean},
              {"iqr", fit.iqr},
              {"fraction_above_1", ln_report.frac_above_1},
              {"fraction_above_2", fit.frac_above_2},
              {"fraction_above_3", fit.frac_above_3},
              {"tail_rms_error", ln_report.rms_error},
              {"objective", fit.objective}}},
            {"pareto_mix",
             {{"body_mu", mix.mu},
              {"body_sigma", mix.sigma},
              {"weight", mix.weight},
              {"alpha", mix.alpha},
              {"scale", mix.scale},
              {"fraction_above_1", mix_report.frac_above_1},
              {"fraction_above_2", mix_report.frac_above_2},
              {"fraction_above_3", mix_report.frac_above_3},
              {"tail_rms_error", mix_report.rms_error}}},
            {"targets",
             {{"median", 1.27}, {"mean", 1.96}, {"iqr", 0.86}, {"fraction_above_1", 0.75},
              {"fraction_above_2", 0.20}, {"fraction_above_3", 0.10}}}};
        if (g.format == Format::json) {
            emit(g, out, dump(j));
        } else {
            std::ostringstream ss;
            ss << "lognormal: mu " << num(fit.mu) << ", sigma " << num(fit.sigma) << "\n"
               << "  median " << num(fit.median) << " (target 1.27), mean " << num(fit.mean) << " (1.96), iqr "
               << num(fit.iqr) << " (0.86)\n"
               << "  fraction above 1x " << num(ln_report.frac_above_1) << " (0.75), 2x " << num(fit.frac_above_2)
               << " (0.20), 3x " << num(fit.frac_above_3) << " (0.10)\n"
               << "pareto mixture on that body: weight " << num(mix.weight) << ", alpha " << num(mix.alpha)
               << ", scale " << num(mix.scale) << "\n"
               << "  fraction above 1x " << num(mix_report.frac_above_1) << ", 2x " << num(mix_report.frac_above_2)
               << ", 3x " << num(mix_report.frac_above_3) << ", rms error " << num(mix_report.rms_error) << "\n";
            emit(g, out, ss.str());
        }
        return kExitOk;
    }

    auto spec = synth::default_cost_spec(g.seed);
    spec.n_countries = a.countries;
    spec.projects_min = a.projects_min;
    spec.projects_max = a.projects_max;
    spec.sigma2_group = a.sigma2_group;
    spec.sigma2_resid = a.sigma2_resid;
    const auto ds = synth::gen_reference_class(spec, a.threads);

    namespace fs = std::filesystem;
    fs::create_directories(a.out_dir);
    {
        std::ofstream f(fs::path(a.out_dir) / "refclass.csv", std::ios::binary);
        if (!f) throw InputError("cannot write into '" + a.out_dir + "'");
        refdata::write_reference_csv(f, ds.reference);
    }
    {
        std::ofstream f(fs::path(a.out_dir) / "macro.csv", std::ios::binary);
        refdata::write_macro_csv(f, ds.macro);
    }
    nlohmann::json truth{{"generator", ds.truth.generator},
                         {"seed", ds.truth.seed},
                         {"response", lmm::to_json(ds.truth.response)},
                         {"terms", ds.truth.column_names},
                         {"beta", ds.truth.beta},
                         {"sigma2_group", ds.truth.sigma2_group},
                         {"sigma2_resid", ds.truth.sigma2_resid},
                         {"country_effects", ds.truth.country_effects}};
    {
        std::ofstream f(fs::path(a.out_dir) / "truth.json", std::ios::binary);
        f << dump(truth);
    }
    const auto model = synth::model_spec(spec);
    {
        std::ofstream f(fs::path(a.out_dir) / "model_spec.json", std::ios::binary);
        f << dump(lmm::to_json(model));
    }
    const std::string summary = "wrote " + std::to_string(ds.reference.records().size()) + " records for " +
                                std::to_string(ds.macro.size()) + " countries to " + a.out_dir +
                                " (refclass.csv, macro.csv, truth.json, model_spec.json)\n";
    if (g.format == Format::json) {
        emit(g, out, dump({{"records", ds.reference.records().size()},
                           {"countries", ds.macro.size()},
                           {"out_dir", a.out_dir},
                           {"truth", truth}}));
    } else {
        emit(g, out, summary);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::optional<std::string> benchmarks;
    std::optional<std::string> refclass;
    std::string label = "This reference class";
};

inline int cmd_compare(const GlobalOptions& g, const CompareArgs& a, std::ostream& out, std::ostream& err) {
    const auto benchmarks = rcf::benchmarks_from_json(a.benchmarks ? read_json(*a.benchmarks)
                                                                    : read_fixture("benchmarks.json"));
    std::optional<stats::EmpiricalDistribution> dist;
    std::string label = a.label;
    if (a.refclass) {
        dist = load_reference(*a.refclass, g.strict, err).reference.cost_overruns();
    } else {
        dist = builtin_distributions().cost;
        if (label == "This reference class") label = "Bundled reconstruction";
    }
    const auto table = rcf::compare_asset_classes(rcf::UpliftCurve(*dist), benchmarks, label);

    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    if (g.format == Format::json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : table) {
            arr.push_back({{"category", r.category},
                           {"mean_overrun_pct", opt(r.mean_overrun_pct)},
                           {"p50_uplift_pct", opt(r.p50_uplift_pct)},
                           {"p80_uplift_pct", opt(r.p80_uplift_pct)},
                           {"note", r.note}});
        }
        emit(g, out, dump(arr));
        return kExitOk;
    }
    auto cell = [](const std::optional<double>& v) { return v ? refdata::csv::format_double(*v) : std::string{}; };
    std::ostringstream ss;
    if (g.format == Format::csv) {
        refdata::csv::write_row(ss, {"category", "mean_overrun_pct", "p50_uplift_pct", "p80_uplift_pct", "note"});
        for (const auto& r : table) {
            refdata::csv::write_row(ss, {r.category, cell(r.mean_overrun_pct), cell(r.p50_uplift_pct),
                                         cell(r.p80_uplift_pct), r.note});
        }
    } else {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-32s %10s %10s %10s  %s\n", "category", "mean %", "p50 %", "p80 %", "note");
        ss << buf;
        auto fmt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("-"); };
        for (const auto& r : table) {
            std::snprintf(buf, sizeof buf, "%-32s %10s %10s %10s  %s\n", r.category.c_str(),
                          fmt(r.mean_overrun_pct).c_str(), fmt(r.p50_uplift_pct).c_str(),
                          fmt(r.p80_uplift_pct).c_str(), r.note.c_str());
            ss << buf;
        }
    }
    emit(g, out, ss.str());
    return kExitOk;
}

/// Runs `body`, mapping exceptions to exit codes with the message on `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace refcast::cli
