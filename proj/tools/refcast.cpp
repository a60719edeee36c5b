#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "refcast/cli/commands.hpp"

namespace {

template <class T>
void bind_optional(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help,
                   std::vector<std::function<void()>>& finalizers, std::shared_ptr<T> storage) {
    auto* opt = app->add_option(name, *storage, help);
    finalizers.emplace_back([opt, &target, storage] {
        if (opt->count() > 0) target = *storage;
    });
}

}  // namespace

int main(int argc, char** argv) {
    using namespace refcast::cli;

    CLI::App app{"refcast: reference class forecasting and multilevel overrun models"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string format = "text";
    std::string out;
    std::uint64_t seed = 1;
    bool strict = false;
    app.add_option("--format", format, "Output format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    app.add_option("--out", out, "Write output to this file instead of stdout");
    app.add_option("--seed", seed, "Seed for synthetic data");
    app.add_flag("--strict", strict, "Treat any ingestion diagnostic as an error");

    std::vector<std::function<void()>> finalizers;
    auto opt_string = [&](CLI::App* sub, const std::string& name, std::optional<std::string>& target,
                          const std::string& help) {
        bind_optional(sub, name, target, help, finalizers, std::make_shared<std::string>());
    };

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a reference-class CSV and report diagnostics");
    ingest_cmd->add_option("refclass", ingest.refclass, "refclass.csv")->required();
    opt_string(ingest_cmd, "--macro", ingest.macro, "Also validate a macro.csv");

    DescribeArgs describe;
    auto* describe_cmd = app.add_subcommand("describe", "Summary statistics of cost overrun and schedule slippage");
    opt_string(describe_cmd, "refclass", describe.refclass, "refclass.csv");
    describe_cmd->add_flag("--builtin", describe.builtin, "Use the bundled reference distribution");
    opt_string(describe_cmd, "--density-out", describe.density_out, "Write a cost-overrun density trace CSV here");
    describe_cmd->add_option("--density-points", describe.density_points, "Density grid size");

    RcfArgs rcf;
    auto* rcf_cmd = app.add_subcommand("rcf", "Required uplift as a function of acceptable risk");
    opt_string(rcf_cmd, "refclass", rcf.refclass, "refclass.csv");
    rcf_cmd->add_flag("--builtin", rcf.builtin, "Use the bundled reference distribution");
    rcf_cmd->add_option("--variable", rcf.variable, "cost or schedule")->check(CLI::IsMember({"cost", "schedule"}));
    rcf_cmd->add_option("--step", rcf.step, "Risk grid step");
    rcf_cmd->add_option("--risk", rcf.risks, "Evaluate only these risk levels")
        ->check(CLI::Range(0.0, 1.0));

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a random-intercept mixed model");
    fit_cmd->add_option("refclass", fit.refclass, "refclass.csv")->required();
    fit_cmd->add_option("macro", fit.macro, "macro.csv")->required();
    fit_cmd->add_option("spec", fit.spec, "Model spec JSON")->required();
    fit_cmd->add_option("--method", fit.method, "reml or ml")->check(CLI::IsMember({"reml", "ml", "REML", "ML"}));
    fit_cmd->add_flag("--stepwise", fit.stepwise, "Backward stepwise elimination before the final fit");
    fit_cmd->add_option("--alpha", fit.alpha, "Stepwise significance level");

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Predict from a fitted or published model");
    opt_string(predict_cmd, "--model", predict.model, "FittedModel JSON written by fit --out");
    opt_string(predict_cmd, "--published", predict.published, "Published model M1..M4");
    opt_string(predict_cmd, "--values", predict.values, "JSON object of raw variable values");
    opt_string(predict_cmd, "--group", predict.group, "Group (country) for the random intercept");
    predict_cmd->add_flag("--surface", predict.surface, "Export the M1 duration x inflation surface");

    ForecastArgs forecast;
    auto* forecast_cmd = app.add_subcommand("forecast", "Two-pronged de-biased forecast for a proposed project");
    opt_string(forecast_cmd, "descriptor", forecast.descriptor, "Project descriptor JSON");
    forecast_cmd->add_flag("--builtin", forecast.builtin, "Use bundled fixtures (descriptor and distribution)");
    opt_string(forecast_cmd, "--refclass", forecast.refclass, "Reference-class CSV instead of the bundled one");
    forecast_cmd->add_option("--risk", forecast.risks, "Acceptable risk level(s)")->check(CLI::Range(0.0, 1.0));
    forecast_cmd->add_option("--models", forecast.models, "Published models to evaluate (M1..M4)")->delimiter(',');
    forecast_cmd->add_option("--benefit-shortfall", forecast.benefit_shortfall, "Benefit shortfall in [0,1)");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic reference class and macro series");
    synth_cmd->add_option("--out-dir", synth.out_dir, "Directory for refclass.csv, macro.csv, truth.json");
    synth_cmd->add_option("--countries", synth.countries, "Number of countries");
    synth_cmd->add_option("--projects-min", synth.projects_min, "Minimum projects per country");
    synth_cmd->add_option("--projects-max", synth.projects_max, "Maximum projects per country");
    synth_cmd->add_option("--sigma2-group", synth.sigma2_group, "Random-intercept variance");
    synth_cmd->add_option("--sigma2-resid", synth.sigma2_resid, "Residual variance");
    synth_cmd->add_option("--threads", synth.threads, "Worker threads (output does not depend on this)");
    synth_cmd->add_flag("--calibrate", synth.calibrate, "Report the overrun-tail calibration instead");

    CompareArgs compare;
    auto* compare_cmd = app.add_subcommand("compare", "Compare uplifts with other asset classes");
    opt_string(compare_cmd, "--benchmarks", compare.benchmarks, "Benchmarks JSON instead of the bundled table");
    opt_string(compare_cmd, "--refclass", compare.refclass, "Reference-class CSV instead of the bundled one");
    compare_cmd->add_option("--label", compare.label, "Label for the project row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }
    for (auto& f : finalizers) f();
    if (synth.projects_max < synth.projects_min) synth.projects_max = synth.projects_min;

    return guarded(std::cerr, [&]() -> int {
        GlobalOptions g;
        g.format = parse_format(format);
        if (!out.empty()) g.out = out;
        g.seed = seed;
        g.strict = strict;
        auto& o = std::cout;
        auto& e = std::cerr;
        if (*ingest_cmd) return cmd_ingest(g, ingest, o, e);
        if (*describe_cmd) return cmd_describe(g, describe, o, e);
        if (*rcf_cmd) return cmd_rcf(g, rcf, o, e);
        if (*fit_cmd) return cmd_fit(g, fit, o, e);
        if (*predict_cmd) return cmd_predict(g, predict, o, e);
        if (*forecast_cmd) {
            if (!forecast.descriptor && !forecast.builtin) {
                throw refcast::InputError("forecast needs a descriptor JSON or --builtin");
            }
            return cmd_forecast(g, forecast, o, e);
        }
        if (*synth_cmd) return cmd_synth(g, synth, o, e);
        if (*compare_cmd) return cmd_compare(g, compare, o, e);
        return kExitInput;
    });
}
