// Runs the built refcast binary end to end.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("refcast_cli_" + std::to_string(::getpid()) + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(const std::string& args) const {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && '" + REFCAST_CLI_PATH + "' " + args + " >'" +
                                out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, DescribeFractionOverBudget) {
    spill(path("four.csv"), fixture::csv_with_overruns({0.9, 1.1, 1.27, 2.0}));
    const auto r = run("describe four.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("fraction over budget: 0.75\n"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("small reference class"), std::string::npos);

    const auto j = run("describe four.csv --format json");
    ASSERT_EQ(j.code, 0);
    EXPECT_DOUBLE_EQ(nlohmann::json::parse(j.out).at("fraction_over_budget").get<double>(), 0.75);
}

TEST_F(Cli, EmptyReferenceClassIsInputError) {
    spill(path("empty.csv"), fixture::csv_header());
    const auto r = run("describe empty.csv");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("empty reference class"), std::string::npos) << r.err;
    spill(path("blank.csv"), "");
    EXPECT_EQ(run("describe blank.csv").code, 2);
    EXPECT_EQ(run("describe missing.csv").code, 2);
}

TEST_F(Cli, ForecastBuiltinJson) {
    const auto r = run("forecast --builtin --risk 0.2 --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    const double budget = j.at("rcf_branch").at("debiased_budget").get<double>();
    EXPECT_NEAR(budget, 1779.06, 1e-9);
    EXPECT_LT(std::abs(budget - 1788.0) / 1788.0, 0.01);
    EXPECT_FALSE(j.at("caveats").empty());
    EXPECT_TRUE(j.at("viability").at("stranded").get<bool>());
    // Keys come out sorted, two-space indented.
    EXPECT_EQ(r.out, j.dump(2) + "\n");

    const auto half = run("--format json forecast --builtin --risk 0.5");
    ASSERT_EQ(half.code, 0) << half.err;
    EXPECT_NEAR(nlohmann::json::parse(half.out).at("rcf_branch").at("debiased_budget").get<double>(), 1126.44, 1e-9);
}

TEST_F(Cli, ForecastMissingTermForRequestedModel) {
    auto d = nlohmann::json::parse(slurp(fs::path(REFCAST_DEFAULT_FIXTURE_DIR) / "diamer_bhasha.json"));
    d.erase("wall_length_m");
    spill(path("project.json"), d.dump());
    const auto r = run("forecast project.json --risk 0.2 --models M3");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("missing term: wall_length_m"), std::string::npos) << r.err;
    // Without --models the model is skipped with a caveat instead.
    const auto lenient = run("forecast project.json --risk 0.2 --format json");
    ASSERT_EQ(lenient.code, 0) << lenient.err;
    EXPECT_NE(lenient.out.find("M3 skipped: missing term: wall_length_m"), std::string::npos);
}

TEST_F(Cli, BadArgumentsAreInputErrors) {
    EXPECT_EQ(run("forecast --builtin --risk 1.5").code, 2);
    EXPECT_EQ(run("forecast --builtin").code, 2);
    EXPECT_EQ(run("nosuchcommand").code, 2);
    EXPECT_EQ(run("describe --builtin --format yaml").code, 2);
}

TEST_F(Cli, SynthIsIndependentOfThreadsAndFits) {
    ASSERT_EQ(run("synth --seed 11 --out-dir a --threads 1").code, 0);
    ASSERT_EQ(run("synth --seed 11 --out-dir b --threads 4").code, 0);
    ASSERT_EQ(run("synth --seed 12 --out-dir c").code, 0);
    for (const auto* f : {"refclass.csv", "macro.csv", "truth.json", "model_spec.json"}) {
        EXPECT_EQ(slurp(path("a") / f), slurp(path("b") / f)) << f;
    }
    EXPECT_NE(slurp(path("a") / "refclass.csv"), slurp(path("c") / "refclass.csv"));

    const auto r = run("fit a/refclass.csv a/macro.csv a/model_spec.json --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto fm = nlohmann::json::parse(r.out);
    const auto truth = nlohmann::json::parse(slurp(path("a") / "truth.json"));
    const auto& coefs = fm.at("coefficients");
    ASSERT_EQ(coefs.size(), truth.at("beta").size());
    for (std::size_t k = 0; k < coefs.size(); ++k) {
        const double b = coefs[k].at("coefficient").get<double>();
        const double se = coefs[k].at("std_error").get<double>();
        EXPECT_LT(std::abs(b - truth.at("beta")[k].get<double>()), 4.0 * se) << k;
    }
    EXPECT_EQ(r.out, fm.dump(2) + "\n");
}

TEST_F(Cli, FitNamesCollinearColumn) {
    std::string csv = fixture::csv_header();
    const char* countries[] = {"COL", "BRA", "PAK", "IND"};
    for (int i = 0; i < 16; ++i) {
        const std::string size = std::to_string(40 + 13 * i);
        csv += fixture::csv_row({{"id", "R" + std::to_string(i)},
                                 {"country", countries[i % 4]},
                                 {"wall_height_m", size},
                                 {"wall_length_m", size},
                                 {"actual_cost", std::to_string(100 + 7 * (i % 5))}});
    }
    spill(path("rc.csv"), csv);
    spill(path("macro.csv"), "country,year,deflator,fx_rate,per_capita_income_2000usd,gdp_nominal_usd,polity2,muv_index\n"
                             "COL,1970,1,1,1000,1e9,5,1\n");
    spill(path("spec.json"), R"({"response": {"variable": "cost_overrun", "transform": "log"},
        "terms": [{"variable": "wall_height_m", "transform": "log"},
                  {"variable": "wall_length_m", "transform": "log"}]})");
    const auto r = run("fit rc.csv macro.csv spec.json");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("log(wall_length_m)"), std::string::npos) << r.err;
}

TEST_F(Cli, RcfCurveCsv) {
    const auto r = run("rcf --builtin --format csv --step 0.1");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("acceptable_risk,uplift_pct\n", 0), 0u);
    EXPECT_NE(r.out.find("0.2,99"), std::string::npos) << r.out;
}

TEST_F(Cli, CompareTable) {
    const auto r = run("compare --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Rail"), std::string::npos);
}
