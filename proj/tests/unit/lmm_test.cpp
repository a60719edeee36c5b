#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lmm_data.hpp"
#include "refcast/error.hpp"
#include "refcast/lmm/design.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/predict.hpp"
#include "refcast/lmm/spec.hpp"
#include "refcast/lmm/stepwise.hpp"
#include "refcast/refdata/ingest.hpp"

using namespace refcast;
using namespace refcast::lmm;

namespace {

Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return X.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST(Fit, BalancedRemlMatchesAnova) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto d = lmmdata::balanced(6, 5, 2.0, 1.0, 0.5, seed);
        const auto a = lmmdata::anova_components(d, 6, 5);
        if (a.reml_group <= 0.0) continue;
        const auto fm = fit(d.y, d.X, d.groups, {FitMethod::REML});
        EXPECT_NEAR(fm.sigma2_group, a.reml_group, 1e-6) << "seed " << seed;
        EXPECT_NEAR(fm.sigma2_resid, a.reml_resid, 1e-6) << "seed " << seed;
        EXPECT_NEAR(fm.beta(0), d.y.mean(), 1e-10);
    }
}

TEST(Fit, BalancedMlMatchesAnova) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto d = lmmdata::balanced(6, 5, 2.0, 1.0, 0.5, seed);
        const auto a = lmmdata::anova_components(d, 6, 5);
        if (a.ml_group <= 0.0) continue;
        const auto fm = fit(d.y, d.X, d.groups, {FitMethod::ML});
        EXPECT_NEAR(fm.sigma2_group, a.ml_group, 1e-6) << "seed " << seed;
        EXPECT_NEAR(fm.sigma2_resid, a.ml_resid, 1e-6) << "seed " << seed;
    }
}

TEST(Fit, RemlAndMlDifferByBiasCorrection) {
    const auto d = lmmdata::balanced(6, 5, 0.0, 1.0, 0.5, 3);
    const auto reml = fit(d.y, d.X, d.groups, {FitMethod::REML});
    const auto ml = fit(d.y, d.X, d.groups, {FitMethod::ML});
    const auto a = lmmdata::anova_components(d, 6, 5);
    ASSERT_GT(a.ml_group, 0.0);
    // REML - ML = MSB / (g m) on a balanced layout.
    EXPECT_NEAR(reml.sigma2_group - ml.sigma2_group, a.msb / (6.0 * 5.0), 1e-6);
    EXPECT_GT(reml.sigma2_group, ml.sigma2_group);
    EXPECT_NEAR(reml.beta(0), ml.beta(0), 1e-10);
}

TEST(Fit, NoGroupComponentGivesOls) {
    const auto d = lmmdata::with_covariates(8, 6, {1.0, 0.5, -0.3}, 0.0, 0.4, 5, true);
    const auto fm = fit(d.y, d.X, d.groups);
    const Eigen::VectorXd b = ols(d.X, d.y);
    for (Eigen::Index j = 0; j < b.size(); ++j) EXPECT_NEAR(fm.beta(j), b(j), 1e-8);
    EXPECT_LT(fm.sigma2_group, 1e-6);
}

TEST(Fit, BoundaryEstimateEqualsOls) {
    // Whenever lambda lands on zero the GLS estimate is OLS.
    int boundary = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto d = lmmdata::with_covariates(8, 6, {1.0, 0.5}, 0.0, 0.4, seed);
        const auto fm = fit(d.y, d.X, d.groups);
        if (fm.lambda != 0.0) continue;
        ++boundary;
        const Eigen::VectorXd b = ols(d.X, d.y);
        for (Eigen::Index j = 0; j < b.size(); ++j) EXPECT_NEAR(fm.beta(j), b(j), 1e-10);
    }
    EXPECT_GT(boundary, 0);
}

TEST(Fit, RowPermutationInvariance) {
    const auto d = lmmdata::with_covariates(10, 5, {1.0, 0.5, -0.3}, 0.7, 0.4, 7);
    const auto base = fit(d.y, d.X, d.groups);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.y.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        std::shuffle(perm.begin(), perm.end(), rng);
        lmmdata::Data p;
        p.y.resize(d.y.size());
        p.X.resize(d.X.rows(), d.X.cols());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            p.y(static_cast<Eigen::Index>(i)) = d.y(perm[i]);
            p.X.row(static_cast<Eigen::Index>(i)) = d.X.row(perm[i]);
            p.groups.push_back(d.groups[static_cast<std::size_t>(perm[i])]);
        }
        const auto fm = fit(p.y, p.X, p.groups);
        for (Eigen::Index j = 0; j < base.beta.size(); ++j) EXPECT_NEAR(fm.beta(j), base.beta(j), 1e-10);
        EXPECT_NEAR(fm.sigma2_group, base.sigma2_group, 1e-10);
        EXPECT_NEAR(fm.sigma2_resid, base.sigma2_resid, 1e-10);
    }
}

TEST(Fit, ColumnRescalingInvariance) {
    const auto d = lmmdata::with_covariates(10, 5, {1.0, 0.5, -0.3}, 0.7, 0.4, 9);
    const auto base = fit(d.y, d.X, d.groups);
    for (double c : {0.001, 0.5, 7.0, 1000.0}) {
        Eigen::MatrixXd X = d.X;
        X.col(1) *= c;
        const auto fm = fit(d.y, X, d.groups);
        EXPECT_NEAR(fm.beta(1), base.beta(1) / c, 1e-8 * std::max(1.0, std::abs(base.beta(1) / c)));
        EXPECT_NEAR(fm.t_stats(1), base.t_stats(1), 1e-8);
        EXPECT_NEAR(fm.t_stats(2), base.t_stats(2), 1e-8);
    }
}

TEST(Fit, LikelihoodIsLocalOptimum) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto d = lmmdata::with_covariates(12, 4, {1.0, 0.2}, 0.3 * (seed % 4), 0.5, seed);
        for (auto method : {FitMethod::REML, FitMethod::ML}) {
            const auto fm = fit(d.y, d.X, d.groups, {method});
            const ProfiledLikelihood lik(d.y, d.X, d.groups, method);
            EXPECT_GE(fm.loglik, lik(0.0) - 1e-12);
            EXPECT_GE(fm.loglik, lik(10.0 * fm.lambda) - 1e-12);
            EXPECT_GE(fm.sigma2_group, 0.0);
            EXPECT_GT(fm.sigma2_resid, 0.0);
            EXPECT_EQ(fm.beta.size(), fm.se.size());
            EXPECT_EQ(fm.beta.size(), fm.p_values.size());
            for (Eigen::Index j = 0; j < fm.p_values.size(); ++j) {
                EXPECT_TRUE(fm.p_values(j) >= 0.0 && fm.p_values(j) <= 1.0);
            }
        }
    }
}

TEST(Fit, ScoreMatchesFiniteDifference) {
    const auto d = lmmdata::with_covariates(12, 4, {1.0, 0.2, 0.7}, 0.6, 0.5, 31);
    for (auto method : {FitMethod::REML, FitMethod::ML}) {
        const ProfiledLikelihood lik(d.y, d.X, d.groups, method);
        for (double l : {0.05, 0.4, 1.0, 3.0, 20.0}) {
            const double h = 1e-5 * l;
            const double fd = (lik(l + h) - lik(l - h)) / (2.0 * h);
            EXPECT_NEAR(lik.score(l), fd, 1e-5 * std::max(1.0, std::abs(fd))) << l;
        }
        const auto fm = fit(d.y, d.X, d.groups, {method});
        ASSERT_GT(fm.lambda, 0.0);
        EXPECT_NEAR(lik.score(fm.lambda), 0.0, 1e-8);
    }
}

TEST(Fit, PredictReproducesStoredResiduals) {
    const auto d = lmmdata::with_covariates(10, 5, {1.0, 0.5, -0.3}, 0.7, 0.4, 11);
    auto fm = fit(d.y, d.X, d.groups);
    fm.spec = lmmdata::raw_spec({"a", "b"});
    double rss = 0.0;
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        const auto p = predict_row(fm, d.X.row(i).transpose(), d.groups[static_cast<std::size_t>(i)]);
        EXPECT_TRUE(p.random_effect_applied);
        rss += (d.y(i) - p.value) * (d.y(i) - p.value);
    }
    EXPECT_NEAR(rss, fm.residual_sum_squares, 1e-8);
}

TEST(Fit, BlupShrinkage) {
    const auto d = lmmdata::balanced(6, 5, 2.0, 1.0, 0.5, 4);
    const auto fm = fit(d.y, d.X, d.groups);
    for (int g = 0; g < 6; ++g) {
        const double mean = d.y.segment(g * 5, 5).mean();
        const double shrink = fm.lambda * 5.0 / (1.0 + fm.lambda * 5.0);
        EXPECT_NEAR(fm.group_effects.at(lmmdata::group_label(g)), shrink * (mean - fm.beta(0)), 1e-10);
    }
}

TEST(Fit, CollinearColumnIsNamed) {
    auto d = lmmdata::with_covariates(6, 5, {1.0, 0.5}, 0.5, 0.5, 13);
    Eigen::MatrixXd X(d.X.rows(), 3);
    X << d.X, 2.0 * d.X.col(1);
    try {
        fit(d.y, X, d.groups, {}, {"(Intercept)", "height", "height_twice"});
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("height_twice"), std::string::npos);
        EXPECT_EQ(std::string(e.what()).find("'height'"), std::string::npos);
    }
}

TEST(Fit, DegenerateInputs) {
    const auto d = lmmdata::with_covariates(1, 10, {1.0, 0.5}, 0.0, 0.5, 15);
    const auto single = fit(d.y, d.X, d.groups);
    EXPECT_EQ(single.lambda, 0.0);
    ASSERT_FALSE(single.warnings.empty());
    EXPECT_NE(single.warnings[0].find("single group"), std::string::npos);

    const auto tiny = lmmdata::with_covariates(2, 2, {1.0, 0.5}, 0.0, 0.5, 15);
    EXPECT_THROW(fit(tiny.y, tiny.X, tiny.groups), ModelError);

    auto bad = lmmdata::with_covariates(3, 4, {1.0}, 0.0, 0.5, 15);
    bad.y(0) = std::nan("");
    EXPECT_THROW(fit(bad.y, bad.X, bad.groups), ModelError);
}

TEST(Fit, NonConvergenceReportsTrace) {
    const auto d = lmmdata::balanced(6, 5, 2.0, 1.0, 0.5, 1);
    FitOptions o;
    o.max_iterations = 3;
    try {
        fit(d.y, d.X, d.groups, o);
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("did not converge"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("grid best"), std::string::npos);
    }
}

TEST(Predict, UnknownGroupAndBackTransform) {
    FittedModel fm;
    fm.spec.response = {"cost_overrun", stats::Transformation::reciprocal()};
    fm.spec.terms = {{"x", stats::Transformation::identity()}};
    fm.beta = Eigen::Vector2d(0.3, 0.1);
    fm.group_effects = {{"PAK", 0.05}};
    const auto p = predict(fm, {{"x", 2.0}}, std::string("BRA"));
    EXPECT_FALSE(p.random_effect_applied);
    ASSERT_EQ(p.flags.size(), 1u);
    EXPECT_EQ(p.flags[0], kNoRandomEffectFlag);
    EXPECT_DOUBLE_EQ(p.linear_predictor, 0.5);
    EXPECT_DOUBLE_EQ(p.value, 2.0);

    const auto q = predict(fm, {{"x", 2.0}}, std::string("PAK"));
    EXPECT_TRUE(q.random_effect_applied);
    EXPECT_NEAR(q.linear_predictor, 0.55, 1e-15);

    try {
        predict(fm, {{"x", -3.0}});
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find(kOutsideResponseDomain), std::string::npos);
    }
    try {
        predict(fm, {{"y", 1.0}});
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_NE(std::string(e.what()).find("missing term: x"), std::string::npos);
    }
}

TEST(Predict, FittedModelJsonRoundTrip) {
    const auto d = lmmdata::with_covariates(10, 5, {1.0, 0.5, -0.3}, 0.7, 0.4, 17);
    auto spec = lmmdata::raw_spec({"a", "b"});
    auto fm = fit(d.y, d.X, d.groups, {}, spec.column_names());
    fm.spec = spec;
    const auto j = to_json(fm);
    const auto back = fitted_model_from_json(j);
    EXPECT_EQ(back.beta, fm.beta);
    EXPECT_EQ(back.group_effects, fm.group_effects);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(j.at("df").get<int>(), 50 - 3 - 10 + 1);
    const auto table = format_table(fm);
    EXPECT_NE(table.find("coefficient"), std::string::npos);
    EXPECT_NE(table.find("std_error"), std::string::npos);
}

TEST(Spec, ValidationAndJson) {
    ModelSpec s = lmmdata::raw_spec({"a", "b"});
    s.interactions = {{"a", "b"}};
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.column_names(), (std::vector<std::string>{"(Intercept)", "a", "b", "a:b"}));
    EXPECT_EQ(spec_from_json(to_json(s)), s);

    ModelSpec dup = lmmdata::raw_spec({"a", "a"});
    EXPECT_THROW(dup.validate(), ModelError);
    ModelSpec dangling = lmmdata::raw_spec({"a"});
    dangling.interactions = {{"a", "zzz"}};
    EXPECT_THROW(dangling.validate(), ModelError);
    EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"terms": []})")), InputError);
}

TEST(Design, DemocracyAndListwiseDeletion) {
    std::string text = fixture::csv_header();
    for (int i = 0; i < 10; ++i) {
        text += fixture::csv_row({{"id", "R" + std::to_string(i)},
                                  {"country", i < 5 ? "PAK" : "BRA"},
                                  {"wall_length_m", i == 2 || i == 7 ? "" : std::to_string(100 + 10 * i)}});
    }
    std::istringstream in(text);
    const auto rc = refdata::ingest_reference_csv(in, false).reference;
    refdata::MacroMap macro;
    macro["PAK"].country = "PAK";
    macro["PAK"].polity2[1970] = 7;
    macro["BRA"].country = "BRA";
    macro["BRA"].polity2[1970] = -3;

    ModelSpec s;
    s.response = {"cost_overrun", stats::Transformation::log()};
    s.terms = {{"wall_length_m", stats::Transformation::log()}, {"democracy", stats::Transformation::identity()}};
    const auto d = build_design(rc, macro, s);
    EXPECT_EQ(d.y.size(), 8);
    EXPECT_EQ(d.dropped.size(), 2u);
    EXPECT_EQ(d.n_input, 10u);
    for (const auto& r : d.dropped) EXPECT_NE(r.reason.find("wall_length_m"), std::string::npos);
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        EXPECT_EQ(d.X(i, 2), d.groups[static_cast<std::size_t>(i)] == "PAK" ? 1.0 : 0.0);
    }

    ModelSpec unknown = s;
    unknown.terms.push_back({"colour", stats::Transformation::identity()});
    EXPECT_THROW(build_design(rc, macro, unknown), ModelError);
}

TEST(Stepwise, StrongSignalIsNoOp) {
    auto c = lmmdata::signal_plus_noise(21);
    const auto r = stepwise(lmmdata::raw_spec({"x1", "x2"}), c);
    EXPECT_TRUE(r.trace.empty());
    EXPECT_EQ(r.spec.terms.size(), 2u);
}

TEST(Stepwise, TieGoesToLaterDeclaration) {
    // Rows come in mirrored pairs (a, b) and (b, a) with the same response
    // and group, so the two columns have identical p-values.
    std::mt19937_64 rng(23);
    std::normal_distribution<double> z(0.0, 1.0);
    const int pairs = 40;
    lmmdata::RawColumns c;
    c.y.resize(2 * pairs);
    Eigen::VectorXd u(2 * pairs), v(2 * pairs);
    for (int k = 0; k < pairs; ++k) {
        const double a = z(rng);
        const double b = z(rng);
        const double y = z(rng);
        u(2 * k) = a;
        v(2 * k) = b;
        u(2 * k + 1) = b;
        v(2 * k + 1) = a;
        c.y(2 * k) = y;
        c.y(2 * k + 1) = y;
        c.groups.push_back(lmmdata::group_label(k % 8));
        c.groups.push_back(lmmdata::group_label(k % 8));
    }
    c.columns = {{"first", u}, {"second", v}};
    StepwiseOptions o;
    o.alpha = 1e-12;
    const auto r = stepwise(lmmdata::raw_spec({"first", "second"}), c, o);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_EQ(r.trace[0].term, "second");
    EXPECT_TRUE(r.trace[0].tie_broken);
    EXPECT_EQ(r.trace[0].tied_with, std::vector<std::string>{"first"});
}

TEST(Stepwise, InteractionProtectsItsMainEffects) {
    std::mt19937_64 rng(25);
    std::normal_distribution<double> z(0.0, 1.0);
    const int n = 200;
    lmmdata::RawColumns c;
    c.y.resize(n);
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a(i) = z(rng);
        b(i) = z(rng);
        c.y(i) = 2.0 * a(i) * b(i) + 0.5 * z(rng);
        c.groups.push_back(lmmdata::group_label(i % 10));
    }
    c.columns = {{"a", a}, {"b", b}};
    auto s = lmmdata::raw_spec({"a", "b"});
    s.interactions = {{"a", "b"}};
    const auto r = stepwise(s, c);
    EXPECT_TRUE(r.trace.empty());
    EXPECT_EQ(r.spec.terms.size(), 2u);
    EXPECT_EQ(r.spec.interactions.size(), 1u);
}

TEST(Stepwise, EverythingEliminated) {
    auto c = lmmdata::signal_plus_noise(27);
    c.y = c.columns.at("noise") * 0.0 + Eigen::VectorXd::Constant(c.y.size(), 1.0);
    std::mt19937_64 rng(28);
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < c.y.size(); ++i) c.y(i) += z(rng);
    StepwiseOptions o;
    o.alpha = 1e-9;
    const auto r = stepwise(lmmdata::raw_spec({"noise"}), c, o);
    EXPECT_TRUE(r.spec.terms.empty());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("intercept-only"), std::string::npos);
    EXPECT_EQ(r.trace.size(), 1u);
}
