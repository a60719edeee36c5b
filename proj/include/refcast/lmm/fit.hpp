#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "refcast/error.hpp"
#include "refcast/lmm/design.hpp"
#include "refcast/lmm/spec.hpp"

namespace refcast::lmm {

enum class FitMethod { ML, REML };

inline std::string to_string(FitMethod m) { return m == FitMethod::ML ? "ML" : "REML"; }

inline FitMethod parse_method(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "ml") return FitMethod::ML;
    if (s == "reml") return FitMethod::REML;
    throw InputError("unknown fit method '" + s + "' (expected ml or reml)");
}

inline constexpr const char* kDfConvention =
    "containment approximation: df = n - p - g + 1 (n rows, p fixed effects, g groups)";

struct FitOptions {
    FitMethod method = FitMethod::REML;
    double lambda_tolerance = 1e-10;
    int max_iterations = 200;
    double lambda_max = 1e8;
};

/// Linear mixed model y = X beta + Z b + e with one random intercept per
/// group, b ~ N(0, s2_group), e ~ N(0, s2_resid).
struct FittedModel {
    ModelSpec spec;
    std::vector<std::string> names;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    Eigen::MatrixXd covariance;
    double sigma2_group = 0.0;
    double sigma2_resid = 0.0;
    double lambda = 0.0;  // sigma2_group / sigma2_resid
    double loglik = 0.0;
    FitMethod method = FitMethod::REML;
    int df = 0;
    std::string df_convention = kDfConvention;
    std::map<std::string, double> group_effects;  // BLUPs
    std::map<std::string, std::size_t> group_sizes;
    double residual_sum_squares = 0.0;  // sum of (y - X beta - b_group)^2 over the training rows
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    std::size_t n_groups = 0;
    int iterations = 0;
    std::vector<std::string> warnings;
};

namespace detail {

struct GroupBlock {
    std::string label;
    double m = 0.0;
    Eigen::VectorXd x_mean;
    double y_mean = 0.0;
};

}  // namespace detail

/// Profiled (restricted) log-likelihood as a function of the variance ratio
/// lambda = s2_group / s2_resid.
///
/// With V = I + lambda Z Z', the GLS quantities split into within-group
/// scatter plus a shrunken between-group part,
///   X'V^-1 X = W_xx + sum_j m_j/(1 + lambda m_j) xbar_j xbar_j',
/// which stays well conditioned for large lambda.
class ProfiledLikelihood {
public:
    ProfiledLikelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& groups,
                       FitMethod method)
        : method_(method), n_(static_cast<double>(y.size())), p_(static_cast<double>(X.cols())) {
        if (static_cast<std::size_t>(y.size()) != groups.size() || y.size() != X.rows()) {
            throw ModelError("response, design and group labels differ in length");
        }
        std::map<std::string, std::vector<Eigen::Index>> members;
        for (Eigen::Index i = 0; i < y.size(); ++i) members[groups[static_cast<std::size_t>(i)]].push_back(i);
        const auto p = X.cols();
        wxx_ = Eigen::MatrixXd::Zero(p, p);
        wxy_ = Eigen::VectorXd::Zero(p);
        wyy_ = 0.0;
        // Rows are accumulated in value order so the sums, and hence the
        // fit, do not depend on input row order.
        const auto row_less = [&](Eigen::Index i, Eigen::Index k) {
            if (y(i) != y(k)) return y(i) < y(k);
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                if (X(i, j) != X(k, j)) return X(i, j) < X(k, j);
            }
            return false;
        };
        for (auto& [label, rows] : members) {
            std::sort(rows.begin(), rows.end(), row_less);
            detail::GroupBlock b;
            b.label = label;
            b.m = static_cast<double>(rows.size());
            b.x_mean = Eigen::VectorXd::Zero(p);
            for (auto i : rows) {
                b.x_mean += X.row(i).transpose();
                b.y_mean += y(i);
            }
            b.x_mean /= b.m;
            b.y_mean /= b.m;
            for (auto i : rows) {
                const Eigen::VectorXd dx = X.row(i).transpose() - b.x_mean;
                const double dy = y(i) - b.y_mean;
                wxx_.noalias() += dx * dx.transpose();
                wxy_ += dx * dy;
                wyy_ += dy * dy;
            }
            blocks_.push_back(std::move(b));
        }
    }

    struct Solution {
        Eigen::VectorXd beta;
        Eigen::MatrixXd xtvx;  // X' V^-1 X
        double rss = 0.0;       // (y - X beta)' V^-1 (y - X beta)
        double log_det_v = 0.0;
        double log_det_xtvx = 0.0;
    };

    Solution solve(double lambda) const {
        Solution s;
        s.xtvx = wxx_;
        Eigen::VectorXd xtvy = wxy_;
        double ytvy = wyy_;
        for (const auto& b : blocks_) {
            const double w = b.m / (1.0 + lambda * b.m);
            s.xtvx.noalias() += w * b.x_mean * b.x_mean.transpose();
            xtvy += w * b.y_mean * b.x_mean;
            ytvy += w * b.y_mean * b.y_mean;
            s.log_det_v += std::log1p(lambda * b.m);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(s.xtvx);
        if (llt.info() != Eigen::Success) throw ModelError("X'V^-1 X is not positive definite");
        s.beta = llt.solve(xtvy);
        s.rss = std::max(ytvy - xtvy.dot(s.beta), 0.0);
        const Eigen::MatrixXd L = llt.matrixL();
        for (Eigen::Index i = 0; i < L.rows(); ++i) s.log_det_xtvx += 2.0 * std::log(L(i, i));
        return s;
    }

    double operator()(double lambda) const { return evaluate(solve(lambda)); }

    double evaluate(const Solution& s) const {
        constexpr double log2pi = 1.8378770664093454836;
        if (method_ == FitMethod::ML) {
            if (s.rss <= 0.0) return std::numeric_limits<double>::infinity();
            return -0.5 * (n_ * (log2pi + 1.0 + std::log(s.rss / n_)) + s.log_det_v);
        }
        const double dof = n_ - p_;
        if (s.rss <= 0.0) return std::numeric_limits<double>::infinity();
        return -0.5 * (dof * (log2pi + 1.0 + std::log(s.rss / dof)) + s.log_det_v + s.log_det_xtvx);
    }

    /// d loglik / d lambda. With w_j = m_j/(1 + lambda m_j) and r_j the
    /// group's mean GLS residual, d rss = -sum w_j^2 r_j^2 (envelope in beta),
    /// d log|V| = sum w_j and d log|X'V^-1 X| = -sum w_j^2 xbar_j' A^-1 xbar_j.
    double score(double lambda) const {
        const auto s = solve(lambda);
        const Eigen::LLT<Eigen::MatrixXd> llt(s.xtvx);
        double d_rss = 0.0;
        double d_logv = 0.0;
        double d_logx = 0.0;
        for (const auto& b : blocks_) {
            const double w = b.m / (1.0 + lambda * b.m);
            const double r = b.y_mean - b.x_mean.dot(s.beta);
            d_rss -= w * w * r * r;
            d_logv += w;
            d_logx -= w * w * b.x_mean.dot(llt.solve(b.x_mean));
        }
        if (method_ == FitMethod::ML) return -0.5 * (n_ * d_rss / s.rss + d_logv);
        return -0.5 * ((n_ - p_) * d_rss / s.rss + d_logv + d_logx);
    }

    double residual_variance(const Solution& s) const {
        return method_ == FitMethod::ML ? s.rss / n_ : s.rss / (n_ - p_);
    }

    const std::vector<detail::GroupBlock>& blocks() const { return blocks_; }
    FitMethod method() const { return method_; }

private:
    FitMethod method_;
    double n_;
    double p_;
    Eigen::MatrixXd wxx_;
    Eigen::VectorXd wxy_;
    double wyy_ = 0.0;
    std::vector<detail::GroupBlock> blocks_;
};

/// Names every column that lies (numerically) in the span of the columns
/// declared before it.
inline std::vector<std::string> collinear_columns(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Eigen::VectorXd v = X.col(j);
        const double norm0 = v.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) v -= q.dot(v) * q;
        }
        const double norm = v.norm();
        const std::string name = j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                                              : "x" + std::to_string(j);
        if (norm0 == 0.0 || norm <= 1e-9 * norm0) {
            out.push_back(name);
        } else {
            basis.push_back(v / norm);
        }
    }
    return out;
}

/// Fits the random-intercept model by maximising the profiled likelihood in
/// lambda: a log-spaced grid locates the basin, golden-section search
/// narrows it to `lambda_tolerance`, and the boundary lambda = 0 is compared
/// explicitly. beta is the GLS estimate at the optimum; standard errors come
/// from s2_resid (X'V^-1 X)^-1; p-values are two-tailed t with the
/// containment degrees of freedom.
inline FittedModel fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& groups,
                       const FitOptions& options = {}, std::vector<std::string> names = {}) {
    const auto n = static_cast<std::size_t>(y.size());
    const auto p = static_cast<std::size_t>(X.cols());
    if (names.empty()) {
        for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    }
    if (names.size() != p) throw ModelError("column names do not match the design");
    if (n <= p + 2) {
        throw ModelError("too few rows: n = " + std::to_string(n) + " must exceed p + 2 = " + std::to_string(p + 2));
    }
    if (!y.allFinite() || !X.allFinite()) throw ModelError("non-finite values in response or design");
    const auto collinear = collinear_columns(X, names);
    if (!collinear.empty()) {
        std::string msg = "singular design: collinear column(s)";
        for (const auto& c : collinear) msg += " '" + c + "'";
        throw ModelError(msg);
    }

    const ProfiledLikelihood lik(y, X, groups, options.method);
    FittedModel fm;
    fm.method = options.method;
    fm.names = names;
    fm.n_used = n;
    fm.n_groups = lik.blocks().size();

    double lambda = 0.0;
    std::ostringstream trace;
    if (fm.n_groups < 2) {
        fm.warnings.emplace_back("single group: random intercept not identifiable, fitted as OLS");
    } else {
        // Coarse grid over 0 and 10^-8 .. lambda_max.
        std::vector<double> grid{0.0};
        for (double v = 1e-8; v <= options.lambda_max * 1.0000001; v *= 10.0) grid.push_back(v);
        std::vector<double> values;
        values.reserve(grid.size());
        for (double g : grid) values.push_back(lik(g));
        const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
        double lo = grid[best == 0 ? 0 : best - 1];
        double hi = grid[std::min(best + 1, grid.size() - 1)];
        trace << "grid best lambda=" << grid[best] << " loglik=" << values[best] << "; ";

        // Golden-section maximisation on [lo, hi].
        constexpr double inv_phi = 0.6180339887498948482;
        double a = lo;
        double b = hi;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = lik(c);
        double fd = lik(d);
        int it = 0;
        while (b - a > options.lambda_tolerance * std::max(1.0, std::abs(a))) {
            if (++it > options.max_iterations) {
                trace << "stopped at [" << a << ", " << b << "]";
                throw ModelError("variance-ratio search did not converge after " +
                                 std::to_string(options.max_iterations) + " iterations: " + trace.str());
            }
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = lik(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = lik(d);
            }
        }
        fm.iterations = it;
        lambda = 0.5 * (a + b);
        // The value search is only good to about sqrt(eps) on a flat top;
        // polish with a root of the score when it brackets one nearby.
        if (lambda > 0.0) {
            const double l0 = lambda * (1.0 - 1e-3);
            const double l1 = lambda * (1.0 + 1e-3);
            const double s0 = lik.score(l0);
            const double s1 = lik.score(l1);
            if (s0 > 0.0 && s1 < 0.0) {
                std::uintmax_t max_iter = 200;
                const auto root = boost::math::tools::toms748_solve(
                    [&](double l) { return lik.score(l); }, l0, l1, s0, s1,
                    boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3), max_iter);
                lambda = 0.5 * (root.first + root.second);
            }
        }
        // Boundary and bracket ends can beat the interior point.
        double best_val = lik(lambda);
        for (double cand : {0.0, lo, hi}) {
            const double v = lik(cand);
            if (v >= best_val) {
                best_val = v;
                lambda = cand;
            }
        }
        if (lambda >= options.lambda_max) {
            fm.warnings.emplace_back("variance ratio hit the search ceiling; residual variance is near zero");
        }
    }

    const auto sol = lik.solve(lambda);
    fm.lambda = lambda;
    fm.loglik = lik.evaluate(sol);
    fm.beta = sol.beta;
    fm.sigma2_resid = lik.residual_variance(sol);
    fm.sigma2_group = lambda * fm.sigma2_resid;
    fm.covariance = fm.sigma2_resid * sol.xtvx.inverse();
    fm.se = fm.covariance.diagonal().cwiseSqrt();
    fm.t_stats = fm.beta.cwiseQuotient(fm.se);

    const auto df = static_cast<long>(n) - static_cast<long>(p) - static_cast<long>(fm.n_groups) + 1;
    fm.df = static_cast<int>(std::max(1L, df));
    if (df < 1) fm.warnings.emplace_back("containment df below 1; clamped to 1");
    const boost::math::students_t_distribution<double> tdist(fm.df);
    fm.p_values.resize(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
        const double t = std::abs(fm.t_stats(j));
        fm.p_values(j) = std::isfinite(t) ? std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(tdist, t)))
                                          : 0.0;
    }

    // BLUPs: lambda m / (1 + lambda m) times the group's mean marginal residual.
    std::map<std::string, double> effects;
    for (const auto& b : lik.blocks()) {
        const double shrink = lambda * b.m / (1.0 + lambda * b.m);
        effects[b.label] = shrink * (b.y_mean - b.x_mean.dot(fm.beta));
        fm.group_sizes[b.label] = static_cast<std::size_t>(b.m);
    }
    fm.group_effects = std::move(effects);

    double rss = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = y(i) - X.row(i).dot(fm.beta) - fm.group_effects.at(groups[static_cast<std::size_t>(i)]);
        rss += e * e;
    }
    fm.residual_sum_squares = rss;
    return fm;
}

inline FittedModel fit(const Design& design, const ModelSpec& spec, const FitOptions& options = {}) {
    auto fm = fit(design.y, design.X, design.groups, options, design.column_names);
    fm.spec = spec;
    fm.n_dropped = design.dropped.size();
    if (fm.n_dropped > 0) {
        fm.warnings.push_back("listwise deletion dropped " + std::to_string(fm.n_dropped) + " of " +
                              std::to_string(design.n_input) + " rows");
    }
    return fm;
}

inline FittedModel fit(const ReferenceClass& rc, const MacroMap& macro, const ModelSpec& spec,
                       const FitOptions& options = {}) {
    return fit(build_design(rc, macro, spec), spec, options);
}

}  // namespace refcast::lmm
