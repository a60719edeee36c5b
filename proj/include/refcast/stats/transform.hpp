#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "refcast/error.hpp"

namespace refcast::stats {

enum class TransformKind { identity, reciprocal, natural_log, sqrt, cbrt, fourth_root };

/// Variable transformation used to remove skewness before regression.
///
/// `forward` maps the raw variable onto the regression scale and `inverse`
/// maps a regression-scale value back. Every transformation is a bijection
/// between `in_domain` and `in_range`; calling either direction outside its
/// set throws DomainError. Logarithms are natural.
class Transformation {
public:
    constexpr Transformation() = default;
    constexpr explicit Transformation(TransformKind kind) : kind_(kind) {}

    static constexpr Transformation identity() { return Transformation{TransformKind::identity}; }
    static constexpr Transformation reciprocal() { return Transformation{TransformKind::reciprocal}; }
    static constexpr Transformation log() { return Transformation{TransformKind::natural_log}; }
    static constexpr Transformation sqrt() { return Transformation{TransformKind::sqrt}; }
    static constexpr Transformation cbrt() { return Transformation{TransformKind::cbrt}; }
    static constexpr Transformation fourth_root() { return Transformation{TransformKind::fourth_root}; }

    constexpr TransformKind kind() const { return kind_; }

    bool in_domain(double x) const {
        if (!std::isfinite(x)) return false;
        switch (kind_) {
            case TransformKind::reciprocal:
            case TransformKind::natural_log: return x > 0.0;
            case TransformKind::sqrt:
            case TransformKind::fourth_root: return x >= 0.0;
            case TransformKind::identity:
            case TransformKind::cbrt: return true;
        }
        return false;
    }

    // Image of the domain; the set on which `inverse` is defined.
    bool in_range(double y) const {
        if (!std::isfinite(y)) return false;
        switch (kind_) {
            case TransformKind::reciprocal: return y > 0.0;
            case TransformKind::sqrt:
            case TransformKind::fourth_root: return y >= 0.0;
            case TransformKind::natural_log:
            case TransformKind::identity:
            case TransformKind::cbrt: return true;
        }
        return false;
    }

    double forward(double x) const {
        if (!in_domain(x)) {
            throw DomainError(std::string(name()) + " transform undefined at " + std::to_string(x));
        }
        switch (kind_) {
            case TransformKind::identity: return x;
            case TransformKind::reciprocal: return 1.0 / x;
            case TransformKind::natural_log: return std::log(x);
            case TransformKind::sqrt: return std::sqrt(x);
            case TransformKind::cbrt: return std::cbrt(x);
            case TransformKind::fourth_root: return std::sqrt(std::sqrt(x));
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    double inverse(double y) const {
        if (!in_range(y)) {
            throw DomainError(std::string(name()) + " inverse undefined at " + std::to_string(y));
        }
        switch (kind_) {
            case TransformKind::identity: return y;
            case TransformKind::reciprocal: return 1.0 / y;
            case TransformKind::natural_log: return std::exp(y);
            case TransformKind::sqrt: return y * y;
            case TransformKind::cbrt: return y * y * y;
            case TransformKind::fourth_root: {
                const double sq = y * y;
                return sq * sq;
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    constexpr std::string_view name() const {
        switch (kind_) {
            case TransformKind::identity: return "identity";
            case TransformKind::reciprocal: return "reciprocal";
            case TransformKind::natural_log: return "log";
            case TransformKind::sqrt: return "sqrt";
            case TransformKind::cbrt: return "cbrt";
            case TransformKind::fourth_root: return "fourth_root";
        }
        return "?";
    }

    // Label for a transformed variable, e.g. "log(wall_length_m)".
    std::string apply_label(std::string_view variable) const {
        if (kind_ == TransformKind::identity) return std::string(variable);
        return std::string(name()) + "(" + std::string(variable) + ")";
    }

    static Transformation parse(std::string_view text) {
        if (text.empty() || text == "identity" || text == "none") return identity();
        if (text == "reciprocal" || text == "inverse" || text == "1/x") return reciprocal();
        if (text == "log" || text == "ln" || text == "natural_log") return log();
        if (text == "sqrt") return sqrt();
        if (text == "cbrt") return cbrt();
        if (text == "fourth_root" || text == "x^0.25") return fourth_root();
        throw InputError("unknown transformation '" + std::string(text) + "'");
    }

    friend constexpr bool operator==(Transformation, Transformation) = default;

private:
    TransformKind kind_ = TransformKind::identity;
};

inline constexpr std::array<Transformation, 6> kAllTransformations{
    Transformation::identity(), Transformation::reciprocal(), Transformation::log(),
    Transformation::sqrt(),     Transformation::cbrt(),       Transformation::fourth_root()};

}  // namespace refcast::stats
