#pragma once

/// Coefficient fields of the two model problems, the hybrid blend
/// b = rho a_eps + (1 - rho) A_h and M(lambda, Lambda) certification.

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "transition.hpp"

namespace nhyb {

/// Pointwise 2x2 coefficient with declared bounds: for every x and xi,
/// xi.a xi >= lambda |xi|^2 and xi.a xi >= |a xi|^2 / Lambda.
struct MatrixField {
    std::function<Mat2(Vec2)> eval;
    double lambda = 1.0;
    double Lambda = 1.0;
    std::string name;

    Mat2 operator()(Vec2 x) const { return eval(x); }
};

inline MatrixField constant_field(Mat2 a, std::string name = "constant") {
    const auto e = a.sym_eigenvalues();
    return {[a](Vec2) { return a; }, e[0], e[1], std::move(name)};
}

inline MatrixField constant_field(double c, std::string name = "constant") {
    return constant_field(Mat2::scalar(c), std::move(name));
}

namespace detail {

inline void require_coercive_radii(double R1, double R2) {
    require(R2 >= 0.0, ErrorCode::InvalidArgument, "R2 must be non-negative");
    require(R1 > R2, ErrorCode::NonCoercive, "R1 must exceed R2 for a coercive coefficient");
}

inline double example1_numerator(Vec2 x, double R1, double R2) {
    return (R1 + R2 * std::sin(2 * pi * x.x)) * (R1 + R2 * std::cos(2 * pi * x.y));
}

}  // namespace detail

/// a_eps(x) = (R1 + R2 sin 2pi x1)(R1 + R2 cos 2pi x2) /
///            ((R1 + R2 sin 2pi x1/eps)(R1 + R2 sin 2pi x2/eps)) I.
inline MatrixField example1_micro(double R1, double R2, double eps) {
    detail::require_coercive_radii(R1, R2);
    require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
    const double lo = (R1 - R2) * (R1 - R2) / ((R1 + R2) * (R1 + R2));
    return {[=](Vec2 x) {
                const double den = (R1 + R2 * std::sin(2 * pi * x.x / eps)) * (R1 + R2 * std::sin(2 * pi * x.y / eps));
                return Mat2::scalar(detail::example1_numerator(x, R1, R2) / den);
            },
            lo, 1.0 / lo, "example1_micro"};
}

/// Closed-form effective matrix: numerator / (R1 sqrt(R1^2 - R2^2)) I.
inline MatrixField example1_effective(double R1, double R2) {
    detail::require_coercive_radii(R1, R2);
    const double den = R1 * std::sqrt(R1 * R1 - R2 * R2);
    return {[=](Vec2 x) { return Mat2::scalar(detail::example1_numerator(x, R1, R2) / den); },
            (R1 - R2) * (R1 - R2) / den, (R1 + R2) * (R1 + R2) / den, "example1_effective"};
}

/// Fast part of the first model: a(x, y) with y the cell variable.
inline std::function<Mat2(Vec2, Vec2)> example1_two_scale(double R1, double R2) {
    detail::require_coercive_radii(R1, R2);
    return [=](Vec2 x, Vec2 y) {
        const double den = (R1 + R2 * std::sin(2 * pi * y.x)) * (R1 + R2 * std::sin(2 * pi * y.y));
        return Mat2::scalar(detail::example1_numerator(x, R1, R2) / den);
    };
}

/// Rough coefficient inside the defect of the second model. The first floor
/// is taken of the whole product 8 (i x2 - x1 / (i + 1)).
inline double example2_rough(Vec2 x) {
    double s = 0.0;
    for (int j = 0; j <= 4; ++j)
        for (int i = 1; i <= j; ++i)
            s += std::cos(std::floor(8.0 * (i * x.y - x.x / (i + 1))) + std::floor(150.0 * i * x.x) +
                          std::floor(150.0 * x.y)) /
                 (j + 1);
    return 3.0 + s / 7.0;
}

inline double example2_oscillatory(Vec2 x, double eps) {
    return 2.1 + std::cos(2 * pi * x.x / eps) * std::cos(2 * pi * x.y / eps) + std::sin(4 * x.x * x.x * x.y * x.y);
}

namespace detail {
/// Bounds on the unit square: sin(4 t), t in [0, 1], ranges over [sin 4, 1].
inline constexpr double kExample2OscLower = 1.1 - 0.75680249530792825;
inline constexpr double kExample2OscUpper = 4.1;
/// |(1/7) sum_j sum_{i<=j} 1/(j+1)| <= (1/2 + 2/3 + 3/4 + 4/5) / 7.
inline constexpr double kExample2RoughSpread = (0.5 + 2.0 / 3.0 + 0.75 + 0.8) / 7.0;
}  // namespace detail

/// a_eps = 1_{K0} a_rough + (1 - 1_{K0}) a_osc.
inline MatrixField example2_micro(double eps, std::function<bool(Vec2)> in_defect) {
    require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
    return {[=, in_defect = std::move(in_defect)](Vec2 x) {
                return Mat2::scalar(in_defect(x) ? example2_rough(x) : example2_oscillatory(x, eps));
            },
            detail::kExample2OscLower, detail::kExample2OscUpper, "example2_micro"};
}

inline std::function<Mat2(Vec2, Vec2)> example2_two_scale() {
    return [](Vec2 x, Vec2 y) {
        return Mat2::scalar(2.1 + std::cos(2 * pi * y.x) * std::cos(2 * pi * y.y) + std::sin(4 * x.x * x.x * x.y * x.y));
    };
}

/// Effective field of the second model: a_rough in K0, `outside` elsewhere.
inline MatrixField example2_effective(MatrixField outside, std::function<bool(Vec2)> in_defect) {
    const double lo = std::min(outside.lambda, 3.0 - detail::kExample2RoughSpread);
    const double hi = std::max(outside.Lambda, 3.0 + detail::kExample2RoughSpread);
    return {[out = std::move(outside.eval), in_defect = std::move(in_defect)](Vec2 x) {
                return in_defect(x) ? Mat2::scalar(example2_rough(x)) : out(x);
            },
            lo, hi, "example2_effective"};
}

/// b(x) = rho(x) a_eps(x) + (1 - rho(x)) A_h(x).
class HybridCoefficient {
public:
    HybridCoefficient(TransitionFunction rho, MatrixField micro, MatrixField macro)
        : rho_(std::move(rho)), micro_(std::move(micro)), macro_(std::move(macro)) {}

    Mat2 operator()(Vec2 x) const {
        const double r = rho_(x);
        if (r <= 0.0) return macro_(x);
        if (r >= 1.0) return micro_(x);
        return micro_(x) * r + macro_(x) * (1.0 - r);
    }

    double rho(Vec2 x) const { return rho_(x); }
    double lambda() const { return std::min(micro_.lambda, macro_.lambda); }
    double Lambda() const { return std::max(micro_.Lambda, macro_.Lambda); }
    const TransitionFunction& transition() const { return rho_; }
    const MatrixField& micro() const { return micro_; }
    const MatrixField& macro() const { return macro_; }

    MatrixField as_field() const {
        return {[self = *this](Vec2 x) { return self(x); }, lambda(), Lambda(), "hybrid"};
    }

private:
    TransitionFunction rho_;
    MatrixField micro_;
    MatrixField macro_;
};

inline HybridCoefficient hybridize(TransitionFunction rho, MatrixField micro, MatrixField macro) {
    return HybridCoefficient(std::move(rho), std::move(micro), std::move(macro));
}

/// max over samples of |A(x) - A_h(x)|_F.
template <class F, class G>
double e_hmm(const F& a, const G& ah, std::span<const Vec2> samples) {
    require(!samples.empty(), ErrorCode::InvalidArgument, "e(HMM) needs at least one sample point");
    double worst = 0.0;
    for (const Vec2& x : samples) worst = std::max(worst, (a(x) - ah(x)).frobenius());
    return worst;
}

struct Certification {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_lower_margin = std::numeric_limits<double>::infinity();  ///< min of xi.a xi - lambda |xi|^2
    double worst_upper_margin = std::numeric_limits<double>::infinity();  ///< min of xi.a xi - |a xi|^2 / Lambda
    bool ok() const { return violations == 0; }
};

/// Checks both M(lambda, Lambda) inequalities at the given points for
/// `directions` random unit vectors each (plus the coordinate axes).
template <class F>
Certification certify(const F& a, double lambda, double Lambda, std::span<const Vec2> points, int directions = 8,
                      std::uint64_t seed = 1, double rel_tol = 1e-12) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    Certification c;
    std::vector<Vec2> xi{{1, 0}, {0, 1}};
    for (int k = 0; k < directions; ++k) {
        const double t = angle(rng);
        xi.push_back({std::cos(t), std::sin(t)});
    }
    for (const Vec2& x : points) {
        const Mat2 m = a(x);
        for (const Vec2& d : xi) {
            const Vec2 ad = m * d;
            const double q = dot(d, ad);
            const double lower = q - lambda;
            const double upper = q - dot(ad, ad) / Lambda;
            c.worst_lower_margin = std::min(c.worst_lower_margin, lower);
            c.worst_upper_margin = std::min(c.worst_upper_margin, upper);
            ++c.checks;
            if (lower < -rel_tol * std::max(1.0, q) || upper < -rel_tol * std::max(1.0, q)) ++c.violations;
        }
    }
    return c;
}

}  // namespace nhyb
