#pragma once

#include <array>
#include <vector>

#include "core.hpp"

namespace nhyb {

/// Rule on the reference triangle in barycentric coordinates. Weights sum to
/// 1/2 (the reference area); physical weight = w * 2|tau|.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
    int degree = 0;
};

namespace detail {

inline void add_orbit3(QuadratureRule& r, double w, double a, double b) {
    r.points.push_back({a, b, b});
    r.points.push_back({b, a, b});
    r.points.push_back({b, b, a});
    for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
}

inline void add_orbit6(QuadratureRule& r, double w, double a, double b, double c) {
    for (auto p : {std::array{a, b, c}, std::array{a, c, b}, std::array{b, a, c}, std::array{b, c, a},
                   std::array{c, a, b}, std::array{c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(0.5 * w);
    }
}

}  // namespace detail

/// Smallest tabulated symmetric rule (Dunavant) exact for polynomials of
/// total degree `degree`. Supports degrees up to 8.
inline QuadratureRule triangle_rule(int degree) {
    require(degree >= 1, ErrorCode::QuadratureOrderTooLow, "quadrature degree must be at least 1");
    require(degree <= 8, ErrorCode::InvalidArgument, "quadrature degree above 8 is not tabulated");
    QuadratureRule r;
    if (degree == 1) {
        r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.weights.push_back(0.5);
        r.degree = 1;
    } else if (degree == 2) {
        detail::add_orbit3(r, 1.0 / 3, 2.0 / 3, 1.0 / 6);
        r.degree = 2;
    } else if (degree <= 4) {
        detail::add_orbit3(r, 0.223381589678011, 0.108103018168070, 0.445948490915965);
        detail::add_orbit3(r, 0.109951743655322, 0.816847572980459, 0.091576213509771);
        r.degree = 4;
    } else if (degree == 5) {
        r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.weights.push_back(0.5 * 0.225);
        detail::add_orbit3(r, 0.132394152788506, 0.059715871789770, 0.470142064105115);
        detail::add_orbit3(r, 0.125939180544827, 0.797426985353087, 0.101286507323456);
        r.degree = 5;
    } else if (degree == 6) {
        detail::add_orbit3(r, 0.116786275726379, 0.501426509658179, 0.249286745170910);
        detail::add_orbit3(r, 0.050844906370207, 0.873821971016996, 0.063089014491502);
        detail::add_orbit6(r, 0.082851075618374, 0.053145049844817, 0.310352451033784, 0.636502499121399);
        r.degree = 6;
    } else {
        r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.weights.push_back(0.5 * 0.144315607677787);
        detail::add_orbit3(r, 0.095091634267285, 0.081414823414554, 0.459292588292723);
        detail::add_orbit3(r, 0.103217370534718, 0.658861384496480, 0.170569307751760);
        detail::add_orbit3(r, 0.032458497623198, 0.898905543365938, 0.050547228317031);
        detail::add_orbit6(r, 0.027230314174435, 0.008394777409958, 0.263112829634638, 0.728492392955404);
        r.degree = 8;
    }
    return r;
}

/// Composite rule: the triangle is split into 4^levels congruent children
/// (midpoint refinement) and `base` is applied on each.
inline QuadratureRule subdivide(const QuadratureRule& base, int levels) {
    if (levels <= 0) return base;
    using Bary = std::array<double, 3>;
    std::vector<std::array<Bary, 3>> cells{{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}}};
    auto mid = [](const Bary& a, const Bary& b) {
        return Bary{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    };
    for (int l = 0; l < levels; ++l) {
        std::vector<std::array<Bary, 3>> next;
        next.reserve(cells.size() * 4);
        for (const auto& c : cells) {
            const Bary m01 = mid(c[0], c[1]), m12 = mid(c[1], c[2]), m20 = mid(c[2], c[0]);
            next.push_back({c[0], m01, m20});
            next.push_back({m01, c[1], m12});
            next.push_back({m20, m12, c[2]});
            next.push_back({m12, m20, m01});
        }
        cells = std::move(next);
    }
    QuadratureRule r;
    r.degree = base.degree;
    const double scale = 1.0 / static_cast<double>(cells.size());
    for (const auto& c : cells) {
        for (std::size_t q = 0; q < base.size(); ++q) {
            const auto& l = base.points[q];
            Bary p{};
            for (int k = 0; k < 3; ++k) p[k] = l[0] * c[0][k] + l[1] * c[1][k] + l[2] * c[2][k];
            r.points.push_back(p);
            r.weights.push_back(base.weights[q] * scale);
        }
    }
    return r;
}

/// Gauss-Legendre with n points (1..5), exact to degree 2n-1.
inline LineRule gauss_legendre(int n) {
    require(n >= 1 && n <= 5, ErrorCode::QuadratureOrderTooLow, "Gauss-Legendre supports 1..5 points");
    std::vector<double> x, w;
    switch (n) {
        case 1: x = {0.0}; w = {2.0}; break;
        case 2: x = {-0.577350269189625764509, 0.577350269189625764509}; w = {1.0, 1.0}; break;
        case 3:
            x = {-0.774596669241483377036, 0.0, 0.774596669241483377036};
            w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        case 4:
            x = {-0.861136311594052575224, -0.339981043584856264803, 0.339981043584856264803, 0.861136311594052575224};
            w = {0.347854845137453857373, 0.652145154862546142627, 0.652145154862546142627, 0.347854845137453857373};
            break;
        default:
            x = {-0.906179845938663992798, -0.538469310105683091036, 0.0, 0.538469310105683091036,
                 0.906179845938663992798};
            w = {0.236926885056189087514, 0.478628670499366468041, 0.568888888888888888889, 0.478628670499366468041,
                 0.236926885056189087514};
    }
    LineRule r;
    r.degree = 2 * n - 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.points.push_back(0.5 * (x[i] + 1.0));
        r.weights.push_back(0.5 * w[i]);
    }
    return r;
}

}  // namespace nhyb
