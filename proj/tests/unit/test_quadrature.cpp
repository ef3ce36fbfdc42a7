#include <gtest/gtest.h>

#include "nhyb/quadrature.hpp"

using namespace nhyb;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

/// int over the reference triangle of x^p y^q = p! q! / (p + q + 2)!.
double monomial_integral(int p, int q) { return factorial(p) * factorial(q) / factorial(p + q + 2); }

double apply(const QuadratureRule& r, int p, int q) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r.weights[k] * std::pow(r.points[k][1], p) * std::pow(r.points[k][2], q);
    return s;
}

}  // namespace

class TriangleExactness : public ::testing::TestWithParam<int> {};

TEST_P(TriangleExactness, MonomialsUpToDegree) {
    const QuadratureRule r = triangle_rule(GetParam());
    double wsum = 0.0;
    for (double w : r.weights) {
        EXPECT_GT(w, 0.0);
        wsum += w;
    }
    EXPECT_NEAR(wsum, 0.5, 1e-14);
    for (const auto& l : r.points) EXPECT_NEAR(l[0] + l[1] + l[2], 1.0, 1e-14);
    for (int d = 0; d <= r.degree; ++d)
        for (int p = 0; p <= d; ++p) EXPECT_NEAR(apply(r, p, d - p), monomial_integral(p, d - p), 1e-13) << p << "," << d - p;
}

INSTANTIATE_TEST_SUITE_P(Degrees, TriangleExactness, ::testing::Values(1, 2, 3, 4, 5, 6, 7, 8));

TEST(Quadrature, DegreeTooLow) {
    try {
        triangle_rule(0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::QuadratureOrderTooLow);
    }
}

TEST(Quadrature, SubdivisionKeepsExactness) {
    const QuadratureRule r = subdivide(triangle_rule(4), 2);
    EXPECT_EQ(r.size(), 16u * 6u);
    for (int p = 0; p <= 4; ++p) EXPECT_NEAR(apply(r, p, 4 - p), monomial_integral(p, 4 - p), 1e-14);
}

TEST(Quadrature, GaussLegendre) {
    for (int n = 1; n <= 5; ++n) {
        const LineRule r = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (std::size_t k = 0; k < r.points.size(); ++k) s += r.weights[k] * std::pow(r.points[k], d);
            EXPECT_NEAR(s, 1.0 / (d + 1), 1e-15);
        }
    }
}
