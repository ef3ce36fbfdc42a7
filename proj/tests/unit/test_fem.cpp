#include <gtest/gtest.h>

#include <random>

#include "nhyb/fem.hpp"
#include "nhyb/solver.hpp"

using namespace nhyb;

namespace {

std::shared_ptr<const Triangulation> reference_triangle() {
    return std::make_shared<const Triangulation>(std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}},
                                                 std::vector<TriangleIndices>{{0, 1, 2}});
}

std::shared_ptr<const Triangulation> square(int n) { return std::make_shared<const Triangulation>(uniform_unit_square(n)); }

const auto unit = [](Vec2) { return Mat2::identity(); };

/// Series solution of -Laplace u = 1 on the unit square with zero boundary values.
double poisson_series(Vec2 x) {
    double s = 0.0;
    for (int m = 1; m < 200; m += 2)
        for (int n = 1; n < 200; n += 2)
            s += 16.0 / (pi * pi * pi * pi * m * n * (m * m + n * n)) * std::sin(m * pi * x.x) * std::sin(n * pi * x.y);
    return s;
}

}  // namespace

TEST(Fem, ReferenceTriangleStiffness) {
    const FeSpace space(reference_triangle());
    const CsrMatrix a = assemble_volume(space, unit);
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.at(i, j), expected[i][j], 1e-15);
}

TEST(Fem, ConstantCoefficientScales) {
    const FeSpace space(square(4));
    const CsrMatrix a = assemble_volume(space, unit);
    const CsrMatrix b = assemble_volume(space, [](Vec2) { return Mat2::scalar(3.5); });
    for (std::size_t k = 0; k < a.nonzeros(); ++k) EXPECT_NEAR(b.values()[k], 3.5 * a.values()[k], 1e-13);
}

TEST(Fem, MatchesDenseBruteForce) {
    const auto mesh = std::make_shared<const Triangulation>(std::vector<Vec2>{{0, 0}, {1, 0.1}, {0.2, 1}, {1.3, 1.2}},
                                                            std::vector<TriangleIndices>{{0, 1, 2}, {1, 3, 2}});
    // random symmetric field with eigenvalues in [1, 4]
    auto coef = [](Vec2 x) {
        const double th = 1.3 * x.x + 0.7 * std::sin(3 * x.y);
        const double l1 = 1.0 + 1.5 * (1 + std::sin(5 * x.x)) , l2 = 1.0 + 1.4 * (1 + std::cos(4 * x.y));
        const double c = std::cos(th), s = std::sin(th);
        return Mat2::symmetric(c * c * l1 + s * s * l2, c * s * (l1 - l2), s * s * l1 + c * c * l2);
    };
    for (int degree : {1, 2}) {
        const FeSpace space(mesh, degree);
        const QuadratureRule rule = triangle_rule(6);
        const CsrMatrix a = assemble_volume(space, coef, rule);
        // dense loop: explicit basis evaluation via finite differences of the shape values
        const std::size_t n = space.num_dofs();
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (std::size_t t = 0; t < 2; ++t) {
            const auto p = mesh->corners(t);
            const auto d = space.element_dofs(t);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Vec2 x = from_barycentric(p, rule.points[q]);
                const double w = rule.weights[q] * 2.0 * mesh->area(t);
                std::vector<Vec2> g(d.size());
                const double eps = 1e-6;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    std::vector<double> e(n, 0.0);
                    e[static_cast<std::size_t>(d[i])] = 1.0;
                    auto val = [&](Vec2 y) { return evaluate_in_element(space, e, t, y).value; };
                    g[i] = {(val(x + Vec2{eps, 0}) - val(x - Vec2{eps, 0})) / (2 * eps),
                            (val(x + Vec2{0, eps}) - val(x - Vec2{0, eps})) / (2 * eps)};
                }
                const Mat2 b = coef(x);
                for (std::size_t i = 0; i < d.size(); ++i)
                    for (std::size_t j = 0; j < d.size(); ++j)
                        dense[static_cast<std::size_t>(d[i])][static_cast<std::size_t>(d[j])] += w * dot(b * g[j], g[i]);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(a.at(int(i), int(j)), dense[i][j], 1e-8) << degree;
        EXPECT_LT(a.asymmetry(), 1e-13);
    }
}

TEST(Fem, KernelAndSymmetry) {
    const FeSpace space(square(8), 2);
    const CsrMatrix a = assemble_volume(space, [](Vec2 x) { return Mat2::scalar(2.0 + std::sin(7 * x.x)); });
    EXPECT_LT(a.asymmetry(), 1e-13);
    const std::vector<double> ones(space.num_dofs(), 1.0);
    for (double v : a * ones) EXPECT_LT(std::abs(v), 1e-11);
}

TEST(Fem, LoadVector) {
    const FeSpace space(reference_triangle());
    const std::vector<double> b = assemble_load(space, [](Vec2) { return 1.0; });
    for (double v : b) EXPECT_NEAR(v, 0.5 / 3.0, 1e-15);
    const std::vector<double> z = assemble_load(space, [](Vec2) { return 0.0; });
    for (double v : z) EXPECT_EQ(v, 0.0);
    // int x phi_i over the reference triangle: 1/12, 1/24, 1/24
    const std::vector<double> bx = assemble_load(space, [](Vec2 x) { return x.x; });
    EXPECT_NEAR(bx[0], 1.0 / 24, 1e-14);
    EXPECT_NEAR(bx[1], 1.0 / 12, 1e-14);
    EXPECT_NEAR(bx[2], 1.0 / 24, 1e-14);
}

TEST(Fem, DirichletEdgeCases) {
    const FeSpace space(square(1));
    const CsrMatrix a = assemble_volume(space, unit);
    const std::vector<double> b(space.num_dofs(), 1.0);
    const ReducedSystem all = apply_dirichlet(a, b, space.boundary_dofs());
    EXPECT_EQ(all.matrix.rows(), 0u);
    for (double v : all.expand({})) EXPECT_EQ(v, 0.0);
    const ReducedSystem none = apply_dirichlet(a, b, {});
    EXPECT_EQ(none.matrix.values(), a.values());
    EXPECT_EQ(none.rhs, b);
}

TEST(Fem, PoissonCenterValue) {
    const FeSpace space(square(64));
    const CsrMatrix a = assemble_volume(space, unit);
    const std::vector<double> b = assemble_load(space, [](Vec2) { return 1.0; });
    const ReducedSystem sys = apply_dirichlet(a, b, space.boundary_dofs());
    const SolveResult r = solve_spd(sys.matrix, sys.rhs);
    const std::vector<double> u = sys.expand(r.x);
    const double center = evaluate_fe_function(space, u, {0.5, 0.5}).value;
    EXPECT_NEAR(poisson_series({0.5, 0.5}), 0.0736713, 1e-7);
    EXPECT_NEAR(center, 0.0736713, 5e-5);
}

TEST(Fem, InhomogeneousDirichletReproducesLinear) {
    const FeSpace space(square(5));
    const CsrMatrix a = assemble_volume(space, unit);
    const std::vector<double> b(space.num_dofs(), 0.0);
    auto u = [](Vec2 x) { return 1.0 + 2.0 * x.x - 3.0 * x.y; };
    std::vector<double> g;
    for (int d : space.boundary_dofs()) g.push_back(u(space.dof_coordinates()[static_cast<std::size_t>(d)]));
    const ReducedSystem sys = apply_dirichlet(a, b, space.boundary_dofs(), g);
    const std::vector<double> full = sys.expand(solve_spd(sys.matrix, sys.rhs).x);
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full[i], u(space.dof_coordinates()[i]), 1e-9);
}

TEST(Fem, EvaluationReproducesPolynomials) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int degree : {1, 2}) {
        const FeSpace space(square(7), degree);
        auto lin = [](Vec2 x) { return 0.3 + 1.0 * x.x - 0.25 * x.y; };
        const std::vector<double> v = space.interpolate(lin);
        for (int k = 0; k < 200; ++k) {
            const Vec2 p{U(rng), U(rng)};
            const PointValue pv = evaluate_fe_function(space, v, p);
            EXPECT_NEAR(pv.value, lin(p), 1e-13);
            EXPECT_NEAR(pv.gradient.x, 1.0, 1e-12);
            EXPECT_NEAR(pv.gradient.y, -0.25, 1e-12);
        }
        if (degree == 2) {
            auto quad = [](Vec2 x) { return x.x * x.y + 2 * x.y * x.y; };
            const std::vector<double> w = space.interpolate(quad);
            const Vec2 p{0.31, 0.77};
            const PointValue pv = evaluate_fe_function(space, w, p);
            EXPECT_NEAR(pv.value, quad(p), 1e-13);
            EXPECT_NEAR(pv.gradient.x, p.y, 1e-12);
            EXPECT_NEAR(pv.gradient.y, p.x + 4 * p.y, 1e-12);
        }
    }
}

TEST(Fem, SharedVertexIsContinuous) {
    const FeSpace space(square(4));
    const std::vector<double> v = space.interpolate([](Vec2 x) { return x.x * x.x + x.y; });
    const Vec2 p{0.5, 0.5};
    const double ref = evaluate_fe_function(space, v, p).value;
    for (std::size_t t = 0; t < space.num_elements(); ++t) {
        const auto c = space.mesh().corners(t);
        if (c[0] == p || c[1] == p || c[2] == p) {
            EXPECT_NEAR(evaluate_in_element(space, v, t, p).value, ref, 1e-15);
        }
    }
}

TEST(Fem, PointOutside) {
    const FeSpace space(square(4));
    const std::vector<double> v(space.num_dofs(), 0.0);
    try {
        evaluate_fe_function(space, v, {1.5, 0.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PointOutsideMesh);
    }
}

TEST(Fem, QuadratureDegreeValidated) {
    const FeSpace space(square(2));
    EXPECT_THROW(assemble_volume(space, unit, 0), Error);
}
