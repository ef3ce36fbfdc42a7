#include <gtest/gtest.h>

#include <sstream>

#include "nhyb/upscaling.hpp"

using namespace nhyb;

TEST(CellProblem, ConstantField) {
    CellOptions opt;
    opt.resolution = 8;
    const CellResult r = cell_problem([](Vec2, Vec2) { return Mat2::scalar(2.5); }, {0.3, 0.3}, opt);
    EXPECT_NEAR(r.effective.xx, 2.5, 1e-12);
    EXPECT_NEAR(r.effective.yy, 2.5, 1e-12);
    EXPECT_NEAR(r.effective.xy, 0.0, 1e-12);
    EXPECT_NEAR(r.effective.yx, 0.0, 1e-12);
}

TEST(CellProblem, LayeredField) {
    CellOptions opt;
    opt.resolution = 128;
    const CellResult r =
        cell_problem([](Vec2, Vec2 y) { return Mat2::scalar(2.0 + std::sin(2 * pi * y.x)); }, {0.0, 0.0}, opt);
    EXPECT_NEAR(r.effective.xx, std::sqrt(3.0), 1e-3);
    EXPECT_NEAR(r.effective.yy, 2.0, 1e-3);
    EXPECT_NEAR(r.effective.xy, 0.0, 1e-10);
    EXPECT_LT(std::abs(r.effective.xy - r.effective.yx), 1e-10);
    EXPECT_GE(r.eigenvalues[0], r.reuss - 1e-3);
    EXPECT_LE(r.eigenvalues[1], r.voigt + 1e-3);
}

TEST(CellProblem, ExampleOneMatchesClosedForm) {
    CellOptions opt;
    opt.resolution = 128;
    const FastField a = example1_two_scale(2.5, 1.5);
    const MatrixField exact = example1_effective(2.5, 1.5);
    for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.25, 0.0}, Vec2{0.7, 0.4}}) {
        const CellResult r = cell_problem(a, x, opt);
        const double e = exact(x).xx;
        EXPECT_NEAR(r.effective.xx, e, 0.01 * e);
        EXPECT_NEAR(r.effective.yy, e, 0.01 * e);
        EXPECT_LT(std::abs(r.effective.xy - r.effective.yx), 1e-10);
        EXPECT_GE(r.eigenvalues[0], r.reuss - 1e-3);
        EXPECT_LE(r.eigenvalues[1], r.voigt + 1e-3);
    }
}

TEST(CellProblem, AnisotropicFullMatrix) {
    // a(y) = R(theta) diag(1 + 0.5 cos 2pi y1, 1) R(theta)^T stays symmetric after homogenization
    const double th = 0.4, c = std::cos(th), s = std::sin(th);
    const FastField a = [=](Vec2, Vec2 y) {
        const double d = 1.0 + 0.5 * std::cos(2 * pi * y.x);
        return Mat2::symmetric(c * c * d + s * s, c * s * (d - 1.0), s * s * d + c * c);
    };
    CellOptions opt;
    opt.resolution = 32;
    const CellResult r = cell_problem(a, {0, 0}, opt);
    EXPECT_LT(std::abs(r.effective.xy - r.effective.yx), 1e-10);
    EXPECT_GT(std::abs(r.effective.xy), 1e-3);
    const Certification cert = certify([&](Vec2) { return r.effective; }, 0.5, 1.5, std::vector<Vec2>{{0, 0}});
    EXPECT_TRUE(cert.ok());
}

TEST(Tabulated, ConstantAndSinglePoint) {
    CellOptions opt;
    opt.resolution = 8;
    const TabulatedField f = tabulate_effective([](Vec2, Vec2) { return Mat2::scalar(3.0); }, 3, 3, {0, 0}, {1, 1}, opt);
    for (Vec2 x : {Vec2{0.1, 0.9}, Vec2{0.5, 0.5}, Vec2{-1, 2}}) EXPECT_NEAR(f(x).xx, 3.0, 1e-12);
    const TabulatedField one =
        tabulate_effective([](Vec2 x, Vec2) { return Mat2::scalar(1.0 + x.x); }, 1, 1, {0.5, 0.5}, {0.5, 0.5}, opt);
    EXPECT_NEAR(one({0.0, 0.0}).xx, 1.5, 1e-12);
    EXPECT_NEAR(one({0.9, 0.1}).xx, 1.5, 1e-12);
}

TEST(Tabulated, BilinearInterpolation) {
    TabulatedField f;
    f.nx = 2;
    f.ny = 2;
    f.values = {Mat2::scalar(1), Mat2::scalar(2), Mat2::scalar(3), Mat2::scalar(4)};
    EXPECT_NEAR(f({0.5, 0.5}).xx, 2.5, 1e-15);
    EXPECT_NEAR(f({1.0, 0.0}).xx, 2.0, 1e-15);
    EXPECT_NEAR(f({0.25, 1.0}).xx, 3.25, 1e-15);
}

TEST(Tabulated, ExampleOneGrid) {
    CellOptions opt;
    opt.resolution = 32;
    TabulationReport rep;
    const FastField a = example1_two_scale(2.5, 1.5);
    const MatrixField exact = example1_effective(2.5, 1.5);
    const TabulatedField f = tabulate_effective(a, 17, 17, {0, 0}, {1, 1}, opt, &rep);
    ASSERT_EQ(rep.cells.size(), 289u);
    std::vector<Vec2> samples;
    for (int j = 0; j <= 80; ++j)
        for (int i = 0; i <= 80; ++i) samples.push_back({i / 80.0, j / 80.0});

    // bilinear interpolation of the closed form itself on the 17 x 17 grid
    TabulatedField interp = f;
    for (int j = 0; j < 17; ++j)
        for (int i = 0; i < 17; ++i) interp.values[static_cast<std::size_t>(j * 17 + i)] = exact(f.node(i, j));
    const double interp_err = e_hmm(exact, interp, samples);
    EXPECT_NEAR(interp_err, 0.0610639, 1e-6);
    EXPECT_LT(e_hmm(exact, f, samples), interp_err + 0.005);

    CellOptions coarse;
    coarse.resolution = 16;
    const TabulatedField fine_grid = tabulate_effective(a, 33, 33, {0, 0}, {1, 1}, coarse);
    EXPECT_LT(e_hmm(exact, fine_grid, samples), 0.05);

    const MatrixField field = f.as_field();
    EXPECT_TRUE(certify(field, field.lambda, field.Lambda, samples).ok());
    // membership with the micro field's bounds
    const MatrixField micro = example1_micro(2.5, 1.5, 0.01);
    EXPECT_TRUE(certify(field, micro.lambda, micro.Lambda, samples).ok());
    for (const CellResult& r : rep.cells) {
        EXPECT_GE(r.eigenvalues[0], r.reuss - 1e-3);
        EXPECT_LE(r.eigenvalues[1], r.voigt + 1e-3);
        EXPECT_LT(std::abs(r.effective.xy - r.effective.yx), 1e-10);
    }
}

TEST(CellProblem, PointwiseExampleOneAtFineResolution) {
    CellOptions opt;
    opt.resolution = 256;
    const CellResult r = cell_problem(example1_two_scale(2.5, 1.5), {0.25, 0.0}, opt);
    const std::vector<Vec2> at{{0.25, 0.0}};
    EXPECT_LT(e_hmm(example1_effective(2.5, 1.5), [&](Vec2) { return r.effective; }, at), 0.05);
    EXPECT_NEAR(r.effective.xx, 3.2, 1e-4);
}

TEST(Tabulated, CsvRoundTrip) {
    TabulatedField f;
    f.nx = 3;
    f.ny = 2;
    f.lo = {0.1, 0.2};
    f.hi = {0.9, 0.6};
    for (int k = 0; k < 6; ++k) f.values.push_back(Mat2::symmetric(2.0 + k, 0.1 * k, 3.0 - 0.2 * k));
    std::stringstream ss;
    write_tabulated_csv(ss, f);
    const TabulatedField g = read_tabulated_csv(ss);
    ASSERT_EQ(g.nx, 3);
    ASSERT_EQ(g.ny, 2);
    for (Vec2 x : {Vec2{0.3, 0.3}, Vec2{0.85, 0.55}, Vec2{0.1, 0.2}}) {
        EXPECT_NEAR(g(x).xx, f(x).xx, 1e-14);
        EXPECT_NEAR(g(x).xy, f(x).xy, 1e-14);
        EXPECT_NEAR(g(x).yy, f(x).yy, 1e-14);
    }
}
