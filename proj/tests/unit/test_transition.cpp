#include <gtest/gtest.h>

#include <random>

#include "nhyb/transition.hpp"

using namespace nhyb;

namespace {

RegionPartition well() { return build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05); }

std::vector<Vec2> random_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts(n);
    for (Vec2& p : pts) p = {u(rng), u(rng)};
    return pts;
}

}  // namespace

TEST(CosineProfile, Values) {
    EXPECT_DOUBLE_EQ(cosine_profile(0.0, 0.05, 0.05), 1.0);
    EXPECT_DOUBLE_EQ(cosine_profile(0.05, 0.05, 0.05), 1.0);
    EXPECT_NEAR(cosine_profile(0.1, 0.05, 0.05), 0.0, 1e-15);
    EXPECT_NEAR(cosine_profile(0.075, 0.05, 0.05), 0.5, 1e-15);
    EXPECT_NEAR(cosine_profile(-0.075, 0.05, 0.05), 0.5, 1e-15);
    EXPECT_EQ(cosine_profile(0.2, 0.05, 0.05), 0.0);
}

TEST(C1Transition, CenterAndHalfway) {
    const TransitionFunction rho = build_c1_well_transition({0.5, 0.5}, 0.05, 0.05);
    EXPECT_EQ(rho.kind(), TransitionFunction::Kind::C1Well);
    EXPECT_DOUBLE_EQ(rho({0.5, 0.5}), 1.0);
    EXPECT_NEAR(rho({0.5 + 0.075, 0.5}), 0.5, 1e-14);
    EXPECT_EQ(rho({0.9, 0.5}), 0.0);
}

TEST(C1Transition, RejectsDegenerateSizes) {
    EXPECT_THROW(build_c1_well_transition({0.5, 0.5}, 0.0, 0.05), Error);
    EXPECT_THROW(build_c1_well_transition({0.5, 0.5}, 0.05, -1.0), Error);
}

TEST(C1Transition, DerivativeIsContinuous) {
    const double L = 0.05, d = 0.05;
    auto mu = [&](double t) { return cosine_profile(t, L, d); };
    // second-order one-sided differences, each side smooth up to the knot
    auto left = [&](double k, double s) { return (3 * mu(k) - 4 * mu(k - s) + mu(k - 2 * s)) / (2 * s); };
    auto right = [&](double k, double s) { return (-3 * mu(k) + 4 * mu(k + s) - mu(k + 2 * s)) / (2 * s); };
    for (double knot : {L, L + d}) {
        const double coarse = std::abs(left(knot, 1e-3) - right(knot, 1e-3));
        const double fine = std::abs(left(knot, 5e-4) - right(knot, 5e-4));
        EXPECT_LT(coarse, 0.1) << "knot " << knot;
        EXPECT_LT(fine / coarse, 0.26) << "knot " << knot;  // at least second order
    }
    const double s = 1e-5;
    EXPECT_NEAR((mu(L + d / 2 + s) - mu(L + d / 2 - s)) / (2 * s), -pi / (2 * d), 1e-4);
}

TEST(C0Transition, CornerDiagonalMidpoint) {
    const RegionPartition part = well();
    const TransitionFunction rho = build_c0_transition(part, build_ring(part));
    EXPECT_EQ(rho.kind(), TransitionFunction::Kind::C0Ring);
    const Triangulation& ring = *rho.ring();
    bool has_diagonal = false;
    for (std::size_t t = 0; t < ring.num_triangles(); ++t) {
        const auto c = ring.corners(t);
        int hits = 0;
        for (const Vec2& p : c) hits += (distance(p, {0.45, 0.45}) < 1e-14) + (distance(p, {0.4, 0.4}) < 1e-14);
        has_diagonal = has_diagonal || hits == 2;
    }
    ASSERT_TRUE(has_diagonal);
    EXPECT_NEAR(rho({0.425, 0.425}), 0.5, 1e-14);
}

TEST(C0Transition, NodalValues) {
    const RegionPartition part = well();
    const TransitionFunction rho = build_c0_transition(part, build_ring(part, 0.02));
    const Triangulation& ring = *rho.ring();
    for (std::size_t v = 0; v < ring.num_vertices(); ++v) {
        const Vec2 p = ring.vertex(static_cast<int>(v));
        const double expect = distance_to_boundary(part.defect()[0], p) < 1e-12 ? 1.0 : 0.0;
        EXPECT_EQ(rho.nodal_values()[v], expect);
        EXPECT_NEAR(rho(p), expect, 1e-12);
    }
}

TEST(C0Transition, VertexOffBoundaryRejected) {
    const RegionPartition part = well();
    const Triangulation bad({{0.45, 0.45}, {0.4, 0.4}, {0.5, 0.42}}, {{0, 1, 2}});
    try {
        build_c0_transition(part, bad);
        FAIL() << "expected RingVertexOffBoundary";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RingVertexOffBoundary);
    }
}

class TransitionKinds : public ::testing::TestWithParam<int> {};

TEST_P(TransitionKinds, RangeAndSupport) {
    const RegionPartition part = well();
    const TransitionFunction rho = GetParam() == 0 ? build_c0_transition(part, build_ring(part, 0.03))
                                                   : build_c1_well_transition({0.5, 0.5}, 0.05, 0.05);
    for (const Vec2& p : random_points(100000, 7)) {
        const double r = rho(p);
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 1.0);
        switch (part.classify(p)) {
            case Region::Defect: ASSERT_EQ(r, 1.0) << p.x << ' ' << p.y; break;
            case Region::Exterior: ASSERT_EQ(r, 0.0) << p.x << ' ' << p.y; break;
            case Region::Buffer: break;
        }
    }
    for (const Polygon& loop : part.interface_loops())
        for (std::size_t i = 0; i < loop.size(); ++i)
            for (double s : {0.0, 0.3, 0.77}) {
                const Vec2 p = loop[i] + (loop[(i + 1) % loop.size()] - loop[i]) * s;
                EXPECT_NEAR(rho(p), 0.0, 1e-12);
            }
}

INSTANTIATE_TEST_SUITE_P(Both, TransitionKinds, ::testing::Values(0, 1));

TEST(C0Transition, ContinuousAcrossRing) {
    const RegionPartition part = build_partition(ChannelDefect{{{0.25, 0.75}, {0.65, 0.75}, {0.65, 0.25}}, 0.05}, 0.025);
    const TransitionFunction rho = build_c0_transition(part, build_ring(part, 0.01));
    // Lipschitz bound: |grad rho| <= 1 / (min ring height), sampled along short segments
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0), ang(0.0, 2 * pi);
    const double step = 1e-7;
    double worst = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const Vec2 p{u(rng), u(rng)};
        const double t = ang(rng);
        const Vec2 q = p + Vec2{std::cos(t), std::sin(t)} * step;
        worst = std::max(worst, std::abs(rho(p) - rho(q)) / step);
    }
    EXPECT_LT(worst, 10.0 / part.gap());
}
