#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nhyb/geometry.hpp"

using namespace nhyb;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an nhyb::Error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Geometry, WellPartition) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    ASSERT_EQ(part.buffer().size(), 1u);
    const BoundingBox box = bounding_box(part.buffer()[0]);
    EXPECT_NEAR(box.lo.x, 0.4, 1e-15);
    EXPECT_NEAR(box.hi.y, 0.6, 1e-15);
    EXPECT_NEAR(part.interface_length(), 0.8, 1e-14);
    EXPECT_NEAR(part.gap(), 0.05, 1e-12);
    EXPECT_NEAR(part.defect_area(), 0.01, 1e-15);
}

TEST(Geometry, WellEscapingDomain) {
    EXPECT_EQ(code_of([] { build_partition(WellDefect{{0.5, 0.5}, 0.2}, 0.4); }), ErrorCode::BufferEscapesDomain);
}

TEST(Geometry, DegenerateInputs) {
    EXPECT_EQ(code_of([] { build_partition(WellDefect{{0.5, 0.5}, 0.0}, 0.05); }), ErrorCode::DegenerateShape);
    EXPECT_EQ(code_of([] { build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.0); }), ErrorCode::DegenerateShape);
    EXPECT_EQ(code_of([] { build_partition(ChannelDefect{{{0.2, 0.5}, {0.8, 0.5}}, -1.0}, 0.05); }),
              ErrorCode::DegenerateShape);
}

TEST(Geometry, EllipseRectangleAndGap) {
    EllipseDefect e;
    e.ellipses.push_back({{0.5, 0.5}, 0.25, 0.01, 0.0});
    const RegionPartition part = build_partition(e, 0.02);
    const BoundingBox box = bounding_box(part.buffer()[0]);
    EXPECT_NEAR(box.hi.x - box.lo.x, 0.54, 1e-14);
    EXPECT_NEAR(box.hi.y - box.lo.y, 0.06, 1e-14);
    EXPECT_NEAR(part.gap(), 0.02, 1e-12);
}

TEST(Geometry, PolygonizeEllipse) {
    const Polygon sq = polygonize_ellipse({0, 0}, 1, 1, 0, 4, 4);
    ASSERT_EQ(sq.size(), 4u);
    EXPECT_NEAR(sq[0].x, 1.0, 1e-15);
    EXPECT_NEAR(sq[1].y, 1.0, 1e-15);
    EXPECT_NEAR(sq[2].x, -1.0, 1e-15);
    EXPECT_NEAR(sq[3].y, -1.0, 1e-15);

    const Polygon thin = polygonize_ellipse({0.5, 0.5}, 0.25, 0.01, 0.0, 64);
    EXPECT_EQ(thin.size(), 64u);
    EXPECT_NEAR(signed_area(thin) / (pi * 0.25 * 0.01), 1.0, 0.01);

    EXPECT_EQ(code_of([] { polygonize_ellipse({0, 0}, 1, 1, 0, 7); }), ErrorCode::InvalidArgument);
}

TEST(Geometry, ChannelIsMiteredOffset) {
    const std::vector<Vec2> spine{{0.25, 0.75}, {0.65, 0.75}, {0.65, 0.25}};
    const RegionPartition part = build_partition(ChannelDefect{spine, 0.05}, 0.025);
    EXPECT_NEAR(part.gap(), 0.025, 1e-12);
    // each arm contributes length x width; the corner square is shared
    EXPECT_NEAR(part.defect_area(), 0.05 * (0.4 + 0.025) + 0.05 * (0.5 - 0.025), 1e-14);
    EXPECT_EQ(part.classify({0.45, 0.75}), Region::Defect);
    EXPECT_EQ(part.classify({0.45, 0.795}), Region::Buffer);
    EXPECT_EQ(part.classify({0.45, 0.85}), Region::Exterior);
}

TEST(Geometry, ClassificationTies) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    EXPECT_EQ(part.classify({0.55, 0.5}), Region::Defect);  // on the defect boundary
    EXPECT_EQ(part.classify({0.6, 0.5}), Region::Buffer);   // on Gamma
    EXPECT_EQ(part.classify({0.6 + 1e-9, 0.5}), Region::Exterior);
}

TEST(Geometry, ClassificationIsAPartition) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        const Vec2 p{u(rng), u(rng)};
        const bool in_k0 = std::abs(p.x - 0.5) <= 0.05 && std::abs(p.y - 0.5) <= 0.05;
        const bool in_k1 = std::abs(p.x - 0.5) <= 0.1 && std::abs(p.y - 0.5) <= 0.1;
        const Region expected = in_k0 ? Region::Defect : (in_k1 ? Region::Buffer : Region::Exterior);
        ASSERT_EQ(part.classify(p), expected);
    }
}

TEST(Geometry, PolygonRoundTrip) {
    const Polygon p = polygonize_ellipse({0.3, 0.4}, 0.2, 0.1, 0.3, 16);
    std::stringstream ss;
    write_polygon(ss, p);
    const Polygon q = read_polygon(ss);
    ASSERT_EQ(q.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], q[i]);
}

TEST(Geometry, SelfIntersection) {
    EXPECT_TRUE(polygon_self_intersects({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    EXPECT_FALSE(polygon_self_intersects(axis_square({0.5, 0.5}, 0.1)));
}
