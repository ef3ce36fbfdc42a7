#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "nhyb/mesh.hpp"

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

void expect_edges_on_gamma(const Triangulation& m, const RegionPartition& part) {
    for (const BoundaryEdge& e : m.boundary_edges()) {
        if (e.tag != EdgeTag::Interface) continue;
        double da = 1e300, db = 1e300;
        for (const Polygon& g : part.interface_loops()) {
            da = std::min(da, distance_to_boundary(g, m.vertex(e.a)));
            db = std::min(db, distance_to_boundary(g, m.vertex(e.b)));
        }
        EXPECT_LT(da, 1e-12);
        EXPECT_LT(db, 1e-12);
    }
}

}  // namespace

TEST(Mesh, UnitSquareStructured) {
    const Triangulation m = triangulate_region(unit_square_region(), 0.5);
    EXPECT_EQ(m.num_triangles(), 8u);
    EXPECT_EQ(m.num_vertices(), 9u);
    EXPECT_NEAR(m.total_area(), 1.0, 1e-15);
    EXPECT_TRUE(m.fully_tagged());
    EXPECT_EQ(m.boundary_edges().size(), 8u);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) EXPECT_GT(m.area(t), 0.0);
}

TEST(Mesh, ExteriorRegionArea) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    const double target = 1.0 / 32;
    const Triangulation m = triangulate_region(exterior_region(part), target);
    EXPECT_LE(m.max_diameter(), 1.5 * target);
    EXPECT_NEAR(m.total_area(), 0.96, 1e-10);
    EXPECT_TRUE(m.fully_tagged());
    expect_edges_on_gamma(m, part);
}

TEST(Mesh, UnstructuredHoleRegion) {
    EllipseDefect e;
    e.ellipses.push_back({{0.5, 0.5}, 0.2, 0.1, 0.4});
    const RegionPartition part = build_partition(e, 0.05);
    PolygonalRegion region = unit_square_region();
    region.holes.emplace_back(part.defect()[0], EdgeTag::Interface);
    const double target = 0.05;
    MeshOptions opt;
    const Triangulation m = triangulate_region(region, target, opt);
    EXPECT_NEAR(m.total_area(), 1.0 - part.defect_area(), 1e-10);
    EXPECT_LE(m.max_diameter(), 1.5 * target);
    EXPECT_TRUE(m.fully_tagged());
    EXPECT_TRUE(std::isfinite(m.chunkiness()));
}

TEST(Mesh, RotatedBufferUsesDelaunay) {
    EllipseDefect e;
    e.ellipses.push_back({{0.5, 0.5}, 0.2, 0.05, 0.5});
    const RegionPartition part = build_partition(e, 0.05);
    const Triangulation inner = triangulate_region(buffer_region(part), 0.02);
    const Triangulation outer = triangulate_region(exterior_region(part), 0.04);
    EXPECT_NEAR(inner.total_area() + outer.total_area(), 1.0, 1e-10);
    EXPECT_LE(inner.max_diameter(), 1.5 * 0.02);
    EXPECT_LE(outer.max_diameter(), 1.5 * 0.04);
    expect_edges_on_gamma(inner, part);
    expect_edges_on_gamma(outer, part);
}

TEST(Mesh, BowtieRejected) {
    PolygonalRegion r;
    r.outers.emplace_back(Polygon{{0.1, 0.1}, {0.9, 0.9}, {0.9, 0.1}, {0.1, 0.9}}, EdgeTag::Dirichlet);
    EXPECT_EQ(code_of([&] { triangulate_region(r, 0.1); }), ErrorCode::MeshingFailed);
}

TEST(Mesh, SquareRing) {
    const Triangulation ring = build_one_layer_ring(axis_square({0.5, 0.5}, 0.05), axis_square({0.5, 0.5}, 0.1));
    EXPECT_EQ(ring.num_triangles(), 8u);
    EXPECT_EQ(ring.num_vertices(), 8u);
    EXPECT_NEAR(ring.total_area(), 0.03, 1e-15);
}

TEST(Mesh, WellRingTouchesBothBoundaries) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    const Triangulation ring = build_ring(part, 0.025);
    const Polygon& in = part.defect()[0];
    const Polygon& out = part.buffer()[0];
    for (std::size_t t = 0; t < ring.num_triangles(); ++t) {
        int on_in = 0, on_out = 0;
        for (int v : ring.triangle(t)) {
            on_in += distance_to_boundary(in, ring.vertex(v)) < 1e-12;
            on_out += distance_to_boundary(out, ring.vertex(v)) < 1e-12;
        }
        EXPECT_GE(on_in, 1);
        EXPECT_GE(on_out, 1);
    }
    for (const Vec2& v : ring.vertices())
        EXPECT_TRUE(distance_to_boundary(in, v) < 1e-12 || distance_to_boundary(out, v) < 1e-12);
    EXPECT_NEAR(ring.total_area(), 0.03, 1e-14);
}

TEST(Mesh, EllipseAndChannelRings) {
    EllipseDefect e;
    e.ellipses.push_back({{0.5, 0.35}, 0.25, 0.01, 0.0});
    e.ellipses.push_back({{0.5, 0.65}, 0.25, 0.01, 0.0});
    const RegionPartition pe = build_partition(e, 0.02);
    const Triangulation re = build_ring(pe, 0.01);
    EXPECT_NEAR(re.total_area(), pe.buffer_area() - pe.defect_area(), 1e-12);

    const RegionPartition pc = build_partition(ChannelDefect{{{0.25, 0.75}, {0.65, 0.75}, {0.65, 0.25}}, 0.05}, 0.025);
    const Triangulation rc = build_ring(pc);
    EXPECT_NEAR(rc.total_area(), pc.buffer_area() - pc.defect_area(), 1e-12);
}

TEST(Mesh, IdenticalRingLoopsRejected) {
    const Polygon sq = axis_square({0.5, 0.5}, 0.1);
    EXPECT_EQ(code_of([&] { build_one_layer_ring(sq, sq); }), ErrorCode::NestingViolated);
}

TEST(Mesh, AssumptionA) {
    const RegionPartition part = build_partition(WellDefect{{0.5, 0.5}, 0.05}, 0.05);
    const Triangulation inner = triangulate_region(buffer_region(part), 0.2 / 8);
    const QuasiUniformity q = check_assumption_A(inner);
    EXPECT_TRUE(q.quasi_uniform);
    EXPECT_NEAR(q.ratio, 1.0, 1e-12);
    EXPECT_NEAR(q.h_gamma, std::sqrt(2.0) * 0.025, 1e-12);

    // one interface element half the size of the others
    const std::vector<Vec2> v{{0, 0}, {1, 0}, {2, 0}, {2.5, 0}, {0, 1}, {1, 1}, {2, 1}, {2.5, 0.5}};
    const std::vector<TriangleIndices> t{{0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5}, {2, 3, 7}};
    const Triangulation m(v, t, [](Vec2 a, Vec2 b) { return a.y == 0 && b.y == 0 ? EdgeTag::Interface : EdgeTag::Dirichlet; });
    const QuasiUniformity q2 = check_assumption_A(m);
    EXPECT_NEAR(q2.ratio, 0.5 * std::sqrt(2.0) / std::sqrt(2.0), 1e-12);

    const Triangulation plain = uniform_unit_square(2);
    EXPECT_EQ(code_of([&] { check_assumption_A(plain); }), ErrorCode::NoInterfaceElements);
}

TEST(Mesh, DegenerateAndNonManifoldRejected) {
    EXPECT_EQ(code_of([] { Triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}); }), ErrorCode::MeshingFailed);
    EXPECT_EQ(code_of([] {
                  Triangulation({{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}}, {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}});
              }),
              ErrorCode::MeshingFailed);
}

TEST(Mesh, TextRoundTripAndVtk) {
    const Triangulation m = uniform_unit_square(3);
    std::stringstream ss;
    write_mesh_text(ss, m);
    const Triangulation r = read_mesh_text(ss);
    EXPECT_EQ(r.num_vertices(), m.num_vertices());
    EXPECT_EQ(r.triangles(), m.triangles());

    std::vector<double> values(m.num_vertices(), 1.0);
    const NamedField f{"u", values};
    std::ostringstream vtk;
    write_vtk(vtk, m, std::span<const NamedField>(&f, 1));
    EXPECT_NE(vtk.str().find("CELL_TYPES 18"), std::string::npos);
    EXPECT_NE(vtk.str().find("SCALARS u double 1"), std::string::npos);
}

TEST(Mesh, BackgroundLinesNestForDyadicTargets) {
    const std::vector<double> coarse = detail::grid_lines({0.0, 0.4, 0.6, 1.0}, 1.0 / 16);
    const std::vector<double> fine = detail::grid_lines({0.0, 0.4, 0.6, 1.0}, 1.0 / 64);
    for (double x : coarse) EXPECT_TRUE(std::binary_search(fine.begin(), fine.end(), x)) << x;
    // 0.375 lies 0.4 target below the breakpoint 0.4 and stays
    EXPECT_TRUE(std::binary_search(coarse.begin(), coarse.end(), 0.375));
    EXPECT_EQ(coarse.size(), 17u + 2u);
    for (std::size_t i = 1; i < coarse.size(); ++i) EXPECT_LE(coarse[i] - coarse[i - 1], 1.1 / 16 + 1e-15);
    const std::vector<double> snapped = detail::grid_lines({0.0, 0.51}, 0.25);
    EXPECT_EQ(snapped, (std::vector<double>{0.0, 0.25, 0.51}));
}
