#pragma once

/// Triangulations of K1 and K2, the one-layer ring between the defect and
/// buffer boundaries, shape diagnostics and mesh file formats.

#include <array>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "delaunay.hpp"
#include "geometry.hpp"

namespace nhyb {

enum class EdgeTag : std::uint8_t { Untagged, Dirichlet, Interface, Internal };

struct BoundaryEdge {
    int a = -1, b = -1;  ///< counterclockwise with respect to `triangle`
    int triangle = -1;
    EdgeTag tag = EdgeTag::Untagged;
};

using EdgeTagger = std::function<EdgeTag(Vec2, Vec2)>;
using TriangleIndices = std::array<int, 3>;

class Triangulation {
public:
    Triangulation() = default;

    /// Triangles are reoriented counterclockwise. Throws MeshingFailed on
    /// degenerate triangles or edges shared by more than two triangles.
    Triangulation(std::vector<Vec2> vertices, std::vector<TriangleIndices> triangles, const EdgeTagger& tagger = {})
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
        const int nv = static_cast<int>(vertices_.size());
        for (TriangleIndices& t : triangles_) {
            for (int v : t) require(v >= 0 && v < nv, ErrorCode::MeshingFailed, "triangle index out of range");
            double a2 = orient2d(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
            if (a2 < 0.0) {
                std::swap(t[1], t[2]);
                a2 = -a2;
            }
            require(0.5 * a2 > 1e-14, ErrorCode::MeshingFailed, "degenerate triangle");
        }
        build_boundary(tagger);
    }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<TriangleIndices>& triangles() const { return triangles_; }
    Vec2 vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const TriangleIndices& triangle(std::size_t t) const { return triangles_[t]; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

    std::array<Vec2, 3> corners(std::size_t t) const {
        const TriangleIndices& tri = triangles_[t];
        return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
    }
    double area(std::size_t t) const {
        const auto c = corners(t);
        return 0.5 * orient2d(c[0], c[1], c[2]);
    }
    /// Longest edge.
    double diameter(std::size_t t) const {
        const auto c = corners(t);
        return std::max({distance(c[0], c[1]), distance(c[1], c[2]), distance(c[2], c[0])});
    }
    double inradius(std::size_t t) const {
        const auto c = corners(t);
        const double perim = distance(c[0], c[1]) + distance(c[1], c[2]) + distance(c[2], c[0]);
        return 2.0 * area(t) / perim;
    }
    Vec2 centroid(std::size_t t) const {
        const auto c = corners(t);
        return (c[0] + c[1] + c[2]) / 3.0;
    }

    /// sigma = max over triangles of h / (2 * inradius).
    double chunkiness() const {
        double s = 0.0;
        for (std::size_t t = 0; t < triangles_.size(); ++t) s = std::max(s, diameter(t) / (2.0 * inradius(t)));
        return s;
    }
    double max_diameter() const {
        double h = 0.0;
        for (std::size_t t = 0; t < triangles_.size(); ++t) h = std::max(h, diameter(t));
        return h;
    }
    double total_area() const {
        double a = 0.0;
        for (std::size_t t = 0; t < triangles_.size(); ++t) a += area(t);
        return a;
    }
    bool fully_tagged() const {
        return std::none_of(boundary_.begin(), boundary_.end(),
                            [](const BoundaryEdge& e) { return e.tag == EdgeTag::Untagged; });
    }

private:
    void build_boundary(const EdgeTagger& tagger) {
        // vertex -> incident triangles in CSR form; cheaper than an edge hash on big meshes
        const std::size_t nv = vertices_.size();
        std::vector<int> start(nv + 1, 0);
        for (const TriangleIndices& t : triangles_)
            for (int v : t) ++start[static_cast<std::size_t>(v) + 1];
        std::partial_sum(start.begin(), start.end(), start.begin());
        std::vector<int> incident(static_cast<std::size_t>(start.back()));
        std::vector<int> fill(start.begin(), start.end() - 1);
        for (std::size_t t = 0; t < triangles_.size(); ++t)
            for (int v : triangles_[t]) incident[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = static_cast<int>(t);

        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const TriangleIndices& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const int a = tri[static_cast<std::size_t>(k)], b = tri[static_cast<std::size_t>((k + 1) % 3)];
                int shared = 0;
                for (int i = start[static_cast<std::size_t>(a)]; i < start[static_cast<std::size_t>(a) + 1]; ++i) {
                    const TriangleIndices& o = triangles_[static_cast<std::size_t>(incident[static_cast<std::size_t>(i)])];
                    if (o[0] == b || o[1] == b || o[2] == b) ++shared;
                }
                require(shared <= 2, ErrorCode::MeshingFailed, "edge shared by more than two triangles");
                if (shared == 1) {
                    BoundaryEdge e{a, b, static_cast<int>(t), EdgeTag::Untagged};
                    if (tagger) e.tag = tagger(vertices_[a], vertices_[b]);
                    boundary_.push_back(e);
                }
            }
        }
    }

    std::vector<Vec2> vertices_;
    std::vector<TriangleIndices> triangles_;
    std::vector<BoundaryEdge> boundary_;
};

// ---------------------------------------------------------------------------
// Region description for the mesher

/// Closed loop whose edge i = (points[i], points[i+1]) carries tags[i].
struct TaggedLoop {
    Polygon points;
    std::vector<EdgeTag> tags;

    TaggedLoop() = default;
    TaggedLoop(Polygon pts, EdgeTag tag) : points(std::move(pts)), tags(points.size(), tag) {}
    TaggedLoop(Polygon pts, std::vector<EdgeTag> t) : points(std::move(pts)), tags(std::move(t)) {}
};

/// Union of outer loops minus the holes.
struct PolygonalRegion {
    std::vector<TaggedLoop> outers;
    std::vector<TaggedLoop> holes;

    /// Closed-set membership with boundary tolerance `tol`.
    bool contains(Vec2 p, double tol = 1e-12) const {
        bool in_outer = false;
        for (const TaggedLoop& l : outers)
            if (locate_in_polygon(l.points, p, tol) != Containment::Outside) { in_outer = true; break; }
        if (!in_outer) return false;
        for (const TaggedLoop& l : holes)
            if (locate_in_polygon(l.points, p, tol) == Containment::Inside) return false;
        return true;
    }

    double area() const {
        double a = 0.0;
        for (const TaggedLoop& l : outers) a += std::abs(signed_area(l.points));
        for (const TaggedLoop& l : holes) a -= std::abs(signed_area(l.points));
        return a;
    }

    template <class Fn>
    void for_each_edge(Fn&& fn) const {
        for (const auto* set : {&outers, &holes})
            for (const TaggedLoop& l : *set)
                for (std::size_t i = 0, n = l.points.size(); i < n; ++i)
                    fn(l.points[i], l.points[(i + 1) % n], l.tags[i]);
    }

    /// Tag of the loop edge containing the segment [a, b], or Untagged.
    EdgeTag tag_of(Vec2 a, Vec2 b, double tol = 1e-10) const {
        EdgeTag found = EdgeTag::Untagged;
        for_each_edge([&](Vec2 p, Vec2 q, EdgeTag tag) {
            if (found == EdgeTag::Untagged && distance_to_segment(a, p, q) <= tol && distance_to_segment(b, p, q) <= tol)
                found = tag;
        });
        return found;
    }
};

inline PolygonalRegion unit_square_region() {
    return {{TaggedLoop(axis_square({0.5, 0.5}, 0.5), EdgeTag::Dirichlet)}, {}};
}

/// K1 as a meshing region: buffer loops with Interface tags.
inline PolygonalRegion buffer_region(const RegionPartition& part) {
    PolygonalRegion r;
    for (const Polygon& p : part.buffer()) r.outers.emplace_back(p, EdgeTag::Interface);
    return r;
}

/// K2 = D \ K1 as a meshing region.
inline PolygonalRegion exterior_region(const RegionPartition& part) {
    PolygonalRegion r = unit_square_region();
    for (const Polygon& p : part.buffer()) r.holes.emplace_back(p, EdgeTag::Interface);
    return r;
}

struct MeshOptions {
    double min_angle_deg = 15.0;
    /// Use the tensor-grid path when every region edge is axis-parallel.
    bool structured_when_possible = true;
    int max_refinement_passes = 20;
};

namespace detail {

inline bool is_rectilinear(const PolygonalRegion& region) {
    bool ok = true;
    region.for_each_edge([&](Vec2 a, Vec2 b, EdgeTag) {
        if (std::abs(a.x - b.x) > 1e-14 && std::abs(a.y - b.y) > 1e-14) ok = false;
    });
    return ok;
}

inline void validate_region(const PolygonalRegion& region) {
    require(!region.outers.empty(), ErrorCode::MeshingFailed, "region has no outer loop");
    std::vector<const TaggedLoop*> loops;
    for (const auto* set : {&region.outers, &region.holes})
        for (const TaggedLoop& l : *set) {
            require(l.points.size() >= 3 && l.tags.size() == l.points.size(), ErrorCode::MeshingFailed,
                    "malformed loop");
            require(!polygon_self_intersects(l.points), ErrorCode::MeshingFailed, "self-intersecting polygon");
            require(std::abs(signed_area(l.points)) > 0.0, ErrorCode::MeshingFailed, "zero-area loop");
            loops.push_back(&l);
        }
    for (std::size_t i = 0; i < loops.size(); ++i)
        for (std::size_t j = i + 1; j < loops.size(); ++j)
            require(boundary_distance(loops[i]->points, loops[j]->points) > 1e-12, ErrorCode::MeshingFailed,
                    "region loops touch or cross");
}

/// Region breakpoints plus the background lines k * target; background
/// lines closer than target / 10 to a breakpoint are dropped, so cells stay
/// within 1.1 target and dyadic targets give nested grids.
inline std::vector<double> grid_lines(std::vector<double> breaks, double target) {
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> lines;
    for (double b : breaks)
        if (lines.empty() || b - lines.back() > 1e-12) lines.push_back(b);
    const double lo = lines.front(), hi = lines.back();
    const std::size_t nbreaks = lines.size();
    for (auto k = static_cast<long long>(std::ceil(lo / target)); k * target <= hi; ++k) {
        const double x = static_cast<double>(k) * target;
        const auto it = std::lower_bound(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(nbreaks), x);
        double gap = std::numeric_limits<double>::infinity();
        if (it != lines.begin() + static_cast<std::ptrdiff_t>(nbreaks)) gap = *it - x;
        if (it != lines.begin()) gap = std::min(gap, x - *(it - 1));
        if (gap > 0.1 * target) lines.push_back(x);
    }
    std::sort(lines.begin(), lines.end());
    return lines;
}

inline Triangulation structured_mesh(const PolygonalRegion& region, double target) {
    std::vector<double> bx, by;
    region.for_each_edge([&](Vec2 a, Vec2, EdgeTag) {
        bx.push_back(a.x);
        by.push_back(a.y);
    });
    const std::vector<double> xs = grid_lines(bx, target), ys = grid_lines(by, target);
    const std::size_t nx = xs.size(), ny = ys.size();
    std::vector<int> id(nx * ny, -1);
    std::vector<Vec2> verts;
    std::vector<TriangleIndices> tris;
    auto vid = [&](std::size_t i, std::size_t j) {
        int& v = id[j * nx + i];
        if (v < 0) {
            v = static_cast<int>(verts.size());
            verts.push_back({xs[i], ys[j]});
        }
        return v;
    };
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const Vec2 c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
            if (!region.contains(c, 0.0)) continue;
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    }
    require(!tris.empty(), ErrorCode::MeshingFailed, "structured mesh is empty");
    return Triangulation(std::move(verts), std::move(tris),
                         [&region](Vec2 a, Vec2 b) { return region.tag_of(a, b); });
}

inline Triangulation unstructured_mesh(const PolygonalRegion& region, double target, const MeshOptions& opt) {
    BoundingBox box;
    region.for_each_edge([&](Vec2 a, Vec2, EdgeTag) { box.expand(a); });
    DelaunayBuilder dt(box.lo, box.hi);

    struct Segment { int a, b; EdgeTag tag; };
    std::vector<Segment> segments;
    // boundary points: loop vertices plus uniform subdivision of each edge
    for (const auto* set : {&region.outers, &region.holes}) {
        for (const TaggedLoop& l : *set) {
            const std::size_t n = l.points.size();
            std::vector<int> first_ids;
            std::vector<int> ids(n);
            for (std::size_t i = 0; i < n; ++i) ids[i] = dt.insert(l.points[i]);
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 p = l.points[i], q = l.points[(i + 1) % n];
                const int m = std::max(1, static_cast<int>(std::ceil(distance(p, q) / target - 1e-9)));
                int prev = ids[i];
                for (int k = 1; k < m; ++k) {
                    const int cur = dt.insert(p + (q - p) * (static_cast<double>(k) / m));
                    segments.push_back({prev, cur, l.tags[i]});
                    prev = cur;
                }
                segments.push_back({prev, ids[(i + 1) % n], l.tags[i]});
            }
        }
    }
    // interior lattice points kept half a cell away from the boundary
    auto boundary_gap = [&](Vec2 p) {
        double d = std::numeric_limits<double>::infinity();
        region.for_each_edge([&](Vec2 a, Vec2 b, EdgeTag) { d = std::min(d, distance_to_segment(p, a, b)); });
        return d;
    };
    const int nx = static_cast<int>(std::ceil((box.hi.x - box.lo.x) / target));
    const int ny = static_cast<int>(std::ceil((box.hi.y - box.lo.y) / (target * std::sqrt(0.75))));
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            const double shift = (j % 2) ? 0.5 * target : 0.0;
            const Vec2 p{box.lo.x + i * target + shift, box.lo.y + j * target * std::sqrt(0.75)};
            if (p.x >= box.hi.x || p.y >= box.hi.y) continue;
            if (region.contains(p, 0.0) && boundary_gap(p) > 0.5 * target) dt.insert(p);
        }
    }

    auto encroaches = [&](const Segment& s, Vec2 p) {
        const Vec2 a = dt.points()[static_cast<std::size_t>(s.a)], b = dt.points()[static_cast<std::size_t>(s.b)];
        const Vec2 mid = (a + b) * 0.5;
        return distance(p, mid) < 0.5 * distance(a, b) * (1.0 - 1e-12);
    };
    auto recover_segments = [&] {
        for (int guard = 0; guard < 64; ++guard) {
            bool all = true;
            std::vector<Segment> next;
            next.reserve(segments.size());
            for (const Segment& s : segments) {
                if (dt.has_edge(s.a, s.b)) {
                    next.push_back(s);
                    continue;
                }
                all = false;
                const Vec2 mid = (dt.points()[static_cast<std::size_t>(s.a)] + dt.points()[static_cast<std::size_t>(s.b)]) * 0.5;
                const int m = dt.insert(mid);
                next.push_back({s.a, m, s.tag});
                next.push_back({m, s.b, s.tag});
            }
            segments = std::move(next);
            if (all) return;
        }
        fail(ErrorCode::MeshingFailed, "segment recovery did not converge");
    };
    recover_segments();

    const double min_angle = opt.min_angle_deg * pi / 180.0;
    const std::size_t budget = 4 * dt.points().size() + 100;
    std::size_t inserted = 0;
    for (int pass = 0; pass < opt.max_refinement_passes && inserted < budget; ++pass) {
        std::vector<Vec2> centers;
        const auto& tris = dt.triangles();
        const auto& pts = dt.points();
        for (const auto& t : tris) {
            if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
            const Vec2 a = pts[t.v[0]], b = pts[t.v[1]], c = pts[t.v[2]];
            if (!region.contains((a + b + c) / 3.0, 0.0)) continue;
            const double longest = std::max({distance(a, b), distance(b, c), distance(c, a)});
            if (detail::min_angle(a, b, c) >= min_angle && longest <= 1.4 * target) continue;
            centers.push_back(circumcenter(a, b, c));
        }
        if (centers.empty()) break;
        for (const Vec2& c : centers) {
            if (inserted >= budget) break;
            bool split = false;
            for (std::size_t k = 0; k < segments.size() && !split; ++k) {
                if (!encroaches(segments[k], c)) continue;
                const Segment s = segments[k];
                const Vec2 mid = (dt.points()[static_cast<std::size_t>(s.a)] + dt.points()[static_cast<std::size_t>(s.b)]) * 0.5;
                const int m = dt.insert(mid);
                segments[k] = {s.a, m, s.tag};
                segments.push_back({m, s.b, s.tag});
                split = true;
            }
            if (!split && region.contains(c, 0.0) && boundary_gap(c) > 1e-9 * target) dt.insert(c);
            ++inserted;
        }
        recover_segments();
    }

    // compact: drop super vertices and triangles outside the region
    const auto& pts = dt.points();
    std::vector<int> remap(pts.size(), -1);
    std::vector<Vec2> verts;
    std::vector<TriangleIndices> tris;
    for (const auto& t : dt.triangles()) {
        if (!t.alive) continue;
        if (t.v[0] < DelaunayBuilder::kSuperVertices || t.v[1] < DelaunayBuilder::kSuperVertices ||
            t.v[2] < DelaunayBuilder::kSuperVertices)
            continue;
        const Vec2 c = (pts[t.v[0]] + pts[t.v[1]] + pts[t.v[2]]) / 3.0;
        if (!region.contains(c, 0.0)) continue;
        // slivers of nearly collinear boundary points
        if (std::abs(orient2d(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]])) < 1e-12 * target * target) continue;
        TriangleIndices out{};
        for (int k = 0; k < 3; ++k) {
            int& r = remap[static_cast<std::size_t>(t.v[k])];
            if (r < 0) {
                r = static_cast<int>(verts.size());
                verts.push_back(pts[t.v[k]]);
            }
            out[static_cast<std::size_t>(k)] = r;
        }
        tris.push_back(out);
    }
    require(!tris.empty(), ErrorCode::MeshingFailed, "unstructured mesh is empty");
    return Triangulation(std::move(verts), std::move(tris),
                         [&region](Vec2 a, Vec2 b) { return region.tag_of(a, b); });
}

}  // namespace detail

/// Mesh a polygonal region (holes allowed) with target element size `target`.
/// Axis-parallel regions get a graded tensor grid split into right triangles;
/// anything else goes through the conforming Delaunay path.
inline Triangulation triangulate_region(const PolygonalRegion& region, double target, const MeshOptions& opt = {}) {
    require(target > 0.0, ErrorCode::InvalidArgument, "target size must be positive");
    detail::validate_region(region);
    if (opt.structured_when_possible && detail::is_rectilinear(region)) return detail::structured_mesh(region, target);
    return detail::unstructured_mesh(region, target, opt);
}

/// Uniform n x n grid of the unit square, every cell split along its (0,0)-(1,1) diagonal.
inline Triangulation uniform_unit_square(int n) {
    require(n >= 1, ErrorCode::InvalidArgument, "grid needs at least one cell");
    return detail::structured_mesh(unit_square_region(), 1.0 / n);
}

// ---------------------------------------------------------------------------
// One-layer ring

namespace detail {

/// Inserts points so that no edge of the loop exceeds `max_edge`.
inline Polygon subdivide_loop(const Polygon& loop, double max_edge) {
    if (max_edge <= 0.0) return loop;
    Polygon out;
    for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
        const Vec2 p = loop[i], q = loop[(i + 1) % n];
        const int m = std::max(1, static_cast<int>(std::ceil(distance(p, q) / max_edge - 1e-9)));
        for (int k = 0; k < m; ++k) out.push_back(p + (q - p) * (static_cast<double>(k) / m));
    }
    return out;
}

inline bool diagonal_is_clear(Vec2 p, Vec2 q, const Polygon& inner, const Polygon& outer) {
    for (const Polygon* loop : {&inner, &outer}) {
        for (std::size_t i = 0, n = loop->size(); i < n; ++i) {
            const Vec2 a = (*loop)[i], b = (*loop)[(i + 1) % n];
            if (a == p || a == q || b == p || b == q) continue;
            if (segments_intersect(p, q, a, b, 1e-15)) return false;
        }
    }
    const Vec2 mid = (p + q) * 0.5;
    return locate_in_polygon(outer, mid, 0.0) == Containment::Inside &&
           locate_in_polygon(inner, mid, 0.0) == Containment::Outside;
}

}  // namespace detail

/// Triangulates the annulus between `inner` (boundary of K0) and `outer`
/// (boundary of K1) without interior vertices: every triangle uses one edge
/// of one loop and a vertex of the other. `max_outer_edge > 0` inserts extra
/// points on the outer loop.
inline Triangulation build_one_layer_ring(Polygon inner, Polygon outer, double max_outer_edge = 0.0) {
    if (signed_area(inner) < 0.0) std::reverse(inner.begin(), inner.end());
    if (signed_area(outer) < 0.0) std::reverse(outer.begin(), outer.end());
    outer = detail::subdivide_loop(outer, max_outer_edge);
    require(inner.size() >= 3 && outer.size() >= 3, ErrorCode::NestingViolated, "ring loops need three vertices");
    require(boundary_distance(inner, outer) > 1e-12, ErrorCode::NestingViolated, "defect and buffer boundaries touch");
    for (const Vec2& p : inner)
        require(locate_in_polygon(outer, p) == Containment::Inside, ErrorCode::NestingViolated,
                "defect boundary leaves the buffer");

    const std::size_t ni = inner.size(), no = outer.size();
    // start from the inner vertex closest to outer[0] with a clear diagonal
    std::size_t i0 = ni;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ni; ++i) {
        const double d = distance(inner[i], outer[0]);
        if (d < best && detail::diagonal_is_clear(inner[i], outer[0], inner, outer)) {
            best = d;
            i0 = i;
        }
    }
    require(i0 < ni, ErrorCode::NestingViolated, "no visible starting pair for ring stitching");

    std::vector<Vec2> verts(inner.begin(), inner.end());
    verts.insert(verts.end(), outer.begin(), outer.end());
    auto in_id = [&](std::size_t k) { return static_cast<int>((i0 + k) % ni); };
    auto out_id = [&](std::size_t k) { return static_cast<int>(ni + k % no); };

    std::vector<TriangleIndices> tris;
    std::size_t ci = 0, co = 0;
    while (ci < ni || co < no) {
        const Vec2 p = verts[static_cast<std::size_t>(in_id(ci))], q = verts[static_cast<std::size_t>(out_id(co))];
        double len_a = std::numeric_limits<double>::infinity(), len_b = len_a;
        if (ci < ni) {
            const Vec2 pn = verts[static_cast<std::size_t>(in_id(ci + 1))];
            if (orient2d(pn, p, q) > 0.0 && (ci + 1 == ni && co == no ? true : detail::diagonal_is_clear(pn, q, inner, outer)))
                len_a = distance(pn, q);
        }
        if (co < no) {
            const Vec2 qn = verts[static_cast<std::size_t>(out_id(co + 1))];
            if (orient2d(q, qn, p) > 0.0 && (co + 1 == no && ci == ni ? true : detail::diagonal_is_clear(p, qn, inner, outer)))
                len_b = distance(p, qn);
        }
        require(std::isfinite(len_a) || std::isfinite(len_b), ErrorCode::NestingViolated,
                "ring stitching found no valid triangle");
        if (len_a <= len_b) {
            tris.push_back({in_id(ci + 1), in_id(ci), out_id(co)});
            ++ci;
        } else {
            tris.push_back({out_id(co), out_id(co + 1), in_id(ci)});
            ++co;
        }
    }
    const double expected = signed_area(outer) - signed_area(inner);
    Triangulation ring(std::move(verts), std::move(tris), [&](Vec2 a, Vec2 b) {
        return distance_to_boundary(inner, a) < 1e-12 && distance_to_boundary(inner, b) < 1e-12 ? EdgeTag::Internal
                                                                                                : EdgeTag::Interface;
    });
    require(std::abs(ring.total_area() - expected) <= 1e-10 * std::max(1.0, expected), ErrorCode::NestingViolated,
            "ring triangles overlap");
    return ring;
}

/// Concatenate triangulations (vertex indices offset, boundary tags preserved).
inline Triangulation merge_triangulations(std::span<const Triangulation> parts) {
    std::vector<Vec2> verts;
    std::vector<TriangleIndices> tris;
    std::vector<std::pair<std::pair<Vec2, Vec2>, EdgeTag>> tags;
    for (const Triangulation& m : parts) {
        const int off = static_cast<int>(verts.size());
        verts.insert(verts.end(), m.vertices().begin(), m.vertices().end());
        for (TriangleIndices t : m.triangles()) tris.push_back({t[0] + off, t[1] + off, t[2] + off});
        for (const BoundaryEdge& e : m.boundary_edges()) tags.push_back({{m.vertex(e.a), m.vertex(e.b)}, e.tag});
    }
    return Triangulation(std::move(verts), std::move(tris), [&tags](Vec2 a, Vec2 b) {
        for (const auto& [edge, tag] : tags)
            if (edge.first == a && edge.second == b) return tag;
        return EdgeTag::Untagged;
    });
}

/// Ring for every defect component of a partition.
inline Triangulation build_ring(const RegionPartition& part, double max_outer_edge = 0.0) {
    std::vector<Triangulation> parts;
    for (std::size_t i = 0; i < part.defect().size(); ++i)
        parts.push_back(build_one_layer_ring(part.defect()[i], part.buffer()[i], max_outer_edge));
    if (parts.size() == 1) return std::move(parts.front());
    return merge_triangulations(parts);
}

// ---------------------------------------------------------------------------
// Diagnostics

struct QuasiUniformity {
    bool quasi_uniform = false;
    double ratio = 0.0;    ///< nu = min h_tau / h_Gamma over elements touching Gamma
    double h_gamma = 0.0;  ///< max h_tau over the same elements
};

/// Assumption A diagnostic on the elements whose closure meets Gamma.
inline QuasiUniformity check_assumption_A(const Triangulation& mesh, double threshold = 0.5) {
    std::vector<char> on_gamma(mesh.num_vertices(), 0);
    for (const BoundaryEdge& e : mesh.boundary_edges()) {
        if (e.tag != EdgeTag::Interface) continue;
        on_gamma[static_cast<std::size_t>(e.a)] = on_gamma[static_cast<std::size_t>(e.b)] = 1;
    }
    double hmax = 0.0, hmin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleIndices& tri = mesh.triangle(t);
        if (!(on_gamma[static_cast<std::size_t>(tri[0])] || on_gamma[static_cast<std::size_t>(tri[1])] ||
              on_gamma[static_cast<std::size_t>(tri[2])]))
            continue;
        any = true;
        const double h = mesh.diameter(t);
        hmax = std::max(hmax, h);
        hmin = std::min(hmin, h);
    }
    require(any, ErrorCode::NoInterfaceElements, "mesh has no elements touching the interface");
    QuasiUniformity q;
    q.h_gamma = hmax;
    q.ratio = hmin / hmax;
    q.quasi_uniform = q.ratio >= threshold;
    return q;
}

// ---------------------------------------------------------------------------
// File formats

/// "VERTICES n" / "TRIANGLES m" header, then n coordinate lines, then m index triples.
inline void write_mesh_text(std::ostream& os, const Triangulation& mesh) {
    os << "VERTICES " << mesh.num_vertices() << "\nTRIANGLES " << mesh.num_triangles() << '\n';
    os << std::setprecision(17);
    for (const Vec2& v : mesh.vertices()) os << v.x << ' ' << v.y << '\n';
    for (const TriangleIndices& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline Triangulation read_mesh_text(std::istream& is, const EdgeTagger& tagger = {}) {
    std::string key;
    std::size_t nv = 0, nt = 0;
    require(static_cast<bool>(is >> key >> nv) && key == "VERTICES", ErrorCode::Io, "expected VERTICES header");
    require(static_cast<bool>(is >> key >> nt) && key == "TRIANGLES", ErrorCode::Io, "expected TRIANGLES header");
    std::vector<Vec2> verts(nv);
    for (Vec2& v : verts) require(static_cast<bool>(is >> v.x >> v.y), ErrorCode::Io, "truncated vertex list");
    std::vector<TriangleIndices> tris(nt);
    for (TriangleIndices& t : tris)
        require(static_cast<bool>(is >> t[0] >> t[1] >> t[2]), ErrorCode::Io, "truncated triangle list");
    return Triangulation(std::move(verts), std::move(tris), tagger);
}

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// VTK legacy ASCII unstructured grid (cell type 5) with optional point and cell scalars.
inline void write_vtk(std::ostream& os, const Triangulation& mesh, std::span<const NamedField> point_data = {},
                      std::span<const NamedField> cell_data = {}, const std::string& title = "nhyb mesh") {
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(17);
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Vec2& v : mesh.vertices()) os << v.x << ' ' << v.y << " 0\n";
    os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const TriangleIndices& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
    auto emit = [&os](std::span<const NamedField> fields, std::size_t expected) {
        for (const NamedField& f : fields) {
            require(f.values.size() == expected, ErrorCode::InvalidArgument, "VTK field " + f.name + " has wrong size");
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) os << v << '\n';
        }
    };
    if (!point_data.empty()) {
        os << "POINT_DATA " << mesh.num_vertices() << '\n';
        emit(point_data, mesh.num_vertices());
    }
    if (!cell_data.empty()) {
        os << "CELL_DATA " << mesh.num_triangles() << '\n';
        emit(cell_data, mesh.num_triangles());
    }
}

}  // namespace nhyb
