#pragma once

/// Gamma-edges of the two triangulations and their pairwise intersections,
/// with the mesh-size weights used by the Nitsche coupling.

#include <algorithm>
#include <ostream>
#include <vector>

#include "geometry.hpp"
#include "mesh.hpp"

namespace nhyb {

/// Boundary edge of one triangulation lying on Gamma.
struct GammaEdge {
    Vec2 a, b;
    int triangle = -1;
    double h = 0.0;  ///< diameter of the adjacent triangle
};

/// All Interface-tagged boundary edges. Throws UntaggedBoundary when the
/// mesh has boundary edges without a tag.
inline std::vector<GammaEdge> collect_gamma_edges(const Triangulation& mesh) {
    std::vector<GammaEdge> out;
    for (const BoundaryEdge& e : mesh.boundary_edges()) {
        require(e.tag != EdgeTag::Untagged, ErrorCode::UntaggedBoundary, "mesh has untagged boundary edges");
        if (e.tag != EdgeTag::Interface) continue;
        out.push_back({mesh.vertex(e.a), mesh.vertex(e.b), e.triangle, mesh.diameter(static_cast<std::size_t>(e.triangle))});
    }
    return out;
}

/// One element of E_cap = {e cap E : e fine Gamma-edge, E coarse Gamma-edge}.
struct InterfaceEdge {
    Vec2 a, b;
    int fine_edge = -1, coarse_edge = -1;
    int fine_triangle = -1, coarse_triangle = -1;
    double h = 0.0, H = 0.0;
    double w1 = 0.5, w2 = 0.5;  ///< h / (h + H), H / (h + H)
    Vec2 normal;                 ///< unit normal pointing from K1 into K2

    double length() const { return distance(a, b); }
};

namespace detail {

struct Interval {
    double lo, hi;
    int edge;
};

/// Intervals (in arclength along p->q) of edges lying on segment [p, q].
inline std::vector<Interval> edges_on_segment(const std::vector<GammaEdge>& edges, Vec2 p, Vec2 q, double tol) {
    const double len = distance(p, q);
    const Vec2 dir = (q - p) / len;
    std::vector<Interval> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const GammaEdge& e = edges[i];
        if (distance_to_segment(e.a, p, q) > tol || distance_to_segment(e.b, p, q) > tol) continue;
        double s = dot(e.a - p, dir), t = dot(e.b - p, dir);
        if (s > t) std::swap(s, t);
        if (t - s <= tol) continue;
        out.push_back({std::clamp(s, 0.0, len), std::clamp(t, 0.0, len), static_cast<int>(i)});
    }
    std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    return out;
}

}  // namespace detail

/// E_cap by a 1D sweep along every Gamma segment. Overlaps shorter than
/// 1e-12 |Gamma| are dropped; throws CoverageGap when the intersections miss
/// more than 1e-10 of Gamma.
inline std::vector<InterfaceEdge> intersect_interfaces(const std::vector<GammaEdge>& fine,
                                                       const std::vector<GammaEdge>& coarse,
                                                       const std::vector<Polygon>& gamma_loops) {
    double total = 0.0;
    for (const Polygon& loop : gamma_loops) total += perimeter(loop);
    const double drop = 1e-12 * total;
    const double on_tol = 1e-10;
    std::vector<InterfaceEdge> out;
    double covered = 0.0;
    for (Polygon loop : gamma_loops) {
        if (signed_area(loop) < 0.0) std::reverse(loop.begin(), loop.end());
        for (std::size_t s = 0, n = loop.size(); s < n; ++s) {
            const Vec2 p = loop[s], q = loop[(s + 1) % n];
            const Vec2 dir = (q - p) / distance(p, q);
            const Vec2 normal{dir.y, -dir.x};
            const auto fi = detail::edges_on_segment(fine, p, q, on_tol);
            const auto ci = detail::edges_on_segment(coarse, p, q, on_tol);
            std::size_t i = 0, j = 0;
            while (i < fi.size() && j < ci.size()) {
                const double lo = std::max(fi[i].lo, ci[j].lo), hi = std::min(fi[i].hi, ci[j].hi);
                if (hi - lo > drop) {
                    const GammaEdge& f = fine[static_cast<std::size_t>(fi[i].edge)];
                    const GammaEdge& c = coarse[static_cast<std::size_t>(ci[j].edge)];
                    InterfaceEdge e;
                    e.a = p + dir * lo;
                    e.b = p + dir * hi;
                    e.fine_edge = fi[i].edge;
                    e.coarse_edge = ci[j].edge;
                    e.fine_triangle = f.triangle;
                    e.coarse_triangle = c.triangle;
                    e.h = f.h;
                    e.H = c.h;
                    e.w1 = f.h / (f.h + c.h);
                    e.w2 = c.h / (f.h + c.h);
                    e.normal = normal;
                    out.push_back(e);
                    covered += hi - lo;
                }
                if (fi[i].hi < ci[j].hi) ++i;
                else ++j;
            }
        }
    }
    if (std::abs(total - covered) > 1e-10 * std::max(1.0, total)) {
        std::ostringstream msg;
        msg << "interface intersections cover " << covered << " of |Gamma| = " << total;
        fail(ErrorCode::CoverageGap, msg.str());
    }
    return out;
}

/// Assumption B: every intersection is a whole fine edge (E_cap = E_h).
inline bool check_assumption_B(const std::vector<InterfaceEdge>& cap, const std::vector<GammaEdge>& fine,
                               double tol = 1e-10) {
    for (const InterfaceEdge& e : cap) {
        const GammaEdge& f = fine[static_cast<std::size_t>(e.fine_edge)];
        const bool same = (distance(e.a, f.a) <= tol && distance(e.b, f.b) <= tol) ||
                          (distance(e.a, f.b) <= tol && distance(e.b, f.a) <= tol);
        if (!same) return false;
    }
    return true;
}

struct TraceValues {
    double lower;  ///< {v}_w = w1 v1 + w2 v2
    double upper;  ///< {v}^w = w2 v1 + w1 v2
    double jump;   ///< [v] = v1 - v2
};

inline TraceValues weighted_average_and_jump(double v1, double v2, double w1, double w2) {
    return {w1 * v1 + w2 * v2, w2 * v1 + w1 * v2, v1 - v2};
}

/// CSV: x0, y0, x1, y1, h_e, H_e, omega1.
inline void write_interface_csv(std::ostream& os, const std::vector<InterfaceEdge>& cap) {
    os << std::setprecision(17) << "x0,y0,x1,y1,h_e,H_e,omega1\n";
    for (const InterfaceEdge& e : cap)
        os << e.a.x << ',' << e.a.y << ',' << e.b.x << ',' << e.b.y << ',' << e.h << ',' << e.H << ',' << e.w1 << '\n';
}

}  // namespace nhyb
