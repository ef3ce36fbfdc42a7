#pragma once

/// Incremental Bowyer-Watson Delaunay triangulation with conforming segment
/// recovery (midpoint splitting) and circumcenter refinement. Used by the
/// unstructured meshing path; structured regions never reach this code.

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace nhyb::detail {

inline double in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
    return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

/// Smallest interior angle of a triangle, in radians.
inline double min_angle(Vec2 a, Vec2 b, Vec2 c) {
    auto angle = [](Vec2 p, Vec2 q, Vec2 r) {
        const Vec2 u = q - p, v = r - p;
        return std::atan2(std::abs(cross(u, v)), dot(u, v));
    };
    return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

class DelaunayBuilder {
public:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> nb{-1, -1, -1};  ///< nb[k] is across the edge opposite v[k]
        bool alive = true;
    };

    /// Starts from a super triangle enclosing [lo, hi].
    DelaunayBuilder(Vec2 lo, Vec2 hi) {
        const double span = std::max(hi.x - lo.x, hi.y - lo.y);
        const Vec2 mid = (lo + hi) * 0.5;
        const double big = 50.0 * span;
        scale_ = span;
        pts_ = {{mid.x - big, mid.y - big}, {mid.x + big, mid.y - big}, {mid.x, mid.y + big}};
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
        vtri_ = {0, 0, 0};
    }

    static constexpr int kSuperVertices = 3;

    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<Tri>& triangles() const { return tris_; }

    /// Returns the new vertex id, or the id of an existing vertex at p.
    int insert(Vec2 p) {
        const int start = locate(p);
        for (int v : tris_[static_cast<std::size_t>(start)].v)
            if (distance(pts_[static_cast<std::size_t>(v)], p) <= 1e-13 * scale_) return v;
        const int id = static_cast<int>(pts_.size());
        pts_.push_back(p);
        vtri_.push_back(-1);

        std::vector<int> cavity{start};
        mark_.resize(tris_.size(), 0);
        ++stamp_;
        if (stamp_ == 0) {
            std::fill(mark_.begin(), mark_.end(), 0);
            stamp_ = 1;
        }
        mark_[static_cast<std::size_t>(start)] = stamp_;
        for (std::size_t k = 0; k < cavity.size(); ++k) {
            const Tri& t = tris_[static_cast<std::size_t>(cavity[k])];
            for (int nb : t.nb) {
                if (nb < 0 || mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
                const Tri& n = tris_[static_cast<std::size_t>(nb)];
                if (in_circle(pts_[n.v[0]], pts_[n.v[1]], pts_[n.v[2]], p) > 0.0) {
                    mark_[static_cast<std::size_t>(nb)] = stamp_;
                    cavity.push_back(nb);
                }
            }
        }

        struct Rim { int a, b, outer; };
        std::vector<Rim> rim;
        for (int c : cavity) {
            const Tri& t = tris_[static_cast<std::size_t>(c)];
            for (int k = 0; k < 3; ++k) {
                const int nb = t.nb[k];
                if (nb >= 0 && mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
                rim.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
            }
        }
        for (int c : cavity) tris_[static_cast<std::size_t>(c)].alive = false;

        std::unordered_map<int, int> by_start, by_end;
        std::vector<int> created;
        created.reserve(rim.size());
        for (const Rim& r : rim) {
            const int t = static_cast<int>(tris_.size());
            tris_.push_back({{r.a, r.b, id}, {-1, -1, r.outer}, true});
            created.push_back(t);
            by_start[r.a] = t;
            by_end[r.b] = t;
            if (r.outer >= 0) {
                Tri& o = tris_[static_cast<std::size_t>(r.outer)];
                for (int k = 0; k < 3; ++k)
                    if (o.v[(k + 1) % 3] == r.b && o.v[(k + 2) % 3] == r.a) o.nb[k] = t;
            }
        }
        for (int t : created) {
            Tri& tri = tris_[static_cast<std::size_t>(t)];
            // opposite v[0]=a is edge (b, p): shared with the triangle starting at b
            tri.nb[0] = by_start.at(tri.v[1]);
            // opposite v[1]=b is edge (p, a): shared with the triangle ending at a
            tri.nb[1] = by_end.at(tri.v[0]);
            for (int v : tri.v) vtri_[static_cast<std::size_t>(v)] = t;
        }
        last_ = created.empty() ? last_ : created.front();
        return id;
    }

    /// True when (a, b) is an edge of the current triangulation.
    bool has_edge(int a, int b) const {
        int found = -1;
        visit_star(a, [&](int t) {
            const Tri& tri = tris_[static_cast<std::size_t>(t)];
            if (tri.v[0] == b || tri.v[1] == b || tri.v[2] == b) found = t;
        });
        return found >= 0;
    }

    /// Calls fn(t) for every alive triangle incident to vertex v.
    template <class Fn>
    void visit_star(int v, Fn&& fn) const {
        const int start = vtri_[static_cast<std::size_t>(v)];
        if (start < 0) return;
        // rotate in one direction until we come back or hit the hull, then the other
        auto step = [&](int t, int dir) {
            const Tri& tri = tris_[static_cast<std::size_t>(t)];
            const int k = tri.v[0] == v ? 0 : (tri.v[1] == v ? 1 : 2);
            return tri.nb[(k + dir) % 3];
        };
        int t = start;
        do {
            fn(t);
            t = step(t, 1);
        } while (t >= 0 && t != start);
        if (t == start) return;
        t = step(start, 2);
        while (t >= 0 && t != start) {
            fn(t);
            t = step(t, 2);
        }
    }

private:
    int locate(Vec2 p) {
        int t = last_;
        if (t < 0 || !tris_[static_cast<std::size_t>(t)].alive) {
            for (std::size_t i = tris_.size(); i-- > 0;)
                if (tris_[i].alive) { t = static_cast<int>(i); break; }
        }
        const std::size_t limit = 4 * tris_.size() + 16;
        std::uint32_t rot = 0;
        for (std::size_t steps = 0; steps < limit; ++steps) {
            const Tri& tri = tris_[static_cast<std::size_t>(t)];
            bool moved = false;
            ++rot;
            for (int r = 0; r < 3; ++r) {
                const int k = static_cast<int>((r + rot) % 3);
                const Vec2 a = pts_[tri.v[(k + 1) % 3]], b = pts_[tri.v[(k + 2) % 3]];
                if (orient2d(a, b, p) < 0.0 && tri.nb[k] >= 0) {
                    t = tri.nb[k];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            const Tri& tri = tris_[i];
            if (!tri.alive) continue;
            if (orient2d(pts_[tri.v[0]], pts_[tri.v[1]], p) >= 0.0 && orient2d(pts_[tri.v[1]], pts_[tri.v[2]], p) >= 0.0 &&
                orient2d(pts_[tri.v[2]], pts_[tri.v[0]], p) >= 0.0)
                return static_cast<int>(i);
        }
        fail(ErrorCode::MeshingFailed, "point location failed during Delaunay insertion");
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
    int last_ = 0;
    double scale_ = 1.0;
};

}  // namespace nhyb::detail
