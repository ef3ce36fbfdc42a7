#pragma once

/// Domain D = (0,1)^2, defect region K0, buffer K1 and interface polylines.

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "core.hpp"

namespace nhyb {

/// Closed polygon, vertices in order, last edge implicit.
using Polygon = std::vector<Vec2>;

inline double signed_area(const Polygon& poly) {
    double twice = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * twice;
}

inline double perimeter(const Polygon& poly) {
    double len = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) len += distance(poly[i], poly[(i + 1) % n]);
    return len;
}

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

inline double distance_to_boundary(const Polygon& poly, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = poly.size(); i < n; ++i)
        best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
    return best;
}

/// Closed segments [a,b] and [c,d] share at least one point.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol = 1e-14) {
    const double d1 = orient2d(c, d, a), d2 = orient2d(c, d, b);
    const double d3 = orient2d(a, b, c), d4 = orient2d(a, b, d);
    if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
        ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
        return true;
    return distance_to_segment(a, c, d) <= tol || distance_to_segment(b, c, d) <= tol ||
           distance_to_segment(c, a, b) <= tol || distance_to_segment(d, a, b) <= tol;
}

/// True when two non-adjacent edges touch or cross.
inline bool polygon_self_intersects(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
        }
    }
    return false;
}

enum class Containment { Outside, Boundary, Inside };

inline Containment locate_in_polygon(const Polygon& poly, Vec2 p, double tol = 1e-12) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j], b = poly[i];
        if (distance_to_segment(p, a, b) <= tol) return Containment::Boundary;
        if ((b.y > p.y) != (a.y > p.y)) {
            const double xcross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xcross) inside = !inside;
        }
    }
    return inside ? Containment::Inside : Containment::Outside;
}

/// Minimum distance between the boundaries of two polygons.
inline double boundary_distance(const Polygon& p, const Polygon& q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
        const Vec2 a = p[i], b = p[(i + 1) % n];
        for (std::size_t j = 0, m = q.size(); j < m; ++j) {
            const Vec2 c = q[j], d = q[(j + 1) % m];
            if (segments_intersect(a, b, c, d, 0.0)) return 0.0;
            best = std::min({best, distance_to_segment(a, c, d), distance_to_segment(b, c, d),
                             distance_to_segment(c, a, b), distance_to_segment(d, a, b)});
        }
    }
    return best;
}

struct BoundingBox {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void expand(Vec2 p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
    }
};

inline BoundingBox bounding_box(const Polygon& poly) {
    BoundingBox box;
    for (const Vec2& p : poly) box.expand(p);
    return box;
}

/// Inscribed polygon with `segments` vertices on the ellipse
/// center + R(rotation) (a cos t, b sin t), counterclockwise.
inline Polygon polygonize_ellipse(Vec2 center, double a, double b, double rotation, int segments,
                                  int min_segments = 8) {
    require(segments >= min_segments, ErrorCode::InvalidArgument,
            "n_segments too small: " + std::to_string(segments) + " < " + std::to_string(min_segments));
    require(a > 0.0 && b > 0.0, ErrorCode::DegenerateShape, "ellipse semi-axes must be positive");
    const double c = std::cos(rotation), s = std::sin(rotation);
    Polygon poly;
    poly.reserve(static_cast<std::size_t>(segments));
    for (int k = 0; k < segments; ++k) {
        const double t = 2.0 * pi * k / segments;
        const double u = a * std::cos(t), v = b * std::sin(t);
        poly.push_back({center.x + c * u - s * v, center.y + s * u + c * v});
    }
    return poly;
}

/// Mitered offset of a polyline: the region swept by a segment of half-width
/// `half_width` normal to the spine, with the spine extended by `extend` at both ends.
/// For axis-parallel spines this is exactly the L-infinity offset.
inline Polygon thick_polyline(const std::vector<Vec2>& spine, double half_width, double extend = 0.0) {
    require(spine.size() >= 2, ErrorCode::DegenerateShape, "channel spine needs at least two points");
    const std::size_t n = spine.size();
    std::vector<Vec2> dirs(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec2 d = spine[i + 1] - spine[i];
        const double len = norm(d);
        require(len > 0.0, ErrorCode::DegenerateShape, "repeated spine point");
        dirs[i] = d / len;
    }
    auto left_normal = [](Vec2 d) { return Vec2{-d.y, d.x}; };
    std::vector<Vec2> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 offset;
        Vec2 base = spine[i];
        if (i == 0) {
            offset = left_normal(dirs.front());
            base -= dirs.front() * extend;
        } else if (i == n - 1) {
            offset = left_normal(dirs.back());
            base += dirs.back() * extend;
        } else {
            const Vec2 na = left_normal(dirs[i - 1]), nb = left_normal(dirs[i]);
            const double denom = 1.0 + dot(na, nb);
            require(denom > 1e-6, ErrorCode::DegenerateShape, "channel spine folds back on itself");
            offset = (na + nb) / denom;
        }
        left[i] = base + offset * half_width;
        right[i] = base - offset * half_width;
    }
    Polygon poly(right.begin(), right.end());
    poly.insert(poly.end(), left.rbegin(), left.rend());
    return poly;
}

inline Polygon axis_square(Vec2 center, double half) {
    return {{center.x - half, center.y - half},
            {center.x + half, center.y - half},
            {center.x + half, center.y + half},
            {center.x - half, center.y + half}};
}

struct WellDefect {
    Vec2 center{0.5, 0.5};
    double half_width = 0.05;
};

struct ChannelDefect {
    std::vector<Vec2> spine;
    double width = 0.05;
};

struct EllipseSpec {
    Vec2 center{0.5, 0.5};
    double a = 0.25;  ///< semi-axis along the rotated x direction
    double b = 0.01;
    double rotation = 0.0;
};

struct EllipseDefect {
    std::vector<EllipseSpec> ellipses;
    int segments = 128;
};

using DefectShape = std::variant<WellDefect, ChannelDefect, EllipseDefect>;

/// Index order doubles as the tie-break order for boundary points.
enum class Region { Defect = 0, Buffer = 1, Exterior = 2 };

/// K0 (defect), K1 (buffer containing K0), K2 = D \ K1 and Gamma = boundary of K1.
/// Component i of `defect` lies inside component i of `buffer`.
class RegionPartition {
public:
    RegionPartition(std::vector<Polygon> defect, std::vector<Polygon> buffer)
        : defect_(std::move(defect)), buffer_(std::move(buffer)) {
        require(defect_.size() == buffer_.size() && !buffer_.empty(), ErrorCode::InvalidArgument,
                "defect and buffer component counts differ");
        for (auto* set : {&defect_, &buffer_})
            for (Polygon& p : *set)
                if (signed_area(p) < 0.0) std::reverse(p.begin(), p.end());
        for (const Polygon& p : defect_) defect_boxes_.push_back(bounding_box(p));
        for (const Polygon& p : buffer_) buffer_boxes_.push_back(bounding_box(p));
        gap_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < defect_.size(); ++i)
            gap_ = std::min(gap_, boundary_distance(defect_[i], buffer_[i]));
    }

    const std::vector<Polygon>& defect() const { return defect_; }
    const std::vector<Polygon>& buffer() const { return buffer_; }
    /// Gamma: closed counterclockwise loops, one per buffer component.
    const std::vector<Polygon>& interface_loops() const { return buffer_; }
    /// dist(K0, Gamma).
    double gap() const { return gap_; }

    double interface_length() const {
        double len = 0.0;
        for (const Polygon& p : buffer_) len += perimeter(p);
        return len;
    }
    double defect_area() const {
        double a = 0.0;
        for (const Polygon& p : defect_) a += signed_area(p);
        return a;
    }
    double buffer_area() const {
        double a = 0.0;
        for (const Polygon& p : buffer_) a += signed_area(p);
        return a;
    }

    /// Closed K0 -> Defect, remaining closed K1 (including Gamma) -> Buffer, else Exterior.
    Region classify(Vec2 p) const {
        for (std::size_t i = 0; i < defect_.size(); ++i)
            if (defect_boxes_[i].contains(p, kTol) && locate_in_polygon(defect_[i], p, kTol) != Containment::Outside)
                return Region::Defect;
        if (in_closed_buffer(p)) return Region::Buffer;
        return Region::Exterior;
    }

    bool in_closed_buffer(Vec2 p) const {
        for (std::size_t i = 0; i < buffer_.size(); ++i)
            if (buffer_boxes_[i].contains(p, kTol) && locate_in_polygon(buffer_[i], p, kTol) != Containment::Outside)
                return true;
        return false;
    }

    bool in_closed_defect(Vec2 p) const { return classify(p) == Region::Defect; }

    static constexpr double kTol = 1e-12;

private:
    std::vector<Polygon> defect_;
    std::vector<Polygon> buffer_;
    std::vector<BoundingBox> defect_boxes_;
    std::vector<BoundingBox> buffer_boxes_;
    double gap_ = 0.0;
};

namespace detail {

inline void require_inside_domain(const Polygon& poly) {
    for (const Vec2& p : poly) {
        if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) {
            std::ostringstream msg;
            msg << "buffer vertex (" << p.x << ", " << p.y << ") is not inside (0,1)^2";
            fail(ErrorCode::BufferEscapesDomain, msg.str());
        }
    }
}

}  // namespace detail

/// Build K0, K1 = K0 offset by `delta`, Gamma and d for a defect shape.
/// Well: concentric squares. Channel: mitered offset of the spine. Ellipse: each
/// ellipse gets its own rectangle with half-sizes (a + delta, b + delta).
inline RegionPartition build_partition(const DefectShape& shape, double delta) {
    require(delta > 0.0, ErrorCode::DegenerateShape, "buffer width must be positive");
    std::vector<Polygon> defect, buffer;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, WellDefect>) {
                require(s.half_width > 0.0, ErrorCode::DegenerateShape, "well half-width must be positive");
                defect.push_back(axis_square(s.center, s.half_width));
                buffer.push_back(axis_square(s.center, s.half_width + delta));
            } else if constexpr (std::is_same_v<T, ChannelDefect>) {
                require(s.width > 0.0, ErrorCode::DegenerateShape, "channel width must be positive");
                Polygon k0 = thick_polyline(s.spine, 0.5 * s.width);
                Polygon k1 = thick_polyline(s.spine, 0.5 * s.width + delta, delta);
                require(!polygon_self_intersects(k0) && !polygon_self_intersects(k1), ErrorCode::DegenerateShape,
                        "channel outline self-intersects");
                defect.push_back(std::move(k0));
                buffer.push_back(std::move(k1));
            } else {
                require(!s.ellipses.empty(), ErrorCode::DegenerateShape, "no ellipses given");
                for (const EllipseSpec& e : s.ellipses) {
                    require(e.a >= e.b && e.b > 0.0, ErrorCode::DegenerateShape, "ellipse needs a >= b > 0");
                    defect.push_back(polygonize_ellipse(e.center, e.a, e.b, e.rotation, s.segments));
                    const double c = std::cos(e.rotation), sn = std::sin(e.rotation);
                    const double ha = e.a + delta, hb = e.b + delta;
                    Polygon rect;
                    for (Vec2 q : {Vec2{-ha, -hb}, Vec2{ha, -hb}, Vec2{ha, hb}, Vec2{-ha, hb}})
                        rect.push_back({e.center.x + c * q.x - sn * q.y, e.center.y + sn * q.x + c * q.y});
                    buffer.push_back(std::move(rect));
                }
            }
        },
        shape);
    for (const Polygon& p : buffer) detail::require_inside_domain(p);
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        for (std::size_t j = i + 1; j < buffer.size(); ++j) {
            const bool overlap = boundary_distance(buffer[i], buffer[j]) <= 0.0 ||
                                 locate_in_polygon(buffer[i], buffer[j].front()) != Containment::Outside ||
                                 locate_in_polygon(buffer[j], buffer[i].front()) != Containment::Outside;
            require(!overlap, ErrorCode::InvalidArgument, "buffer regions of different defects overlap");
        }
    }
    return RegionPartition(std::move(defect), std::move(buffer));
}

/// One "x y" pair per line; the closing edge is implicit.
inline void write_polygon(std::ostream& os, const Polygon& poly) {
    os << std::setprecision(17);
    for (const Vec2& p : poly) os << p.x << ' ' << p.y << '\n';
}

inline Polygon read_polygon(std::istream& is) {
    Polygon poly;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        Vec2 p;
        if (ls >> p.x >> p.y) poly.push_back(p);
    }
    return poly;
}

}  // namespace nhyb
