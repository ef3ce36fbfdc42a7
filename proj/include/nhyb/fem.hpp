#pragma once

/// Lagrange P1/P2 spaces on a Triangulation, volume and load assembly,
/// Dirichlet elimination and point evaluation.

#include <concepts>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mesh.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"

namespace nhyb {

using Bary = std::array<double, 3>;

/// Gradients of the barycentric coordinates on triangle (p0, p1, p2).
inline std::array<Vec2, 3> barycentric_gradients(const std::array<Vec2, 3>& p) {
    const double a2 = orient2d(p[0], p[1], p[2]);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        const Vec2 u = p[(i + 1) % 3], w = p[(i + 2) % 3];
        g[i] = Vec2{u.y - w.y, w.x - u.x} / a2;
    }
    return g;
}

inline Vec2 from_barycentric(const std::array<Vec2, 3>& p, const Bary& l) {
    return p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
}

/// Barycentric coordinates of x with respect to (p0, p1, p2).
inline Bary to_barycentric(const std::array<Vec2, 3>& p, Vec2 x) {
    const double a2 = orient2d(p[0], p[1], p[2]);
    const double l1 = orient2d(p[0], x, p[2]) / a2;
    const double l2 = orient2d(p[0], p[1], x) / a2;
    return {1.0 - l1 - l2, l1, l2};
}

/// Uniform bin grid over the mesh bounding box; each bin lists the triangles
/// whose bounding boxes overlap it.
class PointLocator {
public:
    explicit PointLocator(const Triangulation& mesh) : mesh_(&mesh) {
        for (const Vec2& v : mesh.vertices()) box_.expand(v);
        const double w = std::max(box_.hi.x - box_.lo.x, 1e-300), h = std::max(box_.hi.y - box_.lo.y, 1e-300);
        const double target = std::max(1.0, std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0));
        nx_ = std::max(1, static_cast<int>(std::ceil(target * std::sqrt(w / h))));
        ny_ = std::max(1, static_cast<int>(std::ceil(target * std::sqrt(h / w))));
        dx_ = w / nx_;
        dy_ = h / ny_;
        std::vector<std::size_t> count(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) + 1, 0);
        auto for_bins = [&](std::size_t t, auto&& fn) {
            BoundingBox b;
            for (const Vec2& c : mesh.corners(t)) b.expand(c);
            const int i0 = cell_x(b.lo.x), i1 = cell_x(b.hi.x), j0 = cell_y(b.lo.y), j1 = cell_y(b.hi.y);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) fn(static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i));
        };
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) for_bins(t, [&](std::size_t b) { ++count[b + 1]; });
        for (std::size_t b = 0; b + 1 < count.size(); ++b) count[b + 1] += count[b];
        start_ = count;
        items_.resize(count.back());
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
            for_bins(t, [&](std::size_t b) { items_[count[b]++] = static_cast<int>(t); });
    }

    /// Triangle containing p (closed, with tolerance relative to the triangle), or -1.
    int locate(Vec2 p, double tol = 1e-10) const {
        if (!box_.contains(p, tol * std::max(1.0, box_.hi.x - box_.lo.x))) return -1;
        const std::size_t b = static_cast<std::size_t>(cell_y(p.y)) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cell_x(p.x));
        int best = -1;
        double best_slack = -std::numeric_limits<double>::infinity();
        for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
            const int t = items_[k];
            const Bary l = to_barycentric(mesh_->corners(static_cast<std::size_t>(t)), p);
            const double slack = std::min({l[0], l[1], l[2]});
            if (slack >= 0.0) return t;
            if (slack > best_slack) {
                best_slack = slack;
                best = t;
            }
        }
        return best_slack >= -tol ? best : -1;
    }

private:
    int cell_x(double x) const { return std::clamp(static_cast<int>((x - box_.lo.x) / dx_), 0, nx_ - 1); }
    int cell_y(double y) const { return std::clamp(static_cast<int>((y - box_.lo.y) / dy_), 0, ny_ - 1); }

    const Triangulation* mesh_;
    BoundingBox box_;
    int nx_ = 1, ny_ = 1;
    double dx_ = 1.0, dy_ = 1.0;
    std::vector<std::size_t> start_;
    std::vector<int> items_;
};

/// Continuous Lagrange space of degree 1 or 2. P2 dofs: vertices first, then
/// one per edge; local edge dof 3+k sits on edge (v_k, v_{k+1}).
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Triangulation> mesh, int degree = 1) : mesh_(std::move(mesh)), degree_(degree) {
        require(mesh_ != nullptr, ErrorCode::InvalidArgument, "space needs a mesh");
        require(degree_ == 1 || degree_ == 2, ErrorCode::InvalidArgument, "only P1 and P2 elements are provided");
        const Triangulation& m = *mesh_;
        const std::size_t nt = m.num_triangles();
        const int nloc = local_size();
        dofs_.resize(nt * static_cast<std::size_t>(nloc));
        coords_ = m.vertices();
        std::unordered_map<std::uint64_t, int> edge_id;
        auto key = [](int a, int b) {
            if (a > b) std::swap(a, b);
            return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
        };
        for (std::size_t t = 0; t < nt; ++t) {
            const TriangleIndices& tri = m.triangle(t);
            int* d = dofs_.data() + t * static_cast<std::size_t>(nloc);
            for (int k = 0; k < 3; ++k) d[k] = tri[static_cast<std::size_t>(k)];
            if (degree_ == 2) {
                for (int k = 0; k < 3; ++k) {
                    const int a = tri[static_cast<std::size_t>(k)], b = tri[static_cast<std::size_t>((k + 1) % 3)];
                    auto [it, fresh] = edge_id.try_emplace(key(a, b), static_cast<int>(coords_.size()));
                    if (fresh) coords_.push_back((m.vertex(a) + m.vertex(b)) * 0.5);
                    d[3 + k] = it->second;
                }
            }
        }
        std::vector<char> mark(coords_.size(), 0);
        for (const BoundaryEdge& e : m.boundary_edges()) {
            if (e.tag != EdgeTag::Dirichlet) continue;
            mark[static_cast<std::size_t>(e.a)] = mark[static_cast<std::size_t>(e.b)] = 1;
            if (degree_ == 2) mark[static_cast<std::size_t>(edge_id.at(key(e.a, e.b)))] = 1;
        }
        for (std::size_t i = 0; i < mark.size(); ++i)
            if (mark[i]) boundary_.push_back(static_cast<int>(i));
    }

    const Triangulation& mesh() const { return *mesh_; }
    std::shared_ptr<const Triangulation> mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    int local_size() const { return degree_ == 1 ? 3 : 6; }
    std::size_t num_dofs() const { return coords_.size(); }
    std::size_t num_elements() const { return mesh_->num_triangles(); }
    std::span<const int> element_dofs(std::size_t t) const {
        return {dofs_.data() + t * static_cast<std::size_t>(local_size()), static_cast<std::size_t>(local_size())};
    }
    const std::vector<Vec2>& dof_coordinates() const { return coords_; }
    /// Dofs on Dirichlet-tagged boundary edges (the outer boundary of D).
    const std::vector<int>& boundary_dofs() const { return boundary_; }

    /// Shape function values at barycentric point l; phi has local_size() entries.
    void shape_values(const Bary& l, std::span<double> phi) const {
        if (degree_ == 1) {
            for (int k = 0; k < 3; ++k) phi[k] = l[k];
            return;
        }
        for (int k = 0; k < 3; ++k) {
            phi[k] = l[k] * (2.0 * l[k] - 1.0);
            phi[3 + k] = 4.0 * l[k] * l[(k + 1) % 3];
        }
    }

    /// Physical gradients given the barycentric gradients of the element.
    void shape_gradients(const std::array<Vec2, 3>& gl, const Bary& l, std::span<Vec2> grad) const {
        if (degree_ == 1) {
            for (int k = 0; k < 3; ++k) grad[k] = gl[k];
            return;
        }
        for (int k = 0; k < 3; ++k) {
            const int k1 = (k + 1) % 3;
            grad[k] = gl[k] * (4.0 * l[k] - 1.0);
            grad[3 + k] = (gl[k] * l[k1] + gl[k1] * l[k]) * 4.0;
        }
    }

    /// Lazily built point locator; safe to call concurrently.
    const PointLocator& locator() const {
        std::call_once(locator_state_->once, [this] { locator_state_->locator.emplace(*mesh_); });
        return *locator_state_->locator;
    }

    /// Nodal interpolant of u.
    template <class F>
    std::vector<double> interpolate(F&& u) const {
        std::vector<double> v(coords_.size());
        for (std::size_t i = 0; i < coords_.size(); ++i) v[i] = u(coords_[i]);
        return v;
    }

private:
    struct LocatorState {
        std::once_flag once;
        std::optional<PointLocator> locator;
    };

    std::shared_ptr<const Triangulation> mesh_;
    int degree_ = 1;
    std::vector<int> dofs_;
    std::vector<Vec2> coords_;
    std::vector<int> boundary_;
    std::shared_ptr<LocatorState> locator_state_ = std::make_shared<LocatorState>();
};

template <class F>
concept MatrixCallable = requires(const F& f, Vec2 x) {
    { f(x) } -> std::convertible_to<Mat2>;
};

template <class F>
concept ScalarCallable = requires(const F& f, Vec2 x) {
    { f(x) } -> std::convertible_to<double>;
};

/// Quadrature rule of the given polynomial degree, optionally subdivided.
inline QuadratureRule volume_rule(int degree, int subdivisions = 0) {
    return subdivide(triangle_rule(degree), subdivisions);
}

/// Adds every element's dof block (shifted by `offset`) to a pattern.
inline void add_element_blocks(const FeSpace& space, BlockList& blocks, int offset = 0) {
    std::vector<int> shifted(static_cast<std::size_t>(space.local_size()));
    for (std::size_t t = 0; t < space.num_elements(); ++t) {
        const auto d = space.element_dofs(t);
        for (std::size_t k = 0; k < d.size(); ++k) shifted[k] = d[k] + offset;
        blocks.add(shifted);
    }
}

/// A += sum_tau sum_q w_q b(x_q) grad(phi_i) . grad(phi_j), rows/cols shifted
/// by `offset`. A must already contain the element pattern.
template <MatrixCallable Coef>
void assemble_volume_into(CsrMatrix& a, const FeSpace& space, const Coef& coef, const QuadratureRule& rule,
                          int offset = 0) {
    const int nloc = space.local_size();
    std::vector<double> local(static_cast<std::size_t>(nloc * nloc));
    std::vector<Vec2> grad(static_cast<std::size_t>(nloc)), bgrad(static_cast<std::size_t>(nloc));
    for (std::size_t t = 0; t < space.num_elements(); ++t) {
        const auto p = space.mesh().corners(t);
        const auto gl = barycentric_gradients(p);
        const double jac = 2.0 * space.mesh().area(t);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Bary& l = rule.points[q];
            const Mat2 b = coef(from_barycentric(p, l));
            const double w = rule.weights[q] * jac;
            space.shape_gradients(gl, l, grad);
            for (int j = 0; j < nloc; ++j) bgrad[static_cast<std::size_t>(j)] = b * grad[static_cast<std::size_t>(j)];
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j)
                    local[static_cast<std::size_t>(i * nloc + j)] +=
                        w * dot(bgrad[static_cast<std::size_t>(j)], grad[static_cast<std::size_t>(i)]);
        }
        const auto d = space.element_dofs(t);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j)
                a.add(d[static_cast<std::size_t>(i)] + offset, d[static_cast<std::size_t>(j)] + offset,
                      local[static_cast<std::size_t>(i * nloc + j)]);
    }
}

/// Stiffness matrix of -div(b grad u) on one space.
template <MatrixCallable Coef>
CsrMatrix assemble_volume(const FeSpace& space, const Coef& coef, const QuadratureRule& rule) {
    BlockList blocks;
    add_element_blocks(space, blocks);
    CsrMatrix a = pattern_from_blocks(space.num_dofs(), blocks);
    assemble_volume_into(a, space, coef, rule);
    return a;
}

template <MatrixCallable Coef>
CsrMatrix assemble_volume(const FeSpace& space, const Coef& coef, int quad_degree = 4, int subdivisions = 0) {
    return assemble_volume(space, coef, volume_rule(quad_degree, subdivisions));
}

/// b[i + offset] += int f phi_i.
template <ScalarCallable F>
void assemble_load_into(std::span<double> b, const FeSpace& space, const F& f, const QuadratureRule& rule,
                        int offset = 0) {
    const int nloc = space.local_size();
    std::vector<double> phi(static_cast<std::size_t>(nloc));
    for (std::size_t t = 0; t < space.num_elements(); ++t) {
        const auto p = space.mesh().corners(t);
        const double jac = 2.0 * space.mesh().area(t);
        const auto d = space.element_dofs(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Bary& l = rule.points[q];
            const double w = rule.weights[q] * jac * f(from_barycentric(p, l));
            space.shape_values(l, phi);
            for (int i = 0; i < nloc; ++i)
                b[static_cast<std::size_t>(d[static_cast<std::size_t>(i)] + offset)] += w * phi[static_cast<std::size_t>(i)];
        }
    }
}

template <ScalarCallable F>
std::vector<double> assemble_load(const FeSpace& space, const F& f, int quad_degree = 4) {
    std::vector<double> b(space.num_dofs(), 0.0);
    assemble_load_into(b, space, f, triangle_rule(quad_degree));
    return b;
}

/// System with Dirichlet dofs removed. `free_dofs[k]` is the full index of
/// reduced unknown k.
struct ReducedSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<int> free_dofs;
    std::vector<int> fixed_dofs;
    std::vector<double> fixed_values;
    std::size_t full_size = 0;

    /// Full vector: reduced values at free dofs, prescribed values elsewhere.
    std::vector<double> expand(std::span<const double> reduced) const {
        std::vector<double> full(full_size, 0.0);
        for (std::size_t k = 0; k < free_dofs.size(); ++k) full[static_cast<std::size_t>(free_dofs[k])] = reduced[k];
        for (std::size_t k = 0; k < fixed_dofs.size(); ++k)
            full[static_cast<std::size_t>(fixed_dofs[k])] = fixed_values[k];
        return full;
    }
};

/// Eliminates rows and columns of `fixed` dofs. `values` (same length as
/// `fixed`, default zero) are moved to the right-hand side.
inline ReducedSystem apply_dirichlet(const CsrMatrix& a, std::span<const double> b, std::span<const int> fixed,
                                     std::span<const double> values = {}) {
    require(values.empty() || values.size() == fixed.size(), ErrorCode::InvalidArgument,
            "Dirichlet values do not match the fixed dof list");
    const std::size_t n = a.rows();
    ReducedSystem out;
    out.full_size = n;
    std::vector<double> g(n, 0.0);
    std::vector<int> map(n, 0);
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        const int d = fixed[k];
        require(d >= 0 && static_cast<std::size_t>(d) < n, ErrorCode::InvalidArgument, "fixed dof out of range");
        if (map[static_cast<std::size_t>(d)] == -1) continue;
        map[static_cast<std::size_t>(d)] = -1;
        g[static_cast<std::size_t>(d)] = values.empty() ? 0.0 : values[k];
        out.fixed_dofs.push_back(d);
        out.fixed_values.push_back(g[static_cast<std::size_t>(d)]);
    }
    int next = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (map[i] == 0) {
            map[i] = next++;
            out.free_dofs.push_back(static_cast<int>(i));
        }
    const std::size_t m = out.free_dofs.size();
    std::vector<std::size_t> ptr(m + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    out.rhs.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = static_cast<std::size_t>(out.free_dofs[r]);
        double rhs = b[i];
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const int j = a.col_idx()[k];
            const int mj = map[static_cast<std::size_t>(j)];
            if (mj < 0) {
                rhs -= a.values()[k] * g[static_cast<std::size_t>(j)];
            } else {
                cols.push_back(mj);
                vals.push_back(a.values()[k]);
            }
        }
        out.rhs[r] = rhs;
        ptr[r + 1] = cols.size();
    }
    out.matrix = CsrMatrix(m, m, std::move(ptr), std::move(cols), std::move(vals));
    return out;
}

struct PointValue {
    double value = 0.0;
    Vec2 gradient;
    int triangle = -1;
};

/// Value and gradient of the FE function with coefficients `u` at p.
inline PointValue evaluate_in_element(const FeSpace& space, std::span<const double> u, std::size_t t, Vec2 p) {
    const auto c = space.mesh().corners(t);
    const Bary l = to_barycentric(c, p);
    const auto gl = barycentric_gradients(c);
    std::array<double, 6> phi{};
    std::array<Vec2, 6> grad{};
    const std::size_t nloc = static_cast<std::size_t>(space.local_size());
    space.shape_values(l, std::span<double>(phi.data(), nloc));
    space.shape_gradients(gl, l, std::span<Vec2>(grad.data(), nloc));
    PointValue out;
    out.triangle = static_cast<int>(t);
    const auto d = space.element_dofs(t);
    for (std::size_t k = 0; k < nloc; ++k) {
        const double uk = u[static_cast<std::size_t>(d[k])];
        out.value += uk * phi[k];
        out.gradient += grad[k] * uk;
    }
    return out;
}

/// Throws PointOutsideMesh when p is not covered by the mesh.
inline PointValue evaluate_fe_function(const FeSpace& space, std::span<const double> u, Vec2 p) {
    require(u.size() == space.num_dofs(), ErrorCode::InvalidArgument, "coefficient vector has wrong size");
    const int t = space.locator().locate(p);
    if (t < 0) {
        std::ostringstream msg;
        msg << "point (" << p.x << ", " << p.y << ") is outside the mesh";
        fail(ErrorCode::PointOutsideMesh, msg.str());
    }
    return evaluate_in_element(space, u, static_cast<std::size_t>(t), p);
}

}  // namespace nhyb
