#pragma once

/// Weighted Nitsche coupling of X_h (on K1) and X_H (on K2):
///
///   B(v, w) = sum_i int_{K_i} b grad v . grad w
///           - sum_e int_e {b grad v . n}_w [w] - sum_e int_e {b^T grad w . n}_w [v]
///           + sum_e gamma / (H_e + h_e) int_e [v][w]
///
/// Unknowns are ordered fine dofs first, then coarse dofs.

#include <array>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "fem.hpp"
#include "interface.hpp"
#include "solver.hpp"

namespace nhyb {

/// Penalty lower bound in two dimensions:
/// (16 sqrt 3 / 9) r (r + 1) sigma Lambda'^2 / min(1, lambda'^2).
inline double penalty_lower_bound(int r, double sigma, double lambda, double Lambda) {
    require(lambda > 0.0 && Lambda > 0.0 && lambda <= Lambda, ErrorCode::BadBounds,
            "coefficient bounds must satisfy 0 < lambda' <= Lambda'");
    require(r >= 1, ErrorCode::InvalidArgument, "degree must be at least 1");
    require(sigma >= 1.0, ErrorCode::InvalidArgument, "chunkiness is at least 1");
    return 16.0 * std::sqrt(3.0) / 9.0 * r * (r + 1) * sigma * Lambda * Lambda / std::min(1.0, lambda * lambda);
}

struct NitscheOptions {
    double gamma = 50.0;
    int quad_degree = 4;
    int fine_subdivisions = 0;
    int coarse_subdivisions = 0;
    /// Bounds used for gamma0 when the coefficient does not carry its own.
    double lambda = 1.0;
    double Lambda = 1.0;
};

struct NitscheSystem {
    CsrMatrix matrix;  ///< before Dirichlet elimination
    std::vector<double> rhs;
    std::size_t fine_dofs = 0;
    std::size_t coarse_dofs = 0;
    std::vector<int> dirichlet;  ///< combined indices of dofs on the outer boundary
    double gamma = 0.0;
    double gamma0 = 0.0;
    double sigma = 0.0;
    bool penalty_below_bound = false;
    std::vector<InterfaceEdge> interface;
    std::vector<std::string> diagnostics;

    std::size_t size() const { return fine_dofs + coarse_dofs; }
    /// B(v, w) = w^T A v on combined vectors.
    double form(std::span<const double> v, std::span<const double> w) const { return matrix.bilinear(w, v); }
};

namespace detail {

/// Trace data of every local basis function of one side at a point.
struct SideTrace {
    std::array<double, 6> value{};
    std::array<Vec2, 6> grad{};
    int count = 0;
};

inline SideTrace side_trace(const FeSpace& space, int triangle, Vec2 x) {
    SideTrace s;
    const auto c = space.mesh().corners(static_cast<std::size_t>(triangle));
    const Bary l = to_barycentric(c, x);
    const auto gl = barycentric_gradients(c);
    s.count = space.local_size();
    space.shape_values(l, std::span<double>(s.value.data(), static_cast<std::size_t>(s.count)));
    space.shape_gradients(gl, l, std::span<Vec2>(s.grad.data(), static_cast<std::size_t>(s.count)));
    return s;
}

/// Combined local dof list of an interface edge: fine dofs then shifted coarse dofs.
inline std::vector<int> interface_dofs(const FeSpace& fine, const FeSpace& coarse, const InterfaceEdge& e) {
    std::vector<int> d;
    for (int v : fine.element_dofs(static_cast<std::size_t>(e.fine_triangle))) d.push_back(v);
    const int off = static_cast<int>(fine.num_dofs());
    for (int v : coarse.element_dofs(static_cast<std::size_t>(e.coarse_triangle))) d.push_back(v + off);
    return d;
}

}  // namespace detail

/// Assembles the Nitsche system for coefficient `b` with transition `rho`
/// (checked to vanish on every interface quadrature point) and load `f`.
template <MatrixCallable Coef, ScalarCallable Rho, ScalarCallable Load>
NitscheSystem assemble_nitsche(const Coef& b, const Rho& rho, const FeSpace& fine, const FeSpace& coarse,
                               std::vector<InterfaceEdge> cap, const Load& f, const NitscheOptions& opt) {
    require(fine.degree() == coarse.degree(), ErrorCode::InvalidArgument, "both spaces must have the same degree");
    require(opt.gamma > 0.0, ErrorCode::InvalidArgument, "penalty must be positive");
    NitscheSystem sys;
    sys.fine_dofs = fine.num_dofs();
    sys.coarse_dofs = coarse.num_dofs();
    sys.gamma = opt.gamma;
    sys.sigma = std::max(fine.mesh().chunkiness(), coarse.mesh().chunkiness());
    sys.gamma0 = penalty_lower_bound(fine.degree(), sys.sigma, opt.lambda, opt.Lambda);
    if (opt.gamma < sys.gamma0) {
        sys.penalty_below_bound = true;
        sys.diagnostics.push_back("PenaltyBelowBound: gamma = " + std::to_string(opt.gamma) +
                                  " < gamma0 = " + std::to_string(sys.gamma0));
    }
    const int off = static_cast<int>(sys.fine_dofs);

    BlockList blocks;
    add_element_blocks(fine, blocks);
    add_element_blocks(coarse, blocks, off);
    for (const InterfaceEdge& e : cap) blocks.add(detail::interface_dofs(fine, coarse, e));
    sys.matrix = pattern_from_blocks(sys.size(), blocks);
    blocks = BlockList{};

    assemble_volume_into(sys.matrix, fine, b, volume_rule(opt.quad_degree, opt.fine_subdivisions));
    assemble_volume_into(sys.matrix, coarse, b, volume_rule(opt.quad_degree, opt.coarse_subdivisions), off);

    const LineRule line = gauss_legendre(3);
    std::vector<double> flux, adj, jump;
    for (const InterfaceEdge& e : cap) {
        const std::vector<int> dofs = detail::interface_dofs(fine, coarse, e);
        const std::size_t m = dofs.size();
        const std::size_t nf = static_cast<std::size_t>(fine.local_size());
        std::vector<double> local(m * m, 0.0);
        const double len = e.length();
        const double pen = opt.gamma / (e.H + e.h);
        for (std::size_t g = 0; g < line.points.size(); ++g) {
            const Vec2 x = e.a + (e.b - e.a) * line.points[g];
            const double r = rho(x);
            if (std::abs(r) > 1e-12) {
                std::ostringstream msg;
                msg << "rho = " << r << " at interface point (" << x.x << ", " << x.y << ")";
                fail(ErrorCode::NonzeroRhoOnInterface, msg.str());
            }
            const Mat2 bx = b(x);
            const Mat2 bt = bx.transposed();
            const detail::SideTrace s1 = detail::side_trace(fine, e.fine_triangle, x);
            const detail::SideTrace s2 = detail::side_trace(coarse, e.coarse_triangle, x);
            flux.assign(m, 0.0);
            adj.assign(m, 0.0);
            jump.assign(m, 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                if (k < nf) {
                    flux[k] = e.w1 * dot(bx * s1.grad[k], e.normal);
                    adj[k] = e.w1 * dot(bt * s1.grad[k], e.normal);
                    jump[k] = s1.value[k];
                } else {
                    flux[k] = e.w2 * dot(bx * s2.grad[k - nf], e.normal);
                    adj[k] = e.w2 * dot(bt * s2.grad[k - nf], e.normal);
                    jump[k] = -s2.value[k - nf];
                }
            }
            const double w = line.weights[g] * len;
            // row i = test function, column j = trial function
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    local[i * m + j] += w * (-flux[j] * jump[i] - adj[i] * jump[j] + pen * jump[i] * jump[j]);
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) sys.matrix.add(dofs[i], dofs[j], local[i * m + j]);
    }

    sys.rhs.assign(sys.size(), 0.0);
    assemble_load_into(sys.rhs, fine, f, volume_rule(opt.quad_degree));
    assemble_load_into(sys.rhs, coarse, f, volume_rule(opt.quad_degree), off);
    for (int d : fine.boundary_dofs()) sys.dirichlet.push_back(d);
    for (int d : coarse.boundary_dofs()) sys.dirichlet.push_back(d + off);
    sys.interface = std::move(cap);
    return sys;
}

/// Hybrid-coefficient overload: bounds for gamma0 come from the coefficient.
template <ScalarCallable Load>
NitscheSystem assemble_nitsche(const HybridCoefficient& b, const FeSpace& fine, const FeSpace& coarse,
                               std::vector<InterfaceEdge> cap, const Load& f, NitscheOptions opt) {
    opt.lambda = b.lambda();
    opt.Lambda = b.Lambda();
    return assemble_nitsche(b, [&b](Vec2 x) { return b.rho(x); }, fine, coarse, std::move(cap), f, opt);
}

/// |||v|||^2 = sum_i |v|_{1,K_i}^2 + sum_e gamma / (H_e + h_e) ||[v]||_{0,e}^2.
inline double broken_energy_norm(const FeSpace& fine, const FeSpace& coarse, const std::vector<InterfaceEdge>& cap,
                                 double gamma, std::span<const double> v) {
    require(v.size() == fine.num_dofs() + coarse.num_dofs(), ErrorCode::InvalidArgument, "vector has wrong size");
    const QuadratureRule rule = triangle_rule(std::max(1, 2 * fine.degree() - 2));
    double s = 0.0;
    std::size_t off = 0;
    for (const FeSpace* space : {&fine, &coarse}) {
        std::vector<Vec2> grad(static_cast<std::size_t>(space->local_size()));
        for (std::size_t t = 0; t < space->num_elements(); ++t) {
            const auto c = space->mesh().corners(t);
            const auto gl = barycentric_gradients(c);
            const auto d = space->element_dofs(t);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                space->shape_gradients(gl, rule.points[q], grad);
                Vec2 g;
                for (std::size_t k = 0; k < d.size(); ++k) g += grad[k] * v[off + static_cast<std::size_t>(d[k])];
                s += rule.weights[q] * 2.0 * space->mesh().area(t) * dot(g, g);
            }
        }
        off += space->num_dofs();
    }
    const LineRule line = gauss_legendre(3);
    const std::size_t nf = fine.num_dofs();
    for (const InterfaceEdge& e : cap) {
        const auto df = fine.element_dofs(static_cast<std::size_t>(e.fine_triangle));
        const auto dc = coarse.element_dofs(static_cast<std::size_t>(e.coarse_triangle));
        double j2 = 0.0;
        for (std::size_t g = 0; g < line.points.size(); ++g) {
            const Vec2 x = e.a + (e.b - e.a) * line.points[g];
            const detail::SideTrace s1 = detail::side_trace(fine, e.fine_triangle, x);
            const detail::SideTrace s2 = detail::side_trace(coarse, e.coarse_triangle, x);
            double jump = 0.0;
            for (std::size_t k = 0; k < df.size(); ++k) jump += s1.value[k] * v[static_cast<std::size_t>(df[k])];
            for (std::size_t k = 0; k < dc.size(); ++k) jump -= s2.value[k] * v[nf + static_cast<std::size_t>(dc[k])];
            j2 += line.weights[g] * jump * jump;
        }
        s += gamma / (e.H + e.h) * j2 * e.length();
    }
    return std::sqrt(s);
}

struct NitscheSolution {
    std::vector<double> combined;
    std::vector<double> fine;
    std::vector<double> coarse;
    SolveReport report;
    double galerkin_residual = 0.0;  ///< ||B v - F|| / ||F|| on the reduced system
};

/// Eliminates the outer-boundary dofs (values from `g`, default zero) and solves.
inline NitscheSolution solve_nitsche(const NitscheSystem& sys, const SolverOptions& solver = {},
                                     const std::function<double(Vec2)>& g = {}, const FeSpace* fine = nullptr,
                                     const FeSpace* coarse = nullptr) {
    std::vector<double> values;
    if (g) {
        require(fine != nullptr && coarse != nullptr, ErrorCode::InvalidArgument, "boundary data needs both spaces");
        for (int d : sys.dirichlet) {
            const std::size_t k = static_cast<std::size_t>(d);
            const Vec2 x = k < sys.fine_dofs ? fine->dof_coordinates()[k] : coarse->dof_coordinates()[k - sys.fine_dofs];
            values.push_back(g(x));
        }
    }
    const ReducedSystem red = apply_dirichlet(sys.matrix, sys.rhs, sys.dirichlet, values);
    const SolveResult r = solve_spd(red.matrix, red.rhs, solver);
    NitscheSolution out;
    out.report = r.report;
    std::vector<double> res = red.matrix * r.x;
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= red.rhs[i];
    const double fn = norm2(red.rhs);
    out.galerkin_residual = fn > 0.0 ? norm2(res) / fn : norm2(res);
    out.combined = red.expand(r.x);
    out.fine.assign(out.combined.begin(), out.combined.begin() + static_cast<std::ptrdiff_t>(sys.fine_dofs));
    out.coarse.assign(out.combined.begin() + static_cast<std::ptrdiff_t>(sys.fine_dofs), out.combined.end());
    return out;
}

}  // namespace nhyb
