#pragma once

/// Transition function rho: 1 on K0, 0 on Gamma and in K2. Either the nodal
/// interpolant on the one-layer ring (C0) or the tensor cosine profile for a
/// square well (C1).

#include <memory>
#include <optional>
#include <vector>

#include "fem.hpp"
#include "geometry.hpp"
#include "mesh.hpp"

namespace nhyb {

/// mu(t) = 1 for |t| < L, (cos(pi (|t| - L) / delta) + 1) / 2 for L <= |t| <= L + delta, else 0.
inline double cosine_profile(double t, double L, double delta) {
    const double a = std::abs(t);
    if (a < L) return 1.0;
    if (a > L + delta) return 0.0;
    return 0.5 * std::cos(pi * (a - L) / delta) + 0.5;
}

class TransitionFunction {
public:
    enum class Kind { C0Ring, C1Well };

    Kind kind() const { return kind_; }

    double operator()(Vec2 x) const {
        if (kind_ == Kind::C1Well)
            return cosine_profile(x.x - center_.x, half_width_, delta_) * cosine_profile(x.y - center_.y, half_width_, delta_);
        switch (partition_->classify(x)) {
            case Region::Defect: return 1.0;
            case Region::Exterior: return 0.0;
            case Region::Buffer: break;
        }
        int t = locator_->locate(x, 1e-9);
        if (t < 0) return 0.0;  // on Gamma up to rounding
        const auto c = ring_->corners(static_cast<std::size_t>(t));
        Bary l = to_barycentric(c, x);
        double s = 0.0, v = 0.0;
        for (int k = 0; k < 3; ++k) {
            l[k] = std::max(l[k], 0.0);
            s += l[k];
        }
        const TriangleIndices& tri = ring_->triangle(static_cast<std::size_t>(t));
        for (int k = 0; k < 3; ++k) v += l[k] / s * nodal_[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
        return v;
    }

    /// Ring triangles whose three vertices lie on the same boundary; rho is
    /// the constant boundary value there.
    const std::vector<int>& flat_triangles() const { return flat_; }
    const Triangulation* ring() const { return ring_.get(); }
    const std::vector<double>& nodal_values() const { return nodal_; }

    friend TransitionFunction build_c0_transition(const RegionPartition& part, Triangulation ring);
    friend TransitionFunction build_c1_well_transition(Vec2 center, double L, double delta);

private:
    Kind kind_ = Kind::C1Well;
    // C0 ring data
    std::shared_ptr<const RegionPartition> partition_;
    std::shared_ptr<const Triangulation> ring_;
    std::shared_ptr<const PointLocator> locator_;
    std::vector<double> nodal_;
    std::vector<int> flat_;
    // C1 well data
    Vec2 center_;
    double half_width_ = 0.0, delta_ = 0.0;
};

/// Piecewise-linear rho on the one-layer ring: 1 at vertices on the defect
/// boundary, 0 at vertices on Gamma.
inline TransitionFunction build_c0_transition(const RegionPartition& part, Triangulation ring) {
    TransitionFunction rho;
    rho.kind_ = TransitionFunction::Kind::C0Ring;
    rho.partition_ = std::make_shared<const RegionPartition>(part);
    auto mesh = std::make_shared<const Triangulation>(std::move(ring));
    constexpr double tol = 1e-10;
    rho.nodal_.resize(mesh->num_vertices());
    std::vector<int> side(mesh->num_vertices(), -1);  // 0 defect boundary, 1 Gamma
    for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
        const Vec2 p = mesh->vertex(static_cast<int>(v));
        for (const Polygon& loop : part.defect())
            if (distance_to_boundary(loop, p) < tol) side[v] = 0;
        for (const Polygon& loop : part.buffer())
            if (side[v] < 0 && distance_to_boundary(loop, p) < tol) side[v] = 1;
        if (side[v] < 0) {
            std::ostringstream msg;
            msg << "ring vertex (" << p.x << ", " << p.y << ") is on neither boundary";
            fail(ErrorCode::RingVertexOffBoundary, msg.str());
        }
        rho.nodal_[v] = side[v] == 0 ? 1.0 : 0.0;
    }
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const TriangleIndices& tri = mesh->triangle(t);
        if (side[static_cast<std::size_t>(tri[0])] == side[static_cast<std::size_t>(tri[1])] &&
            side[static_cast<std::size_t>(tri[1])] == side[static_cast<std::size_t>(tri[2])])
            rho.flat_.push_back(static_cast<int>(t));
    }
    rho.locator_ = std::make_shared<const PointLocator>(*mesh);
    rho.ring_ = std::move(mesh);
    return rho;
}

/// rho(x) = mu(x1 - c1) mu(x2 - c2) with the cosine profile mu.
inline TransitionFunction build_c1_well_transition(Vec2 center, double L, double delta) {
    require(L > 0.0 && delta > 0.0, ErrorCode::DegenerateShape, "C1 transition needs L > 0 and delta > 0");
    TransitionFunction rho;
    rho.kind_ = TransitionFunction::Kind::C1Well;
    rho.center_ = center;
    rho.half_width_ = L;
    rho.delta_ = delta;
    return rho;
}

}  // namespace nhyb
