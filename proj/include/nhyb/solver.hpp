#pragma once

/// Preconditioned conjugate gradients for the symmetric positive definite
/// systems produced by assembly.

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "sparse.hpp"

namespace nhyb {

enum class Preconditioner { Jacobi, IncompleteCholesky };

struct SolverOptions {
    double tol = 1e-10;
    /// 0 selects 50 * sqrt(n).
    std::size_t max_iter = 0;
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct SolveReport {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    double seconds = 0.0;
};

struct SolveResult {
    std::vector<double> x;
    SolveReport report;
};

/// Thrown when the iteration budget runs out; carries the iterate with the
/// smallest residual seen.
class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& message, std::vector<double> best, SolveReport report)
        : Error(ErrorCode::NotConverged, message), best_(std::move(best)), report_(report) {}

    const std::vector<double>& best_iterate() const { return best_; }
    const SolveReport& report() const { return report_; }

private:
    std::vector<double> best_;
    SolveReport report_;
};

namespace detail {

/// Zero-fill incomplete Cholesky A ~ L L^T, stored as the lower triangle in CSR.
/// A diagonal shift is added and the factorization retried if a pivot fails.
class IncompleteCholesky {
public:
    explicit IncompleteCholesky(const CsrMatrix& a) {
        const std::size_t n = a.rows();
        ptr_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t cnt = 0;
            for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
                if (a.col_idx()[k] <= static_cast<int>(i)) ++cnt;
            ptr_[i + 1] = ptr_[i] + cnt;
        }
        col_.resize(ptr_.back());
        std::vector<double> base(ptr_.back());
        for (std::size_t i = 0, m = 0; i < n; ++i)
            for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
                if (a.col_idx()[k] <= static_cast<int>(i)) {
                    col_[m] = a.col_idx()[k];
                    base[m++] = a.values()[k];
                }
        for (double shift = 0.0;; shift = shift == 0.0 ? 1e-3 : 2.0 * shift) {
            if (factor(base, shift)) return;
            require(shift < 1.0, ErrorCode::Breakdown, "incomplete Cholesky failed even with diagonal shift");
        }
    }

    /// z = (L L^T)^{-1} r.
    void apply(std::span<const double> r, std::span<double> z) const {
        const std::size_t n = ptr_.size() - 1;
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            const std::size_t last = ptr_[i + 1] - 1;
            for (std::size_t k = ptr_[i]; k < last; ++k) s -= val_[k] * z[static_cast<std::size_t>(col_[k])];
            z[i] = s / val_[last];
        }
        for (std::size_t i = n; i-- > 0;) {
            const std::size_t last = ptr_[i + 1] - 1;
            z[i] /= val_[last];
            const double zi = z[i];
            for (std::size_t k = ptr_[i]; k < last; ++k) z[static_cast<std::size_t>(col_[k])] -= val_[k] * zi;
        }
    }

private:
    bool factor(const std::vector<double>& base, double shift) {
        val_ = base;
        const std::size_t n = ptr_.size() - 1;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t last = ptr_[i + 1] - 1;
            if (static_cast<std::size_t>(col_[last]) != i) return false;
            val_[last] *= 1.0 + shift;
        }
        std::vector<int> pos(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t first = ptr_[i], last = ptr_[i + 1] - 1;
            for (std::size_t k = first; k <= last; ++k) pos[static_cast<std::size_t>(col_[k])] = static_cast<int>(k);
            for (std::size_t k = first; k < last; ++k) {
                const std::size_t j = static_cast<std::size_t>(col_[k]);
                const std::size_t jlast = ptr_[j + 1] - 1;
                double s = val_[k];
                // L(i,j) = (a_ij - sum_{m<j} L(i,m) L(j,m)) / L(j,j)
                for (std::size_t m = ptr_[j]; m < jlast; ++m) {
                    const int p = pos[static_cast<std::size_t>(col_[m])];
                    if (p >= 0 && static_cast<std::size_t>(p) < k) s -= val_[static_cast<std::size_t>(p)] * val_[m];
                }
                val_[k] = s / val_[jlast];
            }
            double d = val_[last];
            for (std::size_t k = first; k < last; ++k) d -= val_[k] * val_[k];
            for (std::size_t k = first; k <= last; ++k) pos[static_cast<std::size_t>(col_[k])] = -1;
            if (!(d > 0.0)) return false;
            val_[last] = std::sqrt(d);
        }
        return true;
    }

    std::vector<std::size_t> ptr_;
    std::vector<int> col_;
    std::vector<double> val_;
};

}  // namespace detail

/// Preconditioned CG. Throws NotConvergedError (with the best iterate) when
/// max_iter is exhausted and Breakdown when a non-positive curvature
/// direction shows the matrix is not SPD.
inline SolveResult solve_spd(const CsrMatrix& a, std::span<const double> b, const SolverOptions& opt = {},
                             std::span<const double> x0 = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = a.rows();
    require(a.cols() == n && b.size() == n, ErrorCode::InvalidArgument, "system dimensions do not match");
    require(opt.tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
    const std::size_t max_iter =
        opt.max_iter ? opt.max_iter : std::max<std::size_t>(10, static_cast<std::size_t>(50.0 * std::sqrt(double(n))));
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    SolveResult out;
    out.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.x.begin());
    const double bnorm = norm2(b);
    if (n == 0 || bnorm == 0.0) {
        std::fill(out.x.begin(), out.x.end(), 0.0);
        out.report.seconds = elapsed();
        return out;
    }

    std::optional<detail::IncompleteCholesky> ic;
    std::vector<double> inv_diag;
    if (opt.preconditioner == Preconditioner::IncompleteCholesky) {
        ic.emplace(a);
    } else {
        inv_diag = a.diagonal();
        for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;
    }
    auto precondition = [&](std::span<const double> r, std::span<double> z) {
        if (ic) ic->apply(r, z);
        else
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    };

    std::vector<double> r(n), z(n), p(n), q(n);
    a.multiply(out.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    double res = norm2(r) / bnorm;
    std::vector<double> best = out.x;
    double best_res = res;
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    std::size_t it = 0;
    while (res > opt.tol && it < max_iter) {
        a.multiply(p, q);
        const double pq = dot(p, q);
        require(pq > 0.0, ErrorCode::Breakdown, "CG breakdown: non-positive curvature, matrix not SPD");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++it;
        res = norm2(r) / bnorm;
        if (res < best_res) {
            best_res = res;
            best = out.x;
        }
        if (res <= opt.tol) break;
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // recompute the true residual; recursive residuals drift on long runs
    a.multiply(out.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    out.report.iterations = it;
    out.report.relative_residual = norm2(r) / bnorm;
    out.report.seconds = elapsed();
    if (out.report.relative_residual > opt.tol && res <= opt.tol) {
        // restart once from the current iterate to remove the drift
        SolverOptions again = opt;
        again.max_iter = max_iter > it ? max_iter - it : 1;
        SolveResult polished = solve_spd(a, b, again, out.x);
        polished.report.iterations += it;
        polished.report.seconds = elapsed();
        return polished;
    }
    if (out.report.relative_residual > opt.tol) {
        if (best_res < out.report.relative_residual && best.size() == n) {
            a.multiply(best, q);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
            if (norm2(r) / bnorm >= out.report.relative_residual) best = out.x;
        } else {
            best = out.x;
        }
        throw NotConvergedError("CG stopped after " + std::to_string(it) + " iterations, residual " +
                                    std::to_string(out.report.relative_residual),
                                std::move(best), out.report);
    }
    return out;
}

}  // namespace nhyb
