#pragma once

/// Effective matrices from periodic cell problems on the unit cell Y:
///   A_ij(x) = int_Y a(x, y) (e_j + grad chi_j) . e_i dy,
///   int_Y a(x, y) (e_j + grad chi_j) . grad phi = 0 for all periodic phi.

#include <algorithm>
#include <array>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "sparse.hpp"

namespace nhyb {

/// a(x, y): slow variable x, fast variable y, 1-periodic in y.
using FastField = std::function<Mat2(Vec2, Vec2)>;

struct CellOptions {
    int resolution = 64;  ///< cells per side of the unit cell mesh
    int quad_degree = 4;
    double tol = 1e-12;
};

struct CellResult {
    Mat2 effective;
    std::array<double, 2> eigenvalues{};
    /// Harmonic and arithmetic means of xi.a xi over Y for the extreme unit
    /// directions, i.e. the Reuss and Voigt bounds for scalar fields.
    double reuss = 0.0;
    double voigt = 0.0;
    std::size_t iterations = 0;
};

/// Structured periodic P1 mesh of the unit cell: n x n vertices (wrapped),
/// two triangles per square split along the (0,0)-(1,1) diagonal.
class PeriodicCell {
public:
    explicit PeriodicCell(int n) : n_(n) {
        require(n >= 2, ErrorCode::InvalidArgument, "cell resolution must be at least 2");
        const double h = 1.0 / n;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const Vec2 o{i * h, j * h};
                const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
                elements_.push_back({{v00, v10, v11}, {o, o + Vec2{h, 0}, o + Vec2{h, h}}});
                elements_.push_back({{v00, v11, v01}, {o, o + Vec2{h, h}, o + Vec2{0, h}}});
            }
        }
        BlockList blocks;
        for (const Element& e : elements_) blocks.add(e.dofs);
        pattern_ = pattern_from_blocks(num_dofs(), blocks);
    }

    int resolution() const { return n_; }
    std::size_t num_dofs() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

    /// Solves both corrector problems for y -> a(y) and integrates A.
    CellResult solve(const std::function<Mat2(Vec2)>& a, const CellOptions& opt = {}) const {
        const QuadratureRule rule = triangle_rule(opt.quad_degree);
        const std::size_t nd = num_dofs();
        CsrMatrix k = pattern_;
        std::vector<double> rhs[2] = {std::vector<double>(nd, 0.0), std::vector<double>(nd, 0.0)};
        // per element: area-weighted quadrature values of a, reused for the flux integral
        std::vector<Mat2> mean_a(elements_.size());
        Mat2 voigt_sum{0, 0, 0, 0};
        double inv_sum[2] = {0.0, 0.0};
        const double area = 0.5 / (static_cast<double>(n_) * n_);
        for (std::size_t t = 0; t < elements_.size(); ++t) {
            const Element& e = elements_[t];
            const auto gl = gradients(e.corners);
            Mat2 acc{0, 0, 0, 0};
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Bary& l = rule.points[q];
                const Vec2 y = e.corners[0] * l[0] + e.corners[1] * l[1] + e.corners[2] * l[2];
                const Mat2 m = a(y);
                const double w = rule.weights[q] * 2.0 * area;
                acc = acc + m * w;
                for (int d = 0; d < 2; ++d) inv_sum[d] += w / (d == 0 ? m.xx : m.yy);
            }
            mean_a[t] = acc;
            voigt_sum = voigt_sum + acc;
            // P1 gradients are constant, so only the element integral of a enters
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) k.add(e.dofs[static_cast<std::size_t>(i)], e.dofs[static_cast<std::size_t>(j)],
                                                  dot(acc * gl[static_cast<std::size_t>(j)], gl[static_cast<std::size_t>(i)]));
                const Vec2 f = acc.transposed() * gl[static_cast<std::size_t>(i)];
                rhs[0][static_cast<std::size_t>(e.dofs[static_cast<std::size_t>(i)])] -= f.x;
                rhs[1][static_cast<std::size_t>(e.dofs[static_cast<std::size_t>(i)])] -= f.y;
            }
        }
        // pin dof 0 to remove the constant kernel
        CellResult out;
        std::vector<double> chi[2];
        for (int d = 0; d < 2; ++d) {
            const ReducedCell red = reduce(k, rhs[d]);
            SolverOptions so;
            so.tol = opt.tol;
            so.preconditioner = Preconditioner::IncompleteCholesky;
            try {
                const SolveResult r = solve_spd(red.matrix, red.rhs, so);
                out.iterations += r.report.iterations;
                chi[d].assign(nd, 0.0);
                for (std::size_t i = 1; i < nd; ++i) chi[d][i] = r.x[i - 1];
            } catch (const Error& err) {
                fail(ErrorCode::CellSolveFailed, std::string("cell corrector solve failed: ") + err.what());
            }
            double mean = 0.0;
            for (double v : chi[d]) mean += v;
            mean /= static_cast<double>(nd);
            for (double& v : chi[d]) v -= mean;
        }
        Mat2 eff = voigt_sum;
        for (std::size_t t = 0; t < elements_.size(); ++t) {
            const Element& e = elements_[t];
            const auto gl = gradients(e.corners);
            for (int d = 0; d < 2; ++d) {
                Vec2 g{0, 0};
                for (int i = 0; i < 3; ++i)
                    g += gl[static_cast<std::size_t>(i)] * chi[d][static_cast<std::size_t>(e.dofs[static_cast<std::size_t>(i)])];
                const Vec2 ag = mean_a[t] * g;  // column d of A gains int a grad chi_d
                if (d == 0) {
                    eff.xx += ag.x;
                    eff.yx += ag.y;
                } else {
                    eff.xy += ag.x;
                    eff.yy += ag.y;
                }
            }
        }
        out.effective = eff;
        out.eigenvalues = eff.sym_eigenvalues();
        out.voigt = std::max(voigt_sum.xx, voigt_sum.yy);
        out.reuss = std::min(1.0 / inv_sum[0], 1.0 / inv_sum[1]);
        return out;
    }

private:
    struct Element {
        std::array<int, 3> dofs;
        std::array<Vec2, 3> corners;  ///< unwrapped coordinates
    };
    struct ReducedCell {
        CsrMatrix matrix;
        std::vector<double> rhs;
    };

    int id(int i, int j) const { return (j % n_) * n_ + (i % n_); }

    static std::array<Vec2, 3> gradients(const std::array<Vec2, 3>& p) {
        const double det = orient2d(p[0], p[1], p[2]);
        std::array<Vec2, 3> g;
        for (int i = 0; i < 3; ++i) {
            const Vec2 a = p[static_cast<std::size_t>((i + 1) % 3)], b = p[static_cast<std::size_t>((i + 2) % 3)];
            g[static_cast<std::size_t>(i)] = {(a.y - b.y) / det, (b.x - a.x) / det};
        }
        return g;
    }

    /// Drops row and column 0.
    static ReducedCell reduce(const CsrMatrix& k, const std::vector<double>& rhs) {
        std::vector<std::tuple<int, int, double>> t;
        t.reserve(k.values().size());
        for (std::size_t r = 1; r < k.rows(); ++r)
            for (std::size_t p = k.row_ptr()[r]; p < k.row_ptr()[r + 1]; ++p) {
                const int c = k.col_idx()[p];
                if (c != 0) t.emplace_back(static_cast<int>(r) - 1, c - 1, k.values()[p]);
            }
        return {CsrMatrix::from_triplets(k.rows() - 1, k.cols() - 1, std::move(t)),
                std::vector<double>(rhs.begin() + 1, rhs.end())};
    }

    int n_;
    std::vector<Element> elements_;
    CsrMatrix pattern_;
};

inline CellResult cell_problem(const FastField& a, Vec2 x, const CellOptions& opt = {}) {
    return PeriodicCell(opt.resolution).solve([&](Vec2 y) { return a(x, y); }, opt);
}

inline Mat2 effective_matrix_at(const FastField& a, Vec2 x, const CellOptions& opt = {}) {
    return cell_problem(a, x, opt).effective;
}

/// Samples of A_h on a tensor grid over [lo, hi], bilinear in between.
struct TabulatedField {
    int nx = 1, ny = 1;
    Vec2 lo{0, 0}, hi{1, 1};
    std::vector<Mat2> values;  ///< row-major, x fastest
    double lambda = 1.0, Lambda = 1.0;

    Vec2 node(int i, int j) const {
        return {nx == 1 ? lo.x : lo.x + (hi.x - lo.x) * i / (nx - 1), ny == 1 ? lo.y : lo.y + (hi.y - lo.y) * j / (ny - 1)};
    }
    const Mat2& at(int i, int j) const { return values[static_cast<std::size_t>(j * nx + i)]; }

    /// Clamped bilinear interpolation; constant extension outside the grid.
    Mat2 operator()(Vec2 x) const {
        auto locate = [](double v, double a, double b, int n, int& k, double& s) {
            if (n == 1) {
                k = 0;
                s = 0.0;
                return;
            }
            const double t = std::clamp((v - a) / (b - a), 0.0, 1.0) * (n - 1);
            k = std::min(static_cast<int>(t), n - 2);
            s = t - k;
        };
        int i, j;
        double s, t;
        locate(x.x, lo.x, hi.x, nx, i, s);
        locate(x.y, lo.y, hi.y, ny, j, t);
        const int i1 = std::min(i + 1, nx - 1), j1 = std::min(j + 1, ny - 1);
        return at(i, j) * ((1 - s) * (1 - t)) + at(i1, j) * (s * (1 - t)) + at(i, j1) * ((1 - s) * t) + at(i1, j1) * (s * t);
    }

    MatrixField as_field(std::string name = "tabulated") const {
        return {[self = *this](Vec2 x) { return self(x); }, lambda, Lambda, std::move(name)};
    }
};

/// Per-sample report from tabulation.
struct TabulationReport {
    std::vector<CellResult> cells;
};

/// Solves the cell problems at the nx x ny grid nodes of [lo, hi]. The
/// declared bounds are the extreme Reuss and Voigt means over all samples.
inline TabulatedField tabulate_effective(const FastField& a, int nx, int ny, Vec2 lo, Vec2 hi, const CellOptions& opt = {},
                                         TabulationReport* report = nullptr) {
    require(nx >= 1 && ny >= 1, ErrorCode::InvalidArgument, "tabulation grid needs at least one node");
    TabulatedField f;
    f.nx = nx;
    f.ny = ny;
    f.lo = lo;
    f.hi = hi;
    const PeriodicCell cell(opt.resolution);
    f.lambda = std::numeric_limits<double>::infinity();
    f.Lambda = 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 x = f.node(i, j);
            const CellResult r = cell.solve([&](Vec2 y) { return a(x, y); }, opt);
            Mat2 m = r.effective;
            const double off = 0.5 * (m.xy + m.yx);
            m.xy = m.yx = off;
            f.values.push_back(m);
            f.lambda = std::min({f.lambda, r.reuss, r.eigenvalues[0]});
            f.Lambda = std::max({f.Lambda, r.voigt, r.eigenvalues[1]});
            if (report) report->cells.push_back(r);
        }
    }
    return f;
}

/// CSV: x, y, A11, A12, A22 with one row per grid node (x fastest).
inline void write_tabulated_csv(std::ostream& os, const TabulatedField& f) {
    os << std::setprecision(17) << "x,y,A11,A12,A22\n";
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            const Vec2 x = f.node(i, j);
            const Mat2& m = f.at(i, j);
            os << x.x << ',' << x.y << ',' << m.xx << ',' << m.xy << ',' << m.yy << '\n';
        }
}

inline TabulatedField read_tabulated_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorCode::InvalidArgument, "empty effective-matrix file");
    std::vector<std::array<double, 5>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 5> r{};
        std::istringstream ls(line);
        for (double& v : r) {
            ls >> v;
            ls.ignore(1);
        }
        require(!ls.fail() || ls.eof(), ErrorCode::InvalidArgument, "malformed effective-matrix row: " + line);
        rows.push_back(r);
    }
    require(!rows.empty(), ErrorCode::InvalidArgument, "effective-matrix file has no rows");
    std::map<double, int> xs, ys;
    for (const auto& r : rows) {
        xs.emplace(r[0], 0);
        ys.emplace(r[1], 0);
    }
    TabulatedField f;
    f.nx = static_cast<int>(xs.size());
    f.ny = static_cast<int>(ys.size());
    require(rows.size() == xs.size() * ys.size(), ErrorCode::InvalidArgument, "effective-matrix rows do not form a grid");
    f.lo = {xs.begin()->first, ys.begin()->first};
    f.hi = {xs.rbegin()->first, ys.rbegin()->first};
    int k = 0;
    for (auto& [v, idx] : xs) idx = k++;
    k = 0;
    for (auto& [v, idx] : ys) idx = k++;
    f.values.assign(rows.size(), Mat2{});
    f.lambda = std::numeric_limits<double>::infinity();
    f.Lambda = 0.0;
    for (const auto& r : rows) {
        const Mat2 m = Mat2::symmetric(r[2], r[3], r[4]);
        f.values[static_cast<std::size_t>(ys[r[1]] * f.nx + xs[r[0]])] = m;
        const auto e = m.sym_eigenvalues();
        f.lambda = std::min(f.lambda, e[0]);
        f.Lambda = std::max(f.Lambda, e[1]);
    }
    return f;
}

}  // namespace nhyb
