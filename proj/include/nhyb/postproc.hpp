#pragma once

/// Reference solutions on uniform meshes, relative H1-seminorm errors on the
/// regions of a partition, convergence rates and the results table.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fem.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

namespace nhyb {

// ---------------------------------------------------------------------------
// Reference solutions

struct ReferenceOptions {
    /// Directory for cached solutions; empty disables caching.
    std::string cache_dir;
    /// Identifies the problem (example, coefficient, eps) in the cache key.
    std::string label = "reference";
    /// Smallest coefficient period; a mesh coarser than eps / 4 is flagged.
    double eps = 0.0;
    /// Lagrange degree of the reference space (1 or 2).
    int degree = 1;
    int quad_degree = 4;
    int quad_subdivisions = 0;
    SolverOptions solver{1e-10, 0, Preconditioner::IncompleteCholesky};
};

struct ReferenceSolution {
    std::shared_ptr<const FeSpace> space;
    std::vector<double> values;
    std::vector<std::string> warnings;
    bool from_cache = false;
    SolveReport report;
};

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline std::string reference_descriptor(const ReferenceOptions& opt, int n) {
    std::ostringstream d;
    d << std::setprecision(17) << opt.label << "|n=" << n << "|P" << opt.degree << "|q=" << opt.quad_degree << '/' << opt.quad_subdivisions
      << "|tol=" << opt.solver.tol;
    return d.str();
}

inline std::filesystem::path reference_path(const ReferenceOptions& opt, int n) {
    std::string safe;
    for (char c : opt.label) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    const std::string deg = opt.degree == 1 ? "" : "_p" + std::to_string(opt.degree);
    return std::filesystem::path(opt.cache_dir) / ("reference_" + safe + "_n" + std::to_string(n) + deg + ".csv");
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

/// Reads cached values when the header hash and size match.
inline bool load_reference(const std::filesystem::path& path, std::uint64_t hash, std::size_t size, std::vector<double>& out) {
    std::ifstream is(path);
    if (!is) return false;
    std::string line;
    if (!std::getline(is, line)) return false;
    if (line != "# hash " + hash_hex(hash) + " dofs " + std::to_string(size)) return false;
    out.clear();
    out.reserve(size);
    double v;
    while (is >> v) out.push_back(v);
    return out.size() == size;
}

inline void store_reference(const std::filesystem::path& path, std::uint64_t hash, std::span<const double> values) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp);
        require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + tmp.string());
        os << "# hash " << hash_hex(hash) << " dofs " << values.size() << '\n';
        char buf[32];
        for (double v : values) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            os << buf;
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Conforming P1 or P2 solution of -div(a grad u) = f, u = 0 on the
/// boundary of D, on the uniform n x n mesh. Cached on disk when `cache_dir` is set.
template <MatrixCallable Coef, ScalarCallable Load>
ReferenceSolution reference_solve(const Coef& a, const Load& f, int n, const ReferenceOptions& opt = {}) {
    ReferenceSolution out;
    out.space = std::make_shared<const FeSpace>(std::make_shared<const Triangulation>(uniform_unit_square(n)), opt.degree);
    const double h = 1.0 / n;
    if (opt.eps > 0.0 && h > opt.eps / 4.0) {
        std::ostringstream msg;
        msg << "UnderResolved: reference mesh size " << h << " exceeds eps / 4 = " << opt.eps / 4.0;
        out.warnings.push_back(msg.str());
    }
    const std::uint64_t hash = fnv1a(detail::reference_descriptor(opt, n));
    const bool cached = !opt.cache_dir.empty();
    if (cached && detail::load_reference(detail::reference_path(opt, n), hash, out.space->num_dofs(), out.values)) {
        out.from_cache = true;
        return out;
    }
    CsrMatrix k = assemble_volume(*out.space, a, volume_rule(opt.quad_degree, opt.quad_subdivisions));
    std::vector<double> b(out.space->num_dofs(), 0.0);
    assemble_load_into(b, *out.space, f, volume_rule(opt.quad_degree));
    const ReducedSystem red = apply_dirichlet(k, b, out.space->boundary_dofs());
    k = CsrMatrix{};
    const SolveResult r = solve_spd(red.matrix, red.rhs, opt.solver);
    out.report = r.report;
    out.values = red.expand(r.x);
    if (cached) detail::store_reference(detail::reference_path(opt, n), hash, out.values);
    return out;
}

// ---------------------------------------------------------------------------
// Error norms

enum class ErrorRegion {
    Defect,    ///< K0
    Buffer,    ///< K1 (including K0)
    Ring,      ///< K1 \ K0
    Exterior,  ///< K2
};

inline bool region_contains(ErrorRegion r, Region where) {
    switch (r) {
        case ErrorRegion::Defect: return where == Region::Defect;
        case ErrorRegion::Buffer: return where != Region::Exterior;
        case ErrorRegion::Ring: return where == Region::Buffer;
        case ErrorRegion::Exterior: return where == Region::Exterior;
    }
    return false;
}

/// Hybrid function (v_1 on the K1 mesh, v_2 on the K2 mesh) evaluated by
/// point location with a per-side triangle hint.
class HybridView {
public:
    HybridView(const FeSpace& fine, std::span<const double> uf, const FeSpace& coarse, std::span<const double> uc)
        : fine_(&fine), coarse_(&coarse), uf_(uf), uc_(uc) {
        require(uf.size() == fine.num_dofs() && uc.size() == coarse.num_dofs(), ErrorCode::InvalidArgument,
                "hybrid coefficient vectors have wrong sizes");
    }

    /// Gradient of v_1 (in_buffer) or v_2 at x.
    Vec2 gradient(Vec2 x, bool in_buffer, int& hint_fine, int& hint_coarse) const {
        const FeSpace& s = in_buffer ? *fine_ : *coarse_;
        int& hint = in_buffer ? hint_fine : hint_coarse;
        int t = -1;
        if (hint >= 0) {
            const Bary l = to_barycentric(s.mesh().corners(static_cast<std::size_t>(hint)), x);
            if (std::min({l[0], l[1], l[2]}) >= -1e-12) t = hint;
        }
        if (t < 0) t = s.locator().locate(x, 1e-8);
        if (t < 0) {
            std::ostringstream msg;
            msg << "point (" << x.x << ", " << x.y << ") is outside the " << (in_buffer ? "K1" : "K2") << " mesh";
            fail(ErrorCode::PointOutsideMesh, msg.str());
        }
        hint = t;
        return evaluate_in_element(s, in_buffer ? uf_ : uc_, static_cast<std::size_t>(t), x).gradient;
    }

private:
    const FeSpace* fine_;
    const FeSpace* coarse_;
    std::span<const double> uf_, uc_;
};

struct SeminormParts {
    double difference = 0.0;  ///< |ref - num|_{1,region}^2
    double reference = 0.0;   ///< |ref|_{1,region}^2
    double measure = 0.0;     ///< quadrature measure of the region

    double relative() const { return std::sqrt(difference / reference); }
};

/// Squared seminorms over `region`, integrated on the reference mesh with a
/// rule of degree `quad_degree`; every quadrature point is classified by the
/// partition. `num` may be null, in which case only the reference part is
/// computed.
inline SeminormParts h1_seminorm_parts(const RegionPartition& part, ErrorRegion region, const FeSpace& ref,
                                       std::span<const double> ref_values, const HybridView* num, int quad_degree = 4) {
    require(ref_values.size() == ref.num_dofs(), ErrorCode::InvalidArgument, "reference vector has wrong size");
    const QuadratureRule rule = triangle_rule(quad_degree);
    BoundingBox k1_box;
    for (const Polygon& p : part.buffer())
        for (const Vec2& v : p) k1_box.expand(v);
    const bool inside_only = region != ErrorRegion::Exterior;
    SeminormParts out;
    int hint_f = -1, hint_c = -1;
    for (std::size_t t = 0; t < ref.num_elements(); ++t) {
        const auto c = ref.mesh().corners(t);
        if (inside_only) {
            BoundingBox tb;
            for (const Vec2& p : c) tb.expand(p);
            if (tb.hi.x < k1_box.lo.x - 1e-12 || tb.lo.x > k1_box.hi.x + 1e-12 || tb.hi.y < k1_box.lo.y - 1e-12 ||
                tb.lo.y > k1_box.hi.y + 1e-12)
                continue;
        }
        const double jac = 2.0 * ref.mesh().area(t);
        Vec2 gref;
        bool have_ref = false;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec2 x = from_barycentric(c, rule.points[q]);
            const Region where = part.classify(x);
            if (!region_contains(region, where)) continue;
            if (!have_ref || ref.degree() != 1) {
                gref = evaluate_in_element(ref, ref_values, t, x).gradient;
                have_ref = true;
            }
            const double w = rule.weights[q] * jac;
            out.measure += w;
            out.reference += w * dot(gref, gref);
            if (num) {
                const Vec2 d = gref - num->gradient(x, where != Region::Exterior, hint_f, hint_c);
                out.difference += w * dot(d, d);
            }
        }
    }
    if (out.measure <= 0.0) fail(ErrorCode::EmptyRegion, "error region contains no quadrature points");
    return out;
}

/// |ref - num|_{1,region} / |ref|_{1,region}.
inline double h1_seminorm_error(const RegionPartition& part, ErrorRegion region, const FeSpace& ref,
                                std::span<const double> ref_values, const HybridView& num, int quad_degree = 4) {
    const SeminormParts p = h1_seminorm_parts(part, region, ref, ref_values, &num, quad_degree);
    require(p.reference > 0.0, ErrorCode::EmptyRegion, "reference seminorm vanishes on the error region");
    return p.relative();
}

/// rate_k = log2(e_{k-1} / e_k).
inline std::vector<double> convergence_rates(std::span<const double> errors) {
    std::vector<double> r;
    for (std::size_t k = 1; k < errors.size(); ++k) r.push_back(std::log2(errors[k - 1] / errors[k]));
    return r;
}

// ---------------------------------------------------------------------------
// Reports

struct ErrorReport {
    int example = 1;
    std::string defect;
    double h = 0.0, H = 0.0;
    double gamma = 0.0, gamma0 = 0.0;
    double eps = 0.0, L = 0.0, delta = 0.0;
    double e_ueps = 0.0;  ///< relative H1-seminorm error on K0 against the microscopic reference
    double e_u0 = 0.0;    ///< relative H1-seminorm error on K2 against the homogenized reference
    double broken_norm = 0.0;
    std::size_t dofs = 0;
    double seconds = 0.0;
};

inline constexpr const char* kReportHeader = "example,defect,h,H,gamma,e_ueps,e_u0,dofs,seconds";

/// One CSV row in the fixed column order; `with_time = false` writes 0 for
/// seconds so repeated runs are byte-identical.
inline void write_report_row(std::ostream& os, const ErrorReport& r, bool with_time = true) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.10e,%.10e,%zu,%.3f\n", r.example, r.defect.c_str(), r.h, r.H,
                  r.gamma, r.e_ueps, r.e_u0, r.dofs, with_time ? r.seconds : 0.0);
    os << buf;
}

inline void write_report_csv(std::ostream& os, std::span<const ErrorReport> rows, bool with_time = true) {
    os << kReportHeader << '\n';
    for (const ErrorReport& r : rows) write_report_row(os, r, with_time);
}

/// Parses a results file written by write_report_csv.
inline std::vector<ErrorReport> read_report_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == kReportHeader, ErrorCode::Io,
            "results file does not start with the expected header");
    std::vector<ErrorReport> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        require(f.size() == 9, ErrorCode::Io, "malformed results row: " + line);
        ErrorReport r;
        r.example = std::stoi(f[0]);
        r.defect = f[1];
        r.h = std::stod(f[2]);
        r.H = std::stod(f[3]);
        r.gamma = std::stod(f[4]);
        r.e_ueps = std::stod(f[5]);
        r.e_u0 = std::stod(f[6]);
        r.dofs = static_cast<std::size_t>(std::stoull(f[7]));
        r.seconds = std::stod(f[8]);
        rows.push_back(r);
    }
    return rows;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace nhyb
