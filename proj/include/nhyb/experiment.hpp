#pragma once

/// Experiment driver: flat key=value configuration, scenario construction
/// (example x defect), reference management, (h, H) sweeps, penalty sweeps,
/// transition comparison and CSV/VTK output.

#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "interface.hpp"
#include "nitsche.hpp"
#include "postproc.hpp"
#include "upscaling.hpp"

namespace nhyb {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    int example = 1;
    std::string defect = "well";  ///< well | channel | ellipse
    std::optional<double> L;      ///< well half-width or channel width
    std::optional<double> delta;
    std::optional<double> eps;
    double R1 = 2.5, R2 = 1.5;
    std::vector<int> h_exponents{7, 8, 9};
    std::vector<int> H_exponents{5};
    std::string pairing = "product";  ///< product | zip
    std::optional<double> gamma;      ///< unset: 50 (example 1) or 20 (example 2)
    bool gamma_auto = false;          ///< gamma = gamma0
    int degree = 1;
    double solver_tol = 1e-10;
    std::string preconditioner = "jacobi";  ///< jacobi | ic
    std::optional<int> reference_n;
    int reference_degree = 1;  ///< degree of the micro reference; the homogenized one is P1
    std::string rho = "c0";  ///< c0 | c1
    std::string macro = "exact";  ///< exact | upscaled (example 1); example 2 is always upscaled
    int cell_resolution = 32;
    int macro_grid = 17;
    int quad_degree = 4;
    std::string output = "results";
    std::string cache_dir;  ///< reference cache; empty: <output>/cache
    bool timing = true;
    bool vtk = false;
    bool paper_scale = false;

    double resolved_eps() const {
        if (eps) return *eps;
        if (example == 2) return 0.0063;
        return paper_scale ? 0.01 : 0.02;
    }
    double resolved_gamma() const { return gamma ? *gamma : (example == 2 ? 20.0 : 50.0); }
    int resolved_reference_n() const { return reference_n ? *reference_n : (paper_scale ? 3000 : 1024); }
    double resolved_L() const { return L ? *L : 0.05; }
    double resolved_delta() const {
        if (delta) return *delta;
        if (defect == "channel") return 0.025;
        if (defect == "ellipse") return 0.02;
        return 0.05;
    }
    std::string resolved_cache_dir() const {
        return cache_dir.empty() ? (std::filesystem::path(output) / "cache").string() : cache_dir;
    }

    /// (h, H) pairs in run order.
    std::vector<std::pair<int, int>> pairs() const {
        std::vector<std::pair<int, int>> out;
        if (pairing == "zip") {
            require(h_exponents.size() == H_exponents.size(), ErrorCode::Config,
                    "pairing = zip needs equally long h and H exponent lists");
            for (std::size_t k = 0; k < h_exponents.size(); ++k) out.emplace_back(h_exponents[k], H_exponents[k]);
        } else {
            for (int H : H_exponents)
                for (int h : h_exponents) out.emplace_back(h, H);
        }
        return out;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Config, "invalid number for " + key + ": '" + v + "'");
}

inline int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    require(d == std::floor(d), ErrorCode::Config, "expected an integer for " + key + ": '" + v + "'");
    return static_cast<int>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(ErrorCode::Config, "invalid boolean for " + key + ": '" + v + "'");
}

inline std::vector<int> parse_exponents(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int e = parse_int(key, trim(item));
        require(e > 0, ErrorCode::Config, key + " exponents must be positive");
        out.push_back(e);
    }
    require(!out.empty(), ErrorCode::Config, key + " needs at least one exponent");
    return out;
}

inline void require_choice(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return;
    fail(ErrorCode::Config, "invalid value for " + key + ": '" + v + "'");
}

}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    const std::string v = trim(value);
    if (key == "example") {
        c.example = parse_int(key, v);
        require(c.example == 1 || c.example == 2, ErrorCode::Config, "example must be 1 or 2");
    } else if (key == "defect") {
        require_choice(key, v, {"well", "channel", "ellipse"});
        c.defect = v;
    } else if (key == "L") {
        c.L = parse_double(key, v);
    } else if (key == "delta") {
        c.delta = parse_double(key, v);
    } else if (key == "eps") {
        c.eps = parse_double(key, v);
    } else if (key == "R1") {
        c.R1 = parse_double(key, v);
    } else if (key == "R2") {
        c.R2 = parse_double(key, v);
    } else if (key == "h") {
        c.h_exponents = parse_exponents(key, v);
    } else if (key == "H") {
        c.H_exponents = parse_exponents(key, v);
    } else if (key == "pairing") {
        require_choice(key, v, {"product", "zip"});
        c.pairing = v;
    } else if (key == "gamma") {
        if (v == "auto") {
            c.gamma_auto = true;
            c.gamma.reset();
        } else {
            c.gamma_auto = false;
            c.gamma = parse_double(key, v);
            require(*c.gamma > 0.0, ErrorCode::Config, "gamma must be positive");
        }
    } else if (key == "degree") {
        c.degree = parse_int(key, v);
        require(c.degree == 1 || c.degree == 2, ErrorCode::Config, "degree must be 1 or 2");
    } else if (key == "solver_tol") {
        c.solver_tol = parse_double(key, v);
    } else if (key == "preconditioner") {
        require_choice(key, v, {"jacobi", "ic"});
        c.preconditioner = v;
    } else if (key == "reference_n") {
        c.reference_n = parse_int(key, v);
    } else if (key == "reference_degree") {
        c.reference_degree = parse_int(key, v);
        require(c.reference_degree == 1 || c.reference_degree == 2, ErrorCode::Config, "reference_degree must be 1 or 2");
    } else if (key == "rho") {
        require_choice(key, v, {"c0", "c1"});
        c.rho = v;
    } else if (key == "macro") {
        require_choice(key, v, {"exact", "upscaled"});
        c.macro = v;
    } else if (key == "cell_resolution") {
        c.cell_resolution = parse_int(key, v);
    } else if (key == "macro_grid") {
        c.macro_grid = parse_int(key, v);
    } else if (key == "quad_degree") {
        c.quad_degree = parse_int(key, v);
    } else if (key == "output") {
        c.output = v;
    } else if (key == "cache_dir") {
        c.cache_dir = v;
    } else if (key == "timing") {
        c.timing = parse_bool(key, v);
    } else if (key == "vtk") {
        c.vtk = parse_bool(key, v);
    } else if (key == "paper_scale") {
        c.paper_scale = parse_bool(key, v);
    } else {
        fail(ErrorCode::Config, "unknown configuration key '" + key + "'");
    }
}

/// Applies "key=value" strings in order.
inline void apply_overrides(ExperimentConfig& c, std::span<const std::string> overrides) {
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        require(eq != std::string::npos, ErrorCode::Config, "override must look like key=value: '" + o + "'");
        apply_setting(c, detail::trim(o.substr(0, eq)), o.substr(eq + 1));
    }
}

/// Flat key=value text; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& is, std::span<const std::string> overrides = {}) {
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    apply_overrides(c, overrides);
    return c;
}

inline ExperimentConfig load_config(const std::string& path, std::span<const std::string> overrides = {}) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot open config file " + path);
    return parse_config(is, overrides);
}

// ---------------------------------------------------------------------------
// Scenario

inline DefectShape defect_shape(const ExperimentConfig& c) {
    if (c.defect == "well") return WellDefect{{0.5, 0.5}, c.resolved_L()};
    if (c.defect == "channel") return ChannelDefect{{{0.25, 0.75}, {0.65, 0.75}, {0.65, 0.25}}, c.resolved_L()};
    return EllipseDefect{{EllipseSpec{{0.5, 0.35}, 0.25, 0.01, 0.0}, EllipseSpec{{0.5, 0.65}, 0.25, 0.01, 0.0}}, 128};
}

/// Coefficients and geometry shared by every (h, H) pair of a run.
struct Scenario {
    std::shared_ptr<const RegionPartition> part;
    MatrixField micro;        ///< a_eps on D
    MatrixField macro;        ///< A_h used in the hybrid coefficient
    MatrixField homogenized;  ///< coefficient of the homogenized reference problem
    double eps = 0.0;
    double e_hmm = 0.0;  ///< max |A - A_h|_F over sample points of K2, when A is known
    std::vector<std::string> notes;
};

inline Scenario build_scenario(const ExperimentConfig& c) {
    Scenario s;
    s.eps = c.resolved_eps();
    s.part = std::make_shared<const RegionPartition>(build_partition(defect_shape(c), c.resolved_delta()));
    const auto part = s.part;
    const auto in_defect = [part](Vec2 x) { return part->classify(x) == Region::Defect; };
    CellOptions cell;
    cell.resolution = c.cell_resolution;
    if (c.example == 1) {
        s.micro = example1_micro(c.R1, c.R2, s.eps);
        s.homogenized = example1_effective(c.R1, c.R2);
        if (c.macro == "upscaled") {
            const TabulatedField t =
                tabulate_effective(example1_two_scale(c.R1, c.R2), c.macro_grid, c.macro_grid, {0, 0}, {1, 1}, cell);
            s.macro = t.as_field("example1_upscaled");
            std::vector<Vec2> samples;
            for (int j = 0; j <= 64; ++j)
                for (int i = 0; i <= 64; ++i) {
                    const Vec2 x{i / 64.0, j / 64.0};
                    if (part->classify(x) == Region::Exterior) samples.push_back(x);
                }
            s.e_hmm = e_hmm(s.homogenized, s.macro, samples);
        } else {
            s.macro = s.homogenized;
        }
    } else {
        s.micro = example2_micro(s.eps, in_defect);
        const TabulatedField t = tabulate_effective(example2_two_scale(), c.macro_grid, c.macro_grid, {0, 0}, {1, 1}, cell);
        s.macro = example2_effective(t.as_field("example2_upscaled"), in_defect);
        s.homogenized = s.macro;
        s.notes.push_back("example 2: A_h from periodic cell problems; e(HMM) is not measurable without a closed form");
    }
    return s;
}

/// Element subdivision levels so that quadrature sub-elements are at most eps / 4.
inline int subdivisions_for(double h, double eps) {
    if (eps <= 0.0) return 0;
    return std::max(0, static_cast<int>(std::ceil(std::log2(4.0 * h / eps))));
}

struct References {
    ReferenceSolution micro;
    ReferenceSolution homogenized;
};

inline References compute_references(const ExperimentConfig& c, const Scenario& s, std::ostream* log = nullptr) {
    const int n = c.resolved_reference_n();
    const auto f = [](Vec2) { return 1.0; };
    ReferenceOptions opt;
    opt.cache_dir = c.resolved_cache_dir();
    opt.quad_degree = c.quad_degree;
    opt.quad_subdivisions = subdivisions_for(1.0 / n, s.eps);
    opt.solver.tol = c.solver_tol;
    opt.solver.preconditioner = Preconditioner::IncompleteCholesky;
    std::ostringstream label;
    label << std::setprecision(10) << "ex" << c.example << "_eps" << s.eps;
    if (c.example == 1) label << "_R" << c.R1 << '_' << c.R2;
    // the example 2 coefficient depends on the defect through its indicator
    if (c.example == 2) label << '_' << c.defect << "_L" << c.resolved_L() << "_g" << c.macro_grid << "_c" << c.cell_resolution;
    References r;
    opt.label = label.str() + "_micro";
    opt.eps = s.eps;
    opt.degree = c.reference_degree;
    r.micro = reference_solve(s.micro, f, n, opt);
    opt.degree = 1;
    opt.label = label.str() + "_homogenized";
    opt.eps = 0.0;
    opt.quad_subdivisions = 0;
    if (c.example == 1 && c.macro == "upscaled") opt.label += "_exact";
    r.homogenized = reference_solve(s.homogenized, f, n, opt);
    if (log) {
        for (const ReferenceSolution* ref : {&r.micro, &r.homogenized}) {
            *log << "reference n=" << n << (ref == &r.micro ? " micro" : " homogenized")
                 << (ref->from_cache ? " (cached)" : "") << " iterations=" << ref->report.iterations
                 << " residual=" << ref->report.relative_residual << '\n';
            for (const std::string& w : ref->warnings) *log << "warning: " << w << '\n';
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Single (h, H) run

/// dofs of every space minus its outer-boundary dofs.
inline std::size_t count_dofs(std::initializer_list<const FeSpace*> spaces) {
    std::size_t n = 0;
    for (const FeSpace* s : spaces) n += s->num_dofs() - s->boundary_dofs().size();
    return n;
}

struct HybridRun {
    ErrorReport report;
    std::shared_ptr<const FeSpace> fine, coarse;
    std::shared_ptr<const HybridCoefficient> coefficient;
    NitscheSolution solution;
    std::vector<InterfaceEdge> interface;
    std::vector<std::string> diagnostics;
    QuasiUniformity assumption_a;
    bool assumption_b = false;
    bool ok = true;  ///< false when the solve failed (e.g. penalty far too small)
};

struct RunOverrides {
    std::optional<double> gamma;
    std::optional<std::string> rho;
};

inline TransitionFunction make_transition(const ExperimentConfig& c, const RegionPartition& part, const std::string& kind) {
    if (kind == "c1") {
        require(c.defect == "well", ErrorCode::Config, "the C1 transition is only defined for the well defect");
        return build_c1_well_transition({0.5, 0.5}, c.resolved_L(), c.resolved_delta());
    }
    return build_c0_transition(part, build_ring(part, c.resolved_delta()));
}

/// Meshes, transition, interface, assembly, solve and both error measures
/// for one (h, H) pair. `refs` may be null to skip the error evaluation.
inline HybridRun run_pair(const ExperimentConfig& c, const Scenario& s, const References* refs, double h, double H,
                          const RunOverrides& over = {}) {
    Stopwatch clock;
    HybridRun run;
    const RegionPartition& part = *s.part;
    auto fm = std::make_shared<const Triangulation>(triangulate_region(buffer_region(part), h));
    auto cm = std::make_shared<const Triangulation>(triangulate_region(exterior_region(part), H));
    run.fine = std::make_shared<const FeSpace>(fm, c.degree);
    run.coarse = std::make_shared<const FeSpace>(cm, c.degree);
    run.assumption_a = check_assumption_A(*fm);
    const auto fine_edges = collect_gamma_edges(*fm);
    run.interface = intersect_interfaces(fine_edges, collect_gamma_edges(*cm), part.interface_loops());
    run.assumption_b = check_assumption_B(run.interface, fine_edges);
    if (!run.assumption_a.quasi_uniform) run.diagnostics.push_back("Assumption A (quasi-uniform fine Gamma layer) fails");
    if (!run.assumption_b) run.diagnostics.push_back("Assumption B (fine Gamma edges subdivide coarse ones) fails");

    const std::string rho_kind = over.rho.value_or(c.rho);
    run.coefficient = std::make_shared<const HybridCoefficient>(make_transition(c, part, rho_kind), s.micro, s.macro);
    for (int t : run.coefficient->transition().flat_triangles())
        run.diagnostics.push_back("transition ring triangle " + std::to_string(t) + " has all vertices on one boundary");

    NitscheOptions nopt;
    nopt.quad_degree = c.quad_degree;
    nopt.fine_subdivisions = subdivisions_for(fm->max_diameter() / std::sqrt(2.0), s.eps);
    const double sigma = std::max(fm->chunkiness(), cm->chunkiness());
    const double gamma0 = penalty_lower_bound(c.degree, sigma, run.coefficient->lambda(), run.coefficient->Lambda());
    nopt.gamma = over.gamma.value_or(c.gamma_auto ? gamma0 : c.resolved_gamma());
    const auto f = [](Vec2) { return 1.0; };
    const NitscheSystem sys = assemble_nitsche(*run.coefficient, *run.fine, *run.coarse, run.interface, f, nopt);
    for (const std::string& d : sys.diagnostics) run.diagnostics.push_back(d);

    SolverOptions so;
    so.tol = c.solver_tol;
    so.preconditioner = c.preconditioner == "ic" ? Preconditioner::IncompleteCholesky : Preconditioner::Jacobi;
    ErrorReport& r = run.report;
    r.example = c.example;
    r.defect = c.defect;
    r.h = h;
    r.H = H;
    r.gamma = nopt.gamma;
    r.gamma0 = sys.gamma0;
    r.eps = s.eps;
    r.L = c.resolved_L();
    r.delta = c.resolved_delta();
    r.dofs = count_dofs({run.fine.get(), run.coarse.get()});
    try {
        run.solution = solve_nitsche(sys, so);
    } catch (const Error& e) {
        run.ok = false;
        run.diagnostics.push_back(std::string("solve failed: ") + e.what());
        r.e_ueps = r.e_u0 = std::numeric_limits<double>::quiet_NaN();
        r.seconds = clock.seconds();
        return run;
    }
    r.broken_norm = broken_energy_norm(*run.fine, *run.coarse, run.interface, nopt.gamma, run.solution.combined);
    r.e_ueps = r.e_u0 = std::numeric_limits<double>::quiet_NaN();
    if (refs) {
        const HybridView view(*run.fine, run.solution.fine, *run.coarse, run.solution.coarse);
        r.e_ueps = h1_seminorm_error(part, ErrorRegion::Defect, *refs->micro.space, refs->micro.values, view);
        r.e_u0 = h1_seminorm_error(part, ErrorRegion::Exterior, *refs->homogenized.space, refs->homogenized.values, view);
    }
    r.seconds = clock.seconds();
    return run;
}

// ---------------------------------------------------------------------------
// Output

inline void write_run_vtk(const std::filesystem::path& dir, const std::string& tag, const HybridRun& run) {
    std::filesystem::create_directories(dir);
    for (int side = 0; side < 2; ++side) {
        const FeSpace& sp = side == 0 ? *run.fine : *run.coarse;
        const std::vector<double>& u = side == 0 ? run.solution.fine : run.solution.coarse;
        const Triangulation& m = sp.mesh();
        std::vector<double> v(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(m.num_vertices()));
        std::vector<double> rho(m.num_vertices()), b(m.num_vertices());
        for (std::size_t i = 0; i < m.num_vertices(); ++i) {
            const Vec2 x = m.vertex(static_cast<int>(i));
            rho[i] = run.coefficient->rho(x);
            b[i] = (*run.coefficient)(x).xx;
        }
        const std::vector<NamedField> pd{{"v_h", v}, {"rho", rho}, {"b11", b}};
        std::ofstream os(dir / (tag + (side == 0 ? "_fine.vtk" : "_coarse.vtk")));
        require(static_cast<bool>(os), ErrorCode::Io, "cannot write VTK output in " + dir.string());
        write_vtk(os, m, pd, {}, tag);
    }
}

inline std::string pair_tag(const ErrorReport& r) {
    std::ostringstream t;
    t << "ex" << r.example << '_' << r.defect << "_h" << std::lround(-std::log2(r.h)) << "_H" << std::lround(-std::log2(r.H));
    return t.str();
}

inline void log_run(std::ostream& log, const HybridRun& run) {
    const ErrorReport& r = run.report;
    log << std::setprecision(6) << pair_tag(r) << ": gamma=" << r.gamma << " gamma0=" << r.gamma0 << " dofs=" << r.dofs
        << " iterations=" << run.solution.report.iterations << " e_ueps=" << r.e_ueps << " e_u0=" << r.e_u0
        << " broken_norm=" << r.broken_norm << " nu=" << run.assumption_a.ratio
        << " assumption_B=" << (run.assumption_b ? "yes" : "no") << '\n';
    for (const std::string& d : run.diagnostics) log << "  " << d << '\n';
}

struct ExperimentResult {
    Scenario scenario;
    std::vector<ErrorReport> rows;
};

/// Runs every (h, H) pair and writes results.csv, run.log and optional VTK
/// files into the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& c, std::ostream* progress = nullptr) {
    std::filesystem::create_directories(c.output);
    std::ofstream log(std::filesystem::path(c.output) / "run.log");
    ExperimentResult out;
    out.scenario = build_scenario(c);
    for (const std::string& n : out.scenario.notes) log << "note: " << n << '\n';
    if (c.example == 1 && c.macro == "upscaled") log << "e(HMM) = " << out.scenario.e_hmm << '\n';
    const References refs = compute_references(c, out.scenario, &log);
    for (auto [he, He] : c.pairs()) {
        const HybridRun run = run_pair(c, out.scenario, &refs, std::ldexp(1.0, -he), std::ldexp(1.0, -He));
        log_run(log, run);
        if (progress) log_run(*progress, run);
        if (c.vtk && run.ok) write_run_vtk(std::filesystem::path(c.output) / "vtk", pair_tag(run.report), run);
        out.rows.push_back(run.report);
    }
    std::ofstream csv(std::filesystem::path(c.output) / "results.csv");
    require(static_cast<bool>(csv), ErrorCode::Io, "cannot write results in " + c.output);
    write_report_csv(csv, out.rows, c.timing);
    return out;
}

// ---------------------------------------------------------------------------
// Penalty sweep and transition comparison

struct GammaPoint {
    double gamma = 0.0;
    double e_ueps = 0.0;
    double e_u0 = 0.0;
    bool ok = true;
};

struct GammaSweep {
    double gamma0 = 0.0;
    std::vector<GammaPoint> points;  ///< geometric scan
    double threshold = 0.0;          ///< observed gamma*
    std::vector<GammaPoint> above;   ///< 2, 10, 100 times gamma*
    double spread_above = 0.0;       ///< (max - min) / min of e_ueps over `above`
};

/// Smallest scanned gamma from which every larger scanned value stays within
/// `flat_tol` (relative) of the error at the largest gamma.
inline double observed_threshold(std::span<const GammaPoint> scan, double flat_tol = 0.05) {
    require(!scan.empty() && scan.back().ok, ErrorCode::InvalidArgument, "penalty scan has no valid end point");
    const double ref = scan.back().e_ueps;
    double threshold = scan.back().gamma;
    for (std::size_t k = scan.size(); k-- > 0;) {
        if (!scan[k].ok || !std::isfinite(scan[k].e_ueps) || std::abs(scan[k].e_ueps - ref) > flat_tol * ref) break;
        threshold = scan[k].gamma;
    }
    return threshold;
}

/// Scans gamma = 2^k for k in [kmin, kmax] at one (h, H) pair, then
/// evaluates 2, 10 and 100 times the observed threshold.
inline GammaSweep sweep_gamma(const ExperimentConfig& c, const Scenario& s, const References& refs, double h, double H,
                              int kmin = -3, int kmax = 12, std::ostream* log = nullptr) {
    GammaSweep out;
    auto eval = [&](double g) {
        RunOverrides o;
        o.gamma = g;
        const HybridRun run = run_pair(c, s, &refs, h, H, o);
        if (log) log_run(*log, run);
        out.gamma0 = run.report.gamma0;
        return GammaPoint{g, run.report.e_ueps, run.report.e_u0, run.ok};
    };
    for (int k = kmin; k <= kmax; ++k) out.points.push_back(eval(std::ldexp(1.0, k)));
    out.threshold = observed_threshold(out.points);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double m : {2.0, 10.0, 100.0}) {
        out.above.push_back(eval(m * out.threshold));
        lo = std::min(lo, out.above.back().e_ueps);
        hi = std::max(hi, out.above.back().e_ueps);
    }
    out.spread_above = (hi - lo) / lo;
    return out;
}

struct RhoComparison {
    double h = 0.0, H = 0.0;
    double e_c0 = 0.0, e_c1 = 0.0;
    double relative_difference() const { return std::abs(e_c0 - e_c1) / std::min(e_c0, e_c1); }
};

inline std::vector<RhoComparison> compare_rho(const ExperimentConfig& c, const Scenario& s, const References& refs,
                                              std::ostream* log = nullptr) {
    std::vector<RhoComparison> out;
    for (auto [he, He] : c.pairs()) {
        RhoComparison cmp;
        cmp.h = std::ldexp(1.0, -he);
        cmp.H = std::ldexp(1.0, -He);
        for (const char* kind : {"c0", "c1"}) {
            RunOverrides o;
            o.rho = kind;
            const HybridRun run = run_pair(c, s, &refs, cmp.h, cmp.H, o);
            if (log) *log << "rho=" << kind << ' ', log_run(*log, run);
            (std::string(kind) == "c0" ? cmp.e_c0 : cmp.e_c1) = run.report.e_ueps;
        }
        out.push_back(cmp);
    }
    return out;
}

}  // namespace nhyb
