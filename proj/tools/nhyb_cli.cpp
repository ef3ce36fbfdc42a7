// Command-line front end: run, sweep-gamma, compare-rho, upscale, export-mesh.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "nhyb/experiment.hpp"

namespace fs = std::filesystem;
using namespace nhyb;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    bool paper_scale = false;
    std::string output;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("config", c.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", c.overrides, "override a setting, key=value (repeatable)");
    sub->add_flag("--paper-scale", c.paper_scale, "eps = 0.01 and a 3000^2 reference grid");
    sub->add_option("-o,--output", c.output, "output directory");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = load_config(c.config, c.overrides);
    } else {
        apply_overrides(cfg, c.overrides);
    }
    if (c.paper_scale) cfg.paper_scale = true;
    if (!c.output.empty()) cfg.output = c.output;
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream os(path);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + path.string());
    os << std::setprecision(10);
    return os;
}

int cmd_run(const Common& common) {
    const ExperimentConfig cfg = resolve(common);
    const ExperimentResult r = run_experiment(cfg, &std::cout);
    for (std::size_t k = 0; k < r.rows.size(); ++k)
        if (r.rows[k].gamma < r.rows[k].gamma0)
            std::cerr << "warning: gamma = " << r.rows[k].gamma << " is below the coercivity bound gamma0 = "
                      << r.rows[k].gamma0 << " (" << pair_tag(r.rows[k]) << ")\n";
    std::cout << "results written to " << (fs::path(cfg.output) / "results.csv").string() << '\n';
    return 0;
}

int cmd_sweep_gamma(const Common& common, int he, int He, int kmin, int kmax) {
    const ExperimentConfig cfg = resolve(common);
    const Scenario s = build_scenario(cfg);
    const References refs = compute_references(cfg, s, &std::cout);
    const GammaSweep g = sweep_gamma(cfg, s, refs, std::ldexp(1.0, -he), std::ldexp(1.0, -He), kmin, kmax, &std::cout);
    std::ofstream os = open_output(fs::path(cfg.output) / "gamma_sweep.csv");
    os << "gamma,e_ueps,e_u0,ok\n";
    for (const auto* set : {&g.points, &g.above})
        for (const GammaPoint& p : *set) os << p.gamma << ',' << p.e_ueps << ',' << p.e_u0 << ',' << p.ok << '\n';
    std::cout << "gamma0 = " << g.gamma0 << ", observed gamma* = " << g.threshold
              << ", spread of e(u_eps) over {2,10,100} gamma* = " << g.spread_above << '\n';
    return 0;
}

int cmd_compare_rho(const Common& common) {
    const ExperimentConfig cfg = resolve(common);
    const Scenario s = build_scenario(cfg);
    const References refs = compute_references(cfg, s, &std::cout);
    const std::vector<RhoComparison> cmp = compare_rho(cfg, s, refs, &std::cout);
    std::ofstream os = open_output(fs::path(cfg.output) / "rho_comparison.csv");
    os << "h,H,e_ueps_c0,e_ueps_c1,relative_difference\n";
    for (const RhoComparison& c : cmp) {
        os << c.h << ',' << c.H << ',' << c.e_c0 << ',' << c.e_c1 << ',' << c.relative_difference() << '\n';
        std::cout << "h=" << c.h << " H=" << c.H << " C0=" << c.e_c0 << " C1=" << c.e_c1
                  << " difference=" << c.relative_difference() << '\n';
    }
    return 0;
}

int cmd_upscale(int example, double R1, double R2, int grid, int resolution, const std::string& output) {
    CellOptions opt;
    opt.resolution = resolution;
    const FastField a = example == 1 ? FastField(example1_two_scale(R1, R2)) : FastField(example2_two_scale());
    TabulationReport report;
    const TabulatedField t = tabulate_effective(a, grid, grid, {0, 0}, {1, 1}, opt, &report);
    std::ofstream os = open_output(output);
    write_tabulated_csv(os, t);
    std::cout << grid << 'x' << grid << " effective matrices written to " << output << " (lambda=" << t.lambda
              << ", Lambda=" << t.Lambda << ")\n";
    if (example == 1) {
        std::vector<Vec2> samples;
        for (int j = 0; j <= 80; ++j)
            for (int i = 0; i <= 80; ++i) samples.push_back({i / 80.0, j / 80.0});
        std::cout << "e(HMM) against the closed form: " << e_hmm(example1_effective(R1, R2), t, samples) << '\n';
    }
    return 0;
}

int cmd_export_mesh(const Common& common, int he, int He) {
    const ExperimentConfig cfg = resolve(common);
    const Scenario s = build_scenario(cfg);
    const HybridRun run = run_pair(cfg, s, nullptr, std::ldexp(1.0, -he), std::ldexp(1.0, -He));
    const fs::path dir(cfg.output);
    const std::string tag = pair_tag(run.report);
    if (run.ok) write_run_vtk(dir, tag, run);
    if (const Triangulation* ring = run.coefficient->transition().ring()) {
        std::ofstream os = open_output(dir / (tag + "_ring.vtk"));
        const std::vector<NamedField> pd{{"rho", run.coefficient->transition().nodal_values()}};
        write_vtk(os, *ring, pd, {}, "transition ring");
    }
    std::ofstream cap = open_output(dir / (tag + "_interface.csv"));
    write_interface_csv(cap, run.interface);
    log_run(std::cout, run);
    std::cout << "meshes written to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nitsche hybrid multiscale solver"};
    app.require_subcommand(1);

    Common run_c, gamma_c, rho_c, mesh_c;
    auto* run = app.add_subcommand("run", "solve every (h, H) pair of a configuration");
    add_common(run, run_c);

    int g_h = 8, g_H = 5, kmin = -3, kmax = 12;
    auto* gamma = app.add_subcommand("sweep-gamma", "scan the penalty parameter at one (h, H) pair");
    add_common(gamma, gamma_c);
    gamma->add_option("--fine", g_h, "fine exponent, h = 2^-e");
    gamma->add_option("--coarse", g_H, "coarse exponent, H = 2^-e");
    gamma->add_option("--kmin", kmin, "smallest gamma = 2^kmin");
    gamma->add_option("--kmax", kmax, "largest gamma = 2^kmax");

    auto* rho = app.add_subcommand("compare-rho", "C0 ring versus C1 cosine transition (well defect)");
    add_common(rho, rho_c);

    int example = 1, grid = 17, resolution = 32;
    double R1 = 2.5, R2 = 1.5;
    std::string table = "effective.csv";
    auto* upscale = app.add_subcommand("upscale", "tabulate effective matrices from periodic cell problems");
    upscale->add_option("--example", example, "1 or 2")->check(CLI::IsMember({1, 2}));
    upscale->add_option("--R1", R1, "example 1 radius R1");
    upscale->add_option("--R2", R2, "example 1 radius R2");
    upscale->add_option("--grid", grid, "macro grid points per direction")->check(CLI::PositiveNumber);
    upscale->add_option("--resolution", resolution, "cell mesh resolution")->check(CLI::PositiveNumber);
    upscale->add_option("-o,--output", table, "output CSV");

    int m_h = 7, m_H = 5;
    auto* mesh = app.add_subcommand("export-mesh", "write fine, coarse and ring meshes as VTK");
    add_common(mesh, mesh_c);
    mesh->add_option("--fine", m_h, "fine exponent, h = 2^-e");
    mesh->add_option("--coarse", m_H, "coarse exponent, H = 2^-e");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_c);
        if (*gamma) return cmd_sweep_gamma(gamma_c, g_h, g_H, kmin, kmax);
        if (*rho) return cmd_compare_rho(rho_c);
        if (*upscale) return cmd_upscale(example, R1, R2, grid, resolution, table);
        if (*mesh) return cmd_export_mesh(mesh_c, m_h, m_H);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::Config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
