// Batch front end: solve and verification pipelines over a config file.
//
// Exit codes: 0 ok, 2 config error, 3 solver nonconvergence, 4 check failure.

#include "dpns/config.hpp"
#include "dpns/expression.hpp"
#include "dpns/verify.hpp"
#include "dpns/vtk_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dpns;

namespace {

struct Cli {
    std::string config_path;
    int level_override = 0;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::string out_override;
    bool serial = false;
    bool dump_matrix = false;
};

RunConfig load(const Cli& cli) {
    RunConfig cfg = load_config(cli.config_path);
    if (cli.level_override > 0)
        cfg.level = cli.level_override;
    if (cli.seed_set)
        cfg.seed = cli.seed_override;
    if (!cli.out_override.empty())
        cfg.out_dir = cli.out_override;
    return cfg;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    std::ofstream os(fs::path(cfg.out_dir) / name);
    if (!os)
        throw std::runtime_error("cannot write " + name + " under " + cfg.out_dir);
    return os;
}

struct Problem {
    std::shared_ptr<const Mesh> mesh;
    SourceSpec src;
    CoupledSpaces sp;
};

Problem setup(const RunConfig& cfg) {
    Problem pb;
    pb.mesh = std::make_shared<Mesh>(
        build_two_domain_mesh(cfg.effective_nx(), cfg.effective_ny(), cfg.geometry));
    pb.src = make_sources(cfg);
    pb.sp = make_coupled_spaces(pb.mesh, pb.src);
    return pb;
}

std::pair<CoupledState, SolveReport> run_solver(const RunConfig& cfg, const Problem& pb) {
    return cfg.use_newton ? newton_solve(pb.sp, pb.src, cfg.params, cfg.solver)
                          : picard_solve(pb.sp, pb.src, cfg.params, cfg.solver);
}

int cmd_solve(const RunConfig& cfg, bool dump_matrix) {
    Problem pb = setup(cfg);
    auto [st, rep] = run_solver(cfg, pb);
    {
        auto os = open_out(cfg, "solution.vtk");
        write_vtk(*pb.mesh,
                  {{"velocity", &st.u}, {"pressure", &st.p}, {"phi_m", &st.phim},
                   {"phi_f", &st.phif}},
                  os);
    }
    if (dump_matrix) {
        BlockSystem sys = build_system(pb.sp, cfg.params, pb.src, &st.u);
        apply_dirichlet(sys, pb.sp);
        auto os = open_out(cfg, "system.mtx");
        write_matrix_market(sys.A, os);
    }
    open_out(cfg, "solve_report.txt") << rep.to_text();
    {
        auto os = open_out(cfg, "residual_history.csv");
        rep.write_csv(os);
    }
    std::cout << rep.to_text();
    return 0;
}

int cmd_converge(const RunConfig& cfg, bool serial) {
    auto mc = make_manufactured(cfg);
    if (!mc)
        throw ConfigError("converge requires case type trig or poly");
    ConvergenceOptions copt;
    copt.levels = cfg.levels;
    copt.base_nx = cfg.nx;
    copt.use_newton = cfg.use_newton;
    copt.scale = cfg.scale;
    copt.solver = cfg.solver;
    copt.parallel = !serial;
    const ConvergenceTable table = convergence_study(*mc, cfg.params, copt);
    {
        auto os = open_out(cfg, "convergence.csv");
        table.write_csv(os);
    }
    open_out(cfg, "convergence.txt") << table.to_text();
    std::cout << table.to_text();
    const auto ords = table.orders();
    if (ords.empty())
        return 0;
    const auto& last = ords.back();
    const double want[5] = {2.8, 1.8, 1.8, 1.8, 1.8}; // u_l2, u_h1, p_l2, phim, phif
    for (int k = 0; k < 5; ++k)
        if (last[k] < want[k]) {
            std::cout << "order check failed: metric " << k << " observed " << last[k]
                      << " < " << want[k] << "\n";
            return 4;
        }
    return 0;
}

int cmd_audit(const RunConfig& cfg) {
    Problem pb = setup(cfg);
    auto [st, rep] = run_solver(cfg, pb);
    const EnergyReport er = energy_audit(st, pb.sp, pb.src, cfg.params);
    const EnergyIdentity id = energy_identity(st, pb.sp, pb.src, cfg.params);
    open_out(cfg, "energy_report.txt") << er.to_text() << "\n" << id.to_text();
    std::cout << er.to_text() << "\n" << id.to_text();
    return er.pass_forms ? 0 : 4;
}

int cmd_infsup(const RunConfig& cfg) {
    auto os = open_out(cfg, "infsup.csv");
    os << "level,nx,h,beta_h,iterations,residual\n";
    double bmin = 1e300, bmax = 0;
    char buf[160];
    for (int level = 1; level <= cfg.levels; ++level) {
        const int nx = cfg.nx << (level - 1);
        const Mesh mesh = build_two_domain_mesh(nx, cfg.ny << (level - 1), cfg.geometry);
        const DofMap vel = build_dofmap(mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
        const DofMap prs = build_dofmap(mesh, {1, 1}, Domain::Fluid, {});
        const InfSupReport rep = infsup_estimate(vel, prs, cfg.params, cfg.seed);
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%d,%.3e\n", level, nx, mesh.h,
                      rep.beta_h, rep.iterations, rep.residual);
        os << buf;
        std::cout << buf;
        bmin = std::min(bmin, rep.beta_h);
        bmax = std::max(bmax, rep.beta_h);
    }
    const double spread = bmax > 0 ? (bmax - bmin) / bmax : 1.0;
    std::snprintf(buf, sizeof buf, "beta_h spread: %.3f\n", spread);
    std::cout << buf;
    return (bmin > 0 && spread <= 0.25) ? 0 : 4;
}

int cmd_probe(const RunConfig& cfg) {
    Problem pb = setup(cfg);
    const UniquenessReport rep =
        uniqueness_probe(pb.sp, pb.src, cfg.params, cfg.n_starts, cfg.seed, cfg.solver);
    open_out(cfg, "uniqueness.txt") << rep.to_text();
    std::cout << rep.to_text();
    return 0; // evidence only, nothing asserted
}

int cmd_aux(const RunConfig& cfg) {
    Problem pb = setup(cfg);
    auto [st, rep] = run_solver(cfg, pb);
    const AuxiliarySpaces aux = make_auxiliary_spaces(*pb.mesh);
    const double kappa = cfg.aux.kappa(cfg.params, pb.mesh->h);
    const AuxSolution sol = solve_auxiliary(st.u, aux, kappa);
    const CompensationReport cr = compensation_report(st.u, sol, aux);
    open_out(cfg, "compensation.txt") << cr.to_text();
    std::cout << cr.to_text();
    return cr.gap <= 1e-10 * (1.0 + std::abs(cr.lhs)) ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-porosity Navier-Stokes solver and verification harness"};
    app.require_subcommand(1);

    Cli cli;
    std::string command;
    for (const char* name : {"solve", "converge", "audit", "infsup", "probe", "aux"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", cli.config_path, "run configuration file")->required();
        sub->add_option("--level", cli.level_override, "mesh level override");
        sub->add_option("--seed", cli.seed_override, "random seed override")
            ->each([&cli](const std::string&) { cli.seed_set = true; });
        sub->add_option("--out", cli.out_override, "output directory override");
        sub->add_flag("--serial", cli.serial, "disable level parallelism");
        sub->add_flag("--dump-matrix", cli.dump_matrix,
                      "write the assembled system in matrix market format (solve)");
        sub->callback([&command, name] { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load(cli);
        if (command == "solve")
            return cmd_solve(cfg, cli.dump_matrix);
        if (command == "converge")
            return cmd_converge(cfg, cli.serial);
        if (command == "audit")
            return cmd_audit(cfg);
        if (command == "infsup")
            return cmd_infsup(cfg);
        if (command == "probe")
            return cmd_probe(cfg);
        if (command == "aux")
            return cmd_aux(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ExpressionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
