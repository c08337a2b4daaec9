// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Criteria 1-9 write CSV artifacts; the whole set runs
// twice and criterion 10 byte-compares the outputs.

#include "dpns/auxiliary.hpp"
#include "dpns/manufactured.hpp"
#include "dpns/rng.hpp"
#include "dpns/solver.hpp"
#include "dpns/verify.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <vector>

using namespace dpns;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

double now_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_csv(const fs::path& dir, const char* name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    os.setf(std::ios::fmtflags(0));
    return os;
}

struct SuiteRun {
    fs::path dir;
    std::vector<Outcome> outcomes;
    // converged homogeneous-data solves accumulated for criterion 5
    double worst_energy_gap = 0.0;
    int n_energy_checked = 0;

    void record_energy_identity(const CoupledState& st, const CoupledSpaces& sp,
                                const SourceSpec& src, const PhysicalParams& pr) {
        const EnergyIdentity id = energy_identity(st, sp, src, pr);
        worst_energy_gap = std::max(worst_energy_gap, id.rel_gap);
        n_energy_checked += 1;
    }

    void criterion_1() {
        const auto t0 = std::chrono::steady_clock::now();
        auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(8, 8));
        const CoupledSpaces sp = make_coupled_spaces(mesh, {});
        Rng rng(4242);
        auto os = open_csv(dir, "c1_skew.csv");
        os << "sample,quad_form,boundary,gap\n";
        bool pass = true;
        double worst = 0;
        char buf[160];
        for (int s = 0; s < 50; ++s) {
            const FeFunction beta = random_function(sp.velocity, rng);
            const FeFunction v = random_function(sp.velocity, rng);
            Triplets trip;
            assemble_b(beta, sp.velocity, trip, 0);
            Eigen::SparseMatrix<double> B(sp.velocity.n_dofs(), sp.velocity.n_dofs());
            B.setFromTriplets(trip.begin(), trip.end());
            const double qf = v.coeffs.dot(B * v.coeffs);
            const double bd = interface_convection_integral(beta, v);
            const double gap = std::abs(qf - bd);
            const double tol = 1e-12 * (1.0 + std::abs(qf));
            pass = pass && gap <= tol;
            worst = std::max(worst, gap / (1.0 + std::abs(qf)));
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", s, qf, bd, gap);
            os << buf;
        }
        const double secs = now_seconds(t0);
        pass = pass && secs < 10.0;
        std::snprintf(buf, sizeof buf, "worst scaled gap %.3e, %.1f s", worst, secs);
        outcomes.push_back({1, "skew-symmetry identity (50 random pairs, level 2)", pass, buf});
    }

    // criteria 2 and 9 share the trig convergence study; 5 accumulates
    void criteria_2_9() {
        const auto t0 = std::chrono::steady_clock::now();
        const PhysicalParams pr;
        const ManufacturedCase mc = trig_case(pr);
        ConvergenceTable table;
        for (int level = 1; level <= 4; ++level) {
            const int nx = 4 << (level - 1);
            auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(nx, nx));
            const SourceSpec src = mc.sources();
            const CoupledSpaces sp = make_coupled_spaces(mesh, src);
            auto [st, rep] = picard_solve(sp, src, pr);
            record_energy_identity(st, sp, src, pr);
            ConvergenceRow row;
            row.level = level;
            row.nx = nx;
            row.h = mesh->h;
            row.dofs = sp.n_total;
            row.err = manufactured_errors(st, sp, mc);
            row.iface = interface_residuals(st, sp, pr);
            table.rows.push_back(row);
        }
        {
            auto os = open_csv(dir, "c2_convergence.csv");
            table.write_csv(os);
        }
        const auto ords = table.orders();
        const auto& last = ords.back();
        char buf[200];
        const double secs = now_seconds(t0);
        const bool pass = last[0] >= 2.8 && last[1] >= 1.8 && last[2] >= 1.8 &&
                          last[3] >= 1.8 && last[4] >= 1.8 && secs < 300.0;
        std::snprintf(buf, sizeof buf,
                      "orders u_l2 %.2f u_h1 %.2f p_l2 %.2f phim %.2f phif %.2f, %.1f s",
                      last[0], last[1], last[2], last[3], last[4], secs);
        outcomes.push_back({2, "manufactured-solution convergence (4 levels)", pass, buf});

        const auto iords = table.interface_orders();
        auto os = open_csv(dir, "c9_interface.csv");
        os << "pair,no_exchange,mass,stress,bjs\n";
        for (std::size_t i = 0; i < iords.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", i + 1, iords[i][0],
                          iords[i][1], iords[i][2], iords[i][3]);
            os << buf;
        }
        const auto& il = iords.back();
        const bool ipass = il[0] >= 1.0 && il[1] >= 1.0 && il[2] >= 1.0 && il[3] >= 1.0;
        std::snprintf(buf, sizeof buf, "orders no-exch %.2f mass %.2f stress %.2f bjs %.2f",
                      il[0], il[1], il[2], il[3]);
        outcomes.push_back({9, "interface-condition residual decay (order >= 1)", ipass, buf});
    }

    void criterion_3() {
        const PhysicalParams pr;
        const ManufacturedCase mc = poly_case(pr);
        const SourceSpec src = mc.sources();
        auto os = open_csv(dir, "c3_exactness.csv");
        os << "level,nx,u_l2,u_h1,p_l2,phim_h1,phif_h1\n";
        bool pass = true;
        double worst = 0;
        char buf[240];
        for (int level = 1; level <= 4; ++level) {
            const int nx = 4 << (level - 1);
            auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(nx, nx));
            const CoupledSpaces sp = make_coupled_spaces(mesh, src);
            auto [st, rep] = picard_solve(sp, src, pr);
            const FieldErrors e = manufactured_errors(st, sp, mc);
            for (double v : {e.u_l2, e.u_h1, e.p_l2, e.phim_h1, e.phif_h1}) {
                pass = pass && v <= 1e-8;
                worst = std::max(worst, v);
            }
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", level, nx,
                          e.u_l2, e.u_h1, e.p_l2, e.phim_h1, e.phif_h1);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "worst error %.3e", worst);
        outcomes.push_back({3, "Galerkin exactness of the in-space solution", pass, buf});
    }

    void criterion_4() {
        auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(8, 8));
        Rng rng(1234);
        auto os = open_csv(dir, "c4_energy.csv");
        os << "trial,nu,lhs_forms,rhs_forms,pass_forms,lhs_printed,rhs_printed,pass_printed\n";
        bool pass = true;
        int printed_pass_count = 0;
        char buf[260];
        int trial = 0;
        for (double nu : {1.0, 0.1}) {
            PhysicalParams pr;
            pr.nu = nu;
            for (int k = 0; k < 20; ++k, ++trial) {
                double cs[12];
                for (double& c : cs)
                    c = rng.symmetric();
                SourceSpec src;
                src.f_s = [cs](Vec2 p) {
                    return Vec2{cs[0] + cs[1] * p.x + cs[2] * p.y + cs[3] * p.x * p.y,
                                cs[4] + cs[5] * p.x + cs[6] * p.y + cs[7] * p.x * p.x};
                };
                src.f_d = [cs](Vec2 p) {
                    return cs[8] + cs[9] * p.x + cs[10] * p.y + cs[11] * p.y * p.y;
                };
                const CoupledSpaces sp = make_coupled_spaces(mesh, src);
                auto [st, rep] = picard_solve(sp, src, pr);
                record_energy_identity(st, sp, src, pr);
                const EnergyReport er = energy_audit(st, sp, src, pr);
                pass = pass && er.pass_forms;
                printed_pass_count += er.pass_printed;
                std::snprintf(buf, sizeof buf, "%d,%.3g,%.17g,%.17g,%d,%.17g,%.17g,%d\n",
                              trial, nu, er.lhs_forms, er.rhs_forms, er.pass_forms ? 1 : 0,
                              er.lhs_printed, er.rhs_printed, er.pass_printed ? 1 : 0);
                os << buf;
            }
        }
        std::snprintf(buf, sizeof buf,
                      "forms-consistent variant on 40 solves; as-printed variant held on "
                      "%d/40 (reported, not asserted)",
                      printed_pass_count);
        outcomes.push_back({4, "energy audit on random forcings (level 2)", pass, buf});
    }

    void criterion_6() {
        const PhysicalParams pr;
        const ManufacturedCase mc = trig_case(pr);
        auto os = open_csv(dir, "c6_compensation.csv");
        os << "case,kappa,lhs,rhs_flux,gap,rhs_trace\n";
        bool pass = true;
        double worst = 0;
        char buf[220];
        int id = 0;
        for (int nx : {4, 8}) {
            auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(nx, nx));
            const AuxiliarySpaces aux = make_auxiliary_spaces(*mesh);
            AuxiliaryConfig cfg;
            for (double scale : {1.0, 0.75, 0.5, 0.25, 0.1}) {
                const SourceSpec src = mc.sources(scale);
                const CoupledSpaces sp = make_coupled_spaces(mesh, src);
                auto [st, rep] = picard_solve(sp, src, pr);
                record_energy_identity(st, sp, src, pr);
                const double kappa = cfg.kappa(pr, mesh->h);
                const AuxSolution sol = solve_auxiliary(st.u, aux, kappa);
                const CompensationReport cr = compensation_report(st.u, sol, aux);
                const double tol = 1e-10 * (1.0 + std::abs(cr.lhs));
                pass = pass && cr.gap <= tol;
                worst = std::max(worst, cr.gap / (1.0 + std::abs(cr.lhs)));
                std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", id++,
                              cr.kappa, cr.lhs, cr.rhs_flux, cr.gap, cr.rhs_trace);
                os << buf;
            }
        }
        std::snprintf(buf, sizeof buf, "10 auxiliary solves, worst scaled gap %.3e", worst);
        outcomes.push_back({6, "auxiliary compensation identity (kappa = rho nu h)", pass, buf});
    }

    void criterion_7() {
        const PhysicalParams pr;
        auto os = open_csv(dir, "c7_infsup.csv");
        os << "pair,level,nx,beta_h,zero_modes,iterations,residual\n";
        char buf[200];
        double bmin = 1e300, bmax = 0;
        bool pass = true;
        std::vector<double> control;
        for (int level = 1; level <= 4; ++level) {
            const int nx = 4 << (level - 1);
            const Mesh mesh = build_two_domain_mesh(nx, nx);
            const DofMap vel = build_dofmap(mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
            const DofMap prs = build_dofmap(mesh, {1, 1}, Domain::Fluid, {});
            const InfSupReport rep = infsup_estimate(vel, prs, pr);
            bmin = std::min(bmin, rep.beta_h);
            bmax = std::max(bmax, rep.beta_h);
            std::snprintf(buf, sizeof buf, "taylor-hood,%d,%d,%.17g,%d,%d,%.3e\n", level, nx,
                          rep.beta_h, rep.n_zero_modes, rep.iterations, rep.residual);
            os << buf;

            const DofMap prs2 = build_dofmap(mesh, {2, 1}, Domain::Fluid, {});
            const InfSupReport neg = infsup_estimate(vel, prs2, pr);
            control.push_back(neg.beta_h);
            std::snprintf(buf, sizeof buf, "equal-order,%d,%d,%.17g,%d,%d,%.3e\n", level, nx,
                          neg.beta_h, neg.n_zero_modes, neg.iterations, neg.residual);
            os << buf;
        }
        const double spread = (bmax - bmin) / bmax;
        pass = bmin > 0 && spread <= 0.25 && control.back() <= 0.5 * control.front();
        std::snprintf(buf, sizeof buf,
                      "beta in [%.4f, %.4f], spread %.1f%%; control %.4f -> %.4f", bmin, bmax,
                      100 * spread, control.front(), control.back());
        outcomes.push_back({7, "inf-sup stability and equal-order negative control", pass, buf});
    }

    void criterion_8() {
        const PhysicalParams pr;
        const ManufacturedCase mc = trig_case(pr);
        auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(8, 8));

        // scale the data so the uniqueness indicator sits below 0.5
        const SourceSpec probe_src = mc.sources(1.0);
        const CoupledSpaces sp0 = make_coupled_spaces(mesh, probe_src);
        const double nhat = estimate_trilinear_constant(sp0.velocity, 200, 777).nhat;
        const double fs1 = dual_norm_fluid(probe_src.f_s, sp0);
        const double fd1 = dual_norm_dual(probe_src.f_d, sp0);
        const double ind1 = nhat * (fs1 + fd1); // unit parameters
        const double scale = ind1 > 0 ? std::min(1.0, 0.4 / ind1) : 1.0;

        const SourceSpec src = mc.sources(scale);
        const CoupledSpaces sp = make_coupled_spaces(mesh, src);
        const UniquenessReport rep = uniqueness_probe(sp, src, pr, 5, 777);
        {
            auto os = open_csv(dir, "c8_uniqueness.csv");
            os << "indicator,n_converged,max_rel_distance,contraction,beta_h,pressure_norm,"
                  "pressure_bound\n";
            char buf[240];
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          rep.indicator, rep.n_converged, rep.max_rel_distance,
                          rep.contraction, rep.beta_h, rep.pressure_norm, rep.pressure_bound);
            os << buf;
        }
        char buf[240];
        const bool pass = rep.indicator < 0.5 && rep.n_converged == 5 &&
                          rep.max_rel_distance <= 1e-8 && rep.contraction > 0 &&
                          rep.pressure_pass;
        std::snprintf(buf, sizeof buf,
                      "indicator %.3f, max distance %.2e, contraction %.3f, pressure %.3f <= %.3f",
                      rep.indicator, rep.max_rel_distance, rep.contraction, rep.pressure_norm,
                      rep.pressure_bound);
        outcomes.push_back({8, "uniqueness probe under the small-data condition", pass, buf});
    }

    void criterion_5() {
        char buf[160];
        const bool pass = n_energy_checked > 0 && worst_energy_gap <= 1e-9;
        std::snprintf(buf, sizeof buf, "%d homogeneous-data solves, worst relative gap %.3e",
                      n_energy_checked, worst_energy_gap);
        outcomes.push_back({5, "energy identity at every converged solve", pass, buf});
    }

    void run_all() {
        criterion_1();
        criteria_2_9();
        criterion_3();
        criterion_4();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_5(); // aggregates solves recorded by 2, 4 and 6
    }
};

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb)
        return false;
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return sa == sb;
}

} // namespace

int main(int argc, char** argv) {
    const fs::path base = argc > 1 ? argv[1] : "acceptance_out";

    SuiteRun run1{base / "run1", {}};
    run1.run_all();
    SuiteRun run2{base / "run2", {}};
    run2.run_all();

    bool identical = true;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(run1.dir))
        files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        identical = identical && same_bytes(run1.dir / f, run2.dir / f);
    run1.outcomes.push_back({10, "determinism: repeated serial runs byte-identical",
                             identical && !files.empty(),
                             std::to_string(files.size()) + " csv artifacts compared"});

    std::sort(run1.outcomes.begin(), run1.outcomes.end(),
              [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
    int failures = 0;
    for (const auto& o : run1.outcomes) {
        std::printf("[%s] criterion %2d: %s (%s)\n", o.pass ? "PASS" : "FAIL", o.id,
                    o.name.c_str(), o.detail.c_str());
        failures += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(run1.outcomes.size()) - failures,
                run1.outcomes.size());
    return failures;
}
