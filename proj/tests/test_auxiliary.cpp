#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpns/auxiliary.hpp"
#include "dpns/manufactured.hpp"
#include "dpns/rng.hpp"
#include "dpns/solver.hpp"
#include "dpns/verify.hpp"

#include <cmath>

using namespace dpns;

namespace {

// converged coupled solution on a fresh mesh, shared by several checks
struct Fixture {
    std::shared_ptr<Mesh> mesh;
    PhysicalParams pr;
    SourceSpec src;
    CoupledSpaces sp;
    CoupledState st;

    explicit Fixture(int nx, double scale = 1.0) {
        mesh = std::make_shared<Mesh>(build_two_domain_mesh(nx, nx));
        const ManufacturedCase mc = trig_case(pr);
        src = mc.sources(scale);
        sp = make_coupled_spaces(mesh, src);
        auto [state, rep] = picard_solve(sp, src, pr);
        REQUIRE(rep.converged);
        st = state;
    }
};

} // namespace

TEST_CASE("lift of simple traces") {
    const Mesh mesh = build_two_domain_mesh(3, 3);
    const AuxiliarySpaces aux = make_auxiliary_spaces(mesh);

    SUBCASE("zero trace lifts to the zero field") {
        const LiftedField lf = lift([](Vec2) { return Vec2{0, 0}; }, aux);
        CHECK(lf.flux == 0.0);
        CHECK(lf.field.coeffs.norm() == 0.0);
    }

    SUBCASE("pure tangential trace is compatible and reproduced") {
        const LiftedField lf = lift([](Vec2) { return Vec2{1, 0}; }, aux);
        CHECK(std::abs(lf.flux) <= 1e-14);
        for (int ent : interface_entities(aux.velocity)) {
            CHECK(lf.field.coeffs[aux.velocity.dof(ent, 0)] ==
                  doctest::Approx(1.0).epsilon(1e-12));
            CHECK(lf.field.coeffs[aux.velocity.dof(ent, 1)] ==
                  doctest::Approx(0.0).epsilon(1e-12));
        }
        // weak incompressibility against every dual pressure
        Triplets div;
        assemble_divergence(aux.velocity, aux.pressure, div, 0, 0, 1.0);
        Eigen::SparseMatrix<double> B(aux.pressure.n_dofs(), aux.velocity.n_dofs());
        B.setFromTriplets(div.begin(), div.end());
        CHECK((B * lf.field.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
    }

    SUBCASE("normal trace with net flux is rejected") {
        try {
            lift([](Vec2) { return Vec2{0, 1}; }, aux);
            FAIL("expected IncompatibleTraceError");
        } catch (const IncompatibleTraceError& e) {
            CHECK(e.flux == doctest::Approx(-1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("auxiliary solve vanishes without interface data") {
    const Mesh mesh = build_two_domain_mesh(3, 3);
    const AuxiliarySpaces aux = make_auxiliary_spaces(mesh);
    const DofMap fluid = build_dofmap(mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    const double kappa = 1.0 * mesh.h;

    SUBCASE("zero fluid velocity") {
        const FeFunction us = zero_function(fluid);
        const AuxSolution sol = solve_auxiliary(us, aux, kappa);
        CHECK(sol.u_d.coeffs.norm() == 0.0);
    }

    SUBCASE("nonzero interior but zero trace") {
        Rng rng(5);
        FeFunction us = random_function(fluid, rng);
        for (auto [fd, ad] : interface_dof_pairs(fluid, aux.velocity))
            us.coeffs[fd] = 0.0;
        const AuxSolution sol = solve_auxiliary(us, aux, kappa);
        CHECK(sol.u_d.coeffs.norm() <= 1e-12);
    }

    CHECK_THROWS_AS(solve_auxiliary(zero_function(fluid), aux, 0.0), std::invalid_argument);
}

TEST_CASE("auxiliary equation residual is at solver precision") {
    const Mesh mesh = build_two_domain_mesh(4, 4);
    const AuxiliarySpaces aux = make_auxiliary_spaces(mesh);
    const DofMap fluid = build_dofmap(mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    // manufactured tangential trace: compatible by orthogonality to the normal
    const FeFunction us = interpolate(
        [](Vec2 p, int c) {
            const double bump = std::sin(3.14159265358979324 * p.x);
            return c == 0 ? bump * (2.0 - p.y) : 0.0;
        },
        fluid);
    PhysicalParams pr;
    const AuxSolution sol = solve_auxiliary(us, aux, pr.rho * pr.nu * mesh.h);
    CHECK(auxiliary_residual(sol, aux) <= 1e-10);
    // essential constraint held by dof identification
    for (auto [fd, ad] : interface_dof_pairs(fluid, aux.velocity))
        CHECK(sol.u_d.coeffs[ad] == us.coeffs[fd]);
}

TEST_CASE("compensation identity on converged solutions") {
    for (int nx : {4, 8}) {
        Fixture fx(nx);
        const AuxiliarySpaces aux = make_auxiliary_spaces(*fx.mesh);
        AuxiliaryConfig cfg;
        const double kappa = cfg.kappa(fx.pr, fx.mesh->h);
        const AuxSolution sol = solve_auxiliary(fx.st.u, aux, kappa);
        const CompensationReport rep = compensation_report(fx.st.u, sol, aux);
        CHECK(rep.kappa == kappa);
        CHECK(rep.gap <= 1e-10 * (1.0 + std::abs(rep.lhs)));
        CHECK(rep.flux_trace_norm > 0);
        CHECK(rep.inverse_constant > 0);

        // halving kappa and re-solving keeps the identity valid
        const AuxSolution sol2 = solve_auxiliary(fx.st.u, aux, 0.5 * kappa);
        const CompensationReport rep2 = compensation_report(fx.st.u, sol2, aux);
        CHECK(rep2.gap <= 1e-10 * (1.0 + std::abs(rep2.lhs)));
    }
}

TEST_CASE("zero velocity gives an all-zero compensation report") {
    const Mesh mesh = build_two_domain_mesh(2, 2);
    const AuxiliarySpaces aux = make_auxiliary_spaces(mesh);
    const DofMap fluid = build_dofmap(mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    const AuxSolution sol = solve_auxiliary(zero_function(fluid), aux, mesh.h);
    const CompensationReport rep = compensation_report(zero_function(fluid), sol, aux);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs_flux == 0.0);
    CHECK(rep.rhs_trace == 0.0);
    CHECK(rep.gap == 0.0);
}

TEST_CASE("the coupled solution is untouched by the auxiliary post-process") {
    Fixture fx(3);
    const Eigen::VectorXd before = pack_state(fx.sp, fx.st);
    const AuxiliarySpaces aux = make_auxiliary_spaces(*fx.mesh);
    const AuxSolution sol = solve_auxiliary(fx.st.u, aux, fx.mesh->h);
    compensation_report(fx.st.u, sol, aux);
    CHECK((pack_state(fx.sp, fx.st) - before).norm() == 0.0);

    // a repeated coupled solve reproduces the same bits
    auto [st2, rep2] = picard_solve(fx.sp, fx.src, fx.pr);
    CHECK((pack_state(fx.sp, st2) - before).norm() == 0.0);
}

TEST_CASE("one-sided gradient trace probe is stable across levels") {
    const Mesh m1 = build_two_domain_mesh(4, 4);
    const Mesh m2 = build_two_domain_mesh(8, 8);
    const AuxiliarySpaces a1 = make_auxiliary_spaces(m1);
    const AuxiliarySpaces a2 = make_auxiliary_spaces(m2);
    const double c1 = inverse_trace_constant(a1.velocity, 60, 19);
    const double c2 = inverse_trace_constant(a2.velocity, 60, 19);
    CHECK(c1 > 0);
    CHECK(std::abs(c2 - c1) / c1 <= 0.25);
}

TEST_CASE("compensation report text lists every named term") {
    Fixture fx(2);
    const AuxiliarySpaces aux = make_auxiliary_spaces(*fx.mesh);
    const AuxSolution sol = solve_auxiliary(fx.st.u, aux, fx.mesh->h);
    const std::string txt = compensation_report(fx.st.u, sol, aux).to_text();
    for (const char* key : {"checks:", "kappa:", "energy_term:", "interface_term:", "lhs:",
                            "rhs_flux:", "rhs_trace:", "gap:", "flux_trace_norm:",
                            "inverse_constant:"})
        CHECK(txt.find(key) != std::string::npos);
}
