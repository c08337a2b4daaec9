#include "dpns/auxiliary.hpp"

#include "dpns/solver.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dpns {

AuxiliarySpaces make_auxiliary_spaces(const Mesh& mesh) {
    AuxiliarySpaces aux;
    aux.mesh = &mesh;
    aux.gamma = interface_geometry(mesh);
    aux.velocity = build_dofmap(mesh, {2, 2}, Domain::Dual,
                                {BoundaryTag::GammaD, BoundaryTag::Interface}, {},
                                /*allow_interface_dirichlet=*/true);
    aux.pressure = build_dofmap(mesh, {1, 1}, Domain::Dual, {});
    return aux;
}

Eigen::VectorXd trace_from_fluid_velocity(const FeFunction& u_s, const AuxiliarySpaces& aux) {
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(aux.velocity.n_dofs());
    for (auto [from, to] : interface_dof_pairs(*u_s.dm, aux.velocity))
        trace[to] = u_s.coeffs[from];
    return trace;
}

namespace {

double interface_flux(const FeFunction& w, const AuxiliarySpaces& aux) {
    const EdgeRule& rule = edge_rule_gauss(3);
    double flux = 0.0;
    for (const auto& ge : aux.gamma)
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double l[3];
            edge_point_barycentric(*aux.mesh, ge.dual_tri, ge.a, ge.b, rule.points[q], l);
            flux += rule.weights[q] * ge.length * dot(eval_vector(w, ge.dual_tri, l), ge.normal_s);
        }
    return flux;
}

} // namespace

LiftedField lift(const Eigen::VectorXd& trace_values, const AuxiliarySpaces& aux,
                 double flux_tol) {
    const int nv = aux.velocity.n_dofs();
    const int nq = aux.pressure.n_dofs();
    FeFunction trace_fn{&aux.velocity, trace_values};
    const double flux = interface_flux(trace_fn, aux);
    if (std::abs(flux) > flux_tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "lift: incompatible trace, int trace.n = %.3e", flux);
        throw IncompatibleTraceError(buf, flux);
    }

    Triplets trip;
    assemble_epsilon_stiffness(aux.velocity, 1.0, trip, 0);
    Triplets div;
    assemble_divergence(aux.velocity, aux.pressure, div, nv, 0, 1.0);
    for (const auto& e : div) {
        trip.push_back(e);
        trip.emplace_back(e.col(), e.row(), e.value()); // symmetric saddle form
    }

    const int n = nv + nq;
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    std::vector<char> cons(n, 0);
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < nv; ++d)
        if (aux.velocity.constrained[d]) {
            cons[d] = 1;
            vals[d] = trace_values[d];
        }
    cons[nv] = 1; // pin one pressure dof; compatible flux keeps this consistent
    eliminate_constraints(K, rhs, cons, vals);
    Eigen::VectorXd x = sparse_solve(K, rhs);

    LiftedField lf;
    lf.field = {&aux.velocity, x.head(nv)};
    lf.flux = flux;
    return lf;
}

LiftedField lift(const std::function<Vec2(Vec2)>& trace, const AuxiliarySpaces& aux,
                 double flux_tol) {
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(aux.velocity.n_dofs());
    for (int ent : interface_entities(aux.velocity)) {
        const Vec2 v = trace(aux.velocity.support_points[ent]);
        vals[aux.velocity.dof(ent, 0)] = v.x;
        vals[aux.velocity.dof(ent, 1)] = v.y;
    }
    return lift(vals, aux, flux_tol);
}

namespace {

Eigen::SparseMatrix<double> auxiliary_operator(const AuxSolution& sol,
                                               const AuxiliarySpaces& aux) {
    Triplets trip;
    assemble_epsilon_stiffness(aux.velocity, sol.kappa, trip, 0);
    assemble_b(sol.beta.field, aux.velocity, trip, 0);
    Eigen::SparseMatrix<double> K(aux.velocity.n_dofs(), aux.velocity.n_dofs());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

} // namespace

AuxSolution solve_auxiliary(const FeFunction& u_s, const AuxiliarySpaces& aux, double kappa) {
    if (!(kappa > 0))
        throw std::invalid_argument("solve_auxiliary: kappa must be positive");
    AuxSolution sol;
    sol.kappa = kappa;
    sol.beta = lift(trace_from_fluid_velocity(u_s, aux), aux);

    Triplets trip;
    assemble_epsilon_stiffness(aux.velocity, kappa, trip, 0);
    assemble_b(sol.beta.field, aux.velocity, trip, 0);
    const int nv = aux.velocity.n_dofs();
    Eigen::SparseMatrix<double> K(nv, nv);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);

    Eigen::VectorXd vals = trace_from_fluid_velocity(u_s, aux);
    std::vector<char> cons(aux.velocity.constrained.begin(), aux.velocity.constrained.end());
    eliminate_constraints(K, rhs, cons, vals);
    sol.u_d = {&aux.velocity, sparse_solve(K, rhs)};
    return sol;
}

double auxiliary_residual(const AuxSolution& sol, const AuxiliarySpaces& aux) {
    const Eigen::VectorXd r = auxiliary_operator(sol, aux) * sol.u_d.coeffs;
    double acc = 0.0;
    for (int d = 0; d < aux.velocity.n_dofs(); ++d)
        if (!aux.velocity.constrained[d])
            acc += r[d] * r[d];
    return std::sqrt(acc);
}

CompensationReport compensation_report(const FeFunction& u_s, const AuxSolution& sol,
                                       const AuxiliarySpaces& aux) {
    CompensationReport rep;
    rep.kappa = sol.kappa;
    const double dsemi = norms(sol.u_d, NormKind::Dseminorm);
    rep.dsemi_ud = dsemi;
    rep.energy_term = 2.0 * sol.kappa * dsemi * dsemi;
    rep.interface_term = -interface_convection_integral(u_s, u_s);
    rep.lhs = rep.energy_term + rep.interface_term;

    const Eigen::VectorXd r = auxiliary_operator(sol, aux) * sol.u_d.coeffs;
    double flux_pairing = 0.0;
    for (int d = 0; d < aux.velocity.n_dofs(); ++d)
        if (aux.velocity.constrained[d])
            flux_pairing += sol.u_d.coeffs[d] * r[d];
    rep.rhs_flux = flux_pairing;

    // one-sided gradient traces on the dual side
    const EdgeRule& rule = edge_rule_gauss(4);
    double pair_trace = 0.0, flux_sq = 0.0;
    for (const auto& ge : aux.gamma) {
        const Vec2 nd = -1.0 * ge.normal_s;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double l[3];
            edge_point_barycentric(*aux.mesh, ge.dual_tri, ge.a, ge.b, rule.points[q], l);
            const Mat2 J = grad_vector(sol.u_d, ge.dual_tri, l);
            const Vec2 dn{J.m[0][0] * nd.x + J.m[0][1] * nd.y,
                          J.m[1][0] * nd.x + J.m[1][1] * nd.y};
            const Vec2 uval = eval_vector(sol.u_d, ge.dual_tri, l);
            const double w = rule.weights[q] * ge.length;
            pair_trace += w * dot(dn, uval);
            flux_sq += w * dot(dn, dn);
        }
    }
    rep.rhs_trace = sol.kappa * pair_trace;
    rep.flux_trace_norm = std::sqrt(flux_sq);
    rep.gap = std::abs(rep.lhs - rep.rhs_flux);
    rep.gap_trace = std::abs(rep.lhs - rep.rhs_trace);
    rep.inverse_constant =
        dsemi > 0 ? rep.flux_trace_norm * std::sqrt(aux.mesh->h) / dsemi : 0.0;
    return rep;
}

std::string CompensationReport::to_text() const {
    std::ostringstream os;
    char buf[128];
    auto line = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%s: %.17g\n", k, v);
        os << buf;
    };
    os << "checks: " << checks << "\n";
    line("kappa", kappa);
    line("energy_term", energy_term);
    line("interface_term", interface_term);
    line("lhs", lhs);
    line("rhs_flux", rhs_flux);
    line("rhs_trace", rhs_trace);
    line("gap", gap);
    line("gap_trace", gap_trace);
    line("flux_trace_norm", flux_trace_norm);
    line("dsemi_ud", dsemi_ud);
    line("inverse_constant", inverse_constant);
    return os.str();
}

} // namespace dpns
