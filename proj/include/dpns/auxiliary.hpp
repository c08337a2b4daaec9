#pragma once

#include "dpns/assembly.hpp"

#include <stdexcept>
#include <string>

namespace dpns {

/// Coefficients of the compensation problem: kappa = c_kappa * rho*nu*h
/// (and the coupled-system variant xi = c_xi * rho*nu*h), recomputed per
/// mesh level.
struct AuxiliaryConfig {
    double c_kappa = 1.0;
    double c_xi = 1.0;
    double kappa(const PhysicalParams& pr, double h) const { return c_kappa * pr.rho * pr.nu * h; }
    double xi(const PhysicalParams& pr, double h) const { return c_xi * pr.rho * pr.nu * h; }
};

struct IncompatibleTraceError : std::runtime_error {
    double flux;
    IncompatibleTraceError(const std::string& msg, double fl)
        : std::runtime_error(msg), flux(fl) {}
};

/// Vector P2 / scalar P1 pair on the dual region; velocity constrained on
/// GammaD and on the interface (the one place the interface is essential).
struct AuxiliarySpaces {
    const Mesh* mesh = nullptr;
    std::vector<InterfaceEdge> gamma;
    DofMap velocity;
    DofMap pressure;
};

AuxiliarySpaces make_auxiliary_spaces(const Mesh& mesh);

/// Weakly divergence-free extension of interface trace data into the dual
/// region: minimal |D(.)| energy subject to (div w, q) = 0, w = trace on
/// Gamma, w = 0 on GammaD.
struct LiftedField {
    FeFunction field; // on AuxiliarySpaces::velocity
    double flux;      // integral of trace . n_s over Gamma
};

/// Trace given as dof values on the auxiliary velocity map (nonzero only on
/// interface dofs). Throws IncompatibleTraceError when | int trace.n | > tol.
LiftedField lift(const Eigen::VectorXd& trace_values, const AuxiliarySpaces& aux,
                 double flux_tol = 1e-10);
LiftedField lift(const std::function<Vec2(Vec2)>& trace, const AuxiliarySpaces& aux,
                 double flux_tol = 1e-10);

/// Interface trace of a fluid velocity copied onto the auxiliary map by
/// shared-entity dof identification.
Eigen::VectorXd trace_from_fluid_velocity(const FeFunction& u_s, const AuxiliarySpaces& aux);

struct AuxSolution {
    FeFunction u_d;    // on AuxiliarySpaces::velocity
    LiftedField beta;  // lifted convection field
    double kappa = 0.0;
};

/// Convection-diffusion compensation solve on the dual region:
/// 2 kappa (D(u_d), D(v)) + b(beta; u_d, v) = 0 against interior test
/// functions, u_d = u_s trace on Gamma (dof identification), 0 on GammaD.
AuxSolution solve_auxiliary(const FeFunction& u_s, const AuxiliarySpaces& aux, double kappa);

/// Residual of the interior equations of an auxiliary solution.
double auxiliary_residual(const AuxSolution& sol, const AuxiliarySpaces& aux);

struct CompensationReport {
    double kappa = 0.0;
    double energy_term = 0.0;       // 2 kappa ||D(u_d)||^2
    double interface_term = 0.0;    // -1/2 <u_s.n_s, |u_s|^2>
    double lhs = 0.0;               // energy_term + interface_term
    double rhs_flux = 0.0;          // kappa <du_d/dn_d, u_s> via the consistent
                                    // (variational) flux of the solved system
    double rhs_trace = 0.0;         // same pairing with one-sided gradient traces
    double gap = 0.0;               // |lhs - rhs_flux|
    double gap_trace = 0.0;
    double flux_trace_norm = 0.0;   // ||(grad u_d) n_d||_{0,Gamma}
    double dsemi_ud = 0.0;
    double inverse_constant = 0.0;  // flux_trace_norm * sqrt(h) / ||D(u_d)||
    std::string checks = "auxiliary-compensation-identity";
    std::string to_text() const;
};

CompensationReport compensation_report(const FeFunction& u_s, const AuxSolution& sol,
                                       const AuxiliarySpaces& aux);

} // namespace dpns
