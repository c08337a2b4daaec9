#pragma once

#include "dpns/manufactured.hpp"
#include "dpns/rng.hpp"
#include "dpns/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace dpns {

// --- dual norms -----------------------------------------------------------

/// ||f||_{-1} = sup (f, v) / ||D(v)|| over the discrete fluid velocity
/// space, via the Riesz solve (D(z), D(v)) = (f, v).
double dual_norm_fluid(const std::function<Vec2(Vec2)>& f, const CoupledSpaces& sp);

/// ||f||_{-1} = sup (f, psi) / ||grad psi|| over the discrete dual scalar
/// space.
double dual_norm_dual(const std::function<double(Vec2)>& f, const CoupledSpaces& sp);

// --- energy audit ----------------------------------------------------------

struct EnergyReport {
    double dsemi_u = 0, h1_phim = 0, h1_phif = 0;
    double fs_dual = 0, fd_dual = 0;
    // as printed: rho nu ||D u||^2 + (2 sigma km/mu)|phim|^2 + (sigma kf/mu)|phif|^2
    double lhs_printed = 0, rhs_printed = 0;
    // forms-consistent: sigma-free weights matching the bilinear forms
    double lhs_forms = 0, rhs_forms = 0;
    bool pass_printed = false, pass_forms = false;
    std::string checks = "a-priori-energy-estimate";
    std::string to_text() const;
};

/// Audits the a priori bound for a converged state (refuses otherwise).
EnergyReport energy_audit(const CoupledState& st, const CoupledSpaces& sp,
                          const SourceSpec& src, const PhysicalParams& pr,
                          double residual_gate = 1e-8);

/// Term-by-term energy balance at the solution: testing the equations with
/// the solution itself. Exact for homogeneous essential data.
struct EnergyIdentity {
    double viscous = 0, darcy_m = 0, darcy_f = 0, exchange = 0, bjs = 0, convection = 0;
    double lhs = 0, rhs = 0, rel_gap = 0;
    std::string checks = "energy-identity-at-solution";
    std::string to_text() const;
};

EnergyIdentity energy_identity(const CoupledState& st, const CoupledSpaces& sp,
                               const SourceSpec& src, const PhysicalParams& pr);

// --- inf-sup ----------------------------------------------------------------

struct InfSupReport {
    double beta_h = 0;
    int iterations = 0;
    double residual = 0;
    int n_pressure = 0;
    int n_zero_modes = 0; // exactly-singular pressure modes excluded
    double h = 0;
    std::string checks = "inf-sup-stability";
};

/// beta_h = sqrt of the smallest nonzero eigenvalue of
/// B Mu^-1 B^T q = lambda Mp q over the given pressure space, by blocked
/// inverse iteration through the saddle system, with a dense fallback for
/// clustered or exactly singular spectra (spurious-mode pairs).
InfSupReport infsup_estimate(const DofMap& velocity, const DofMap& pressure,
                             const PhysicalParams& pr, std::uint64_t seed = 99);

/// Core computation on explicit matrices (B over free velocity dofs only).
InfSupReport infsup_from_matrices(const Eigen::SparseMatrix<double>& B,
                                  const Eigen::SparseMatrix<double>& Mu,
                                  const Eigen::SparseMatrix<double>& Mp,
                                  std::uint64_t seed = 99);

// --- trilinear constant ------------------------------------------------------

struct TrilinearEstimate {
    double nhat = 0;
    int samples = 0;
    double best_ratio = 0;
};

/// max |((v.grad) w, z)| / (||D v|| ||D w|| ||D z||) over sampled discrete
/// triples plus a few fixed smooth candidates; monotone in `samples`.
TrilinearEstimate estimate_trilinear_constant(const DofMap& velocity, int samples,
                                              std::uint64_t seed);

double convection_trilinear(const FeFunction& v, const FeFunction& w, const FeFunction& z);

// --- uniqueness --------------------------------------------------------------

struct UniquenessReport {
    double nhat = 0;
    double fs_dual = 0, fd_dual = 0;
    double indicator = 0; // small-data uniqueness indicator, < 1 required
    int n_starts = 0;
    int n_converged = 0;
    double max_rel_distance = 0;
    double contraction = 0; // 2 rho nu - nhat (||D u1|| + ||D u2||)
    double beta_h = 0;
    double pressure_norm = 0, pressure_bound = 0;
    bool pressure_pass = false;
    std::string checks = "global-uniqueness-condition";
    std::string to_text() const;
};

UniquenessReport uniqueness_probe(const CoupledSpaces& sp, const SourceSpec& src,
                                  const PhysicalParams& pr, int n_starts,
                                  std::uint64_t seed, const SolverOptions& opts = {});

// --- interface residuals ------------------------------------------------------

struct InterfaceResiduals {
    double no_exchange = 0;       // matrix flux, dual-sense norm
    double mass_conservation = 0; // dual-sense norm
    double normal_stress = 0;     // L2(Gamma)
    double bjs = 0;               // L2(Gamma)
    std::string checks = "interface-conditions";
};

InterfaceResiduals interface_residuals(const CoupledState& st, const CoupledSpaces& sp,
                                       const PhysicalParams& pr);

// --- convergence ---------------------------------------------------------------

struct FieldErrors {
    double u_l2 = 0, u_h1 = 0, p_l2 = 0, phim_h1 = 0, phif_h1 = 0;
};

FieldErrors manufactured_errors(const CoupledState& st, const CoupledSpaces& sp,
                                const ManufacturedCase& mc);

struct ConvergenceRow {
    int level = 0, nx = 0, dofs = 0;
    double h = 0;
    FieldErrors err;
    InterfaceResiduals iface;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::string checks = "manufactured-solution-convergence";
    /// log2(e_l / e_{l+1}) per metric: u_l2, u_h1, p_l2, phim_h1, phif_h1
    std::vector<std::array<double, 5>> orders() const;
    std::vector<std::array<double, 4>> interface_orders() const;
    void write_csv(std::ostream& os) const;
    std::string to_text() const;
};

struct ConvergenceOptions {
    int levels = 4;
    int base_nx = 4;
    bool use_newton = false;
    double scale = 1.0;
    SolverOptions solver;
    bool parallel = false;
};

ConvergenceTable convergence_study(const ManufacturedCase& mc, const PhysicalParams& pr,
                                   const ConvergenceOptions& opts = {});

// --- empirical inequality probes ------------------------------------------------

FeFunction random_function(const DofMap& dm, Rng& rng);

/// Random mixture of low-frequency interpolated modes plus a small rough
/// component; constrained dofs zeroed. Inequality-constant probes sample
/// these so the sup side of each inequality is actually exercised.
FeFunction random_smooth_function(const DofMap& dm, Rng& rng);

double korn_constant(const DofMap& velocity, int nsamples, std::uint64_t seed);
double poincare_constant(const DofMap& scalar_map, int nsamples, std::uint64_t seed);
double trace_constant(const DofMap& dm, int nsamples, std::uint64_t seed);
double inverse_trace_constant(const DofMap& dual_velocity, int nsamples, std::uint64_t seed);

} // namespace dpns
