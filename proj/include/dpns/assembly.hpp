#pragma once

#include "dpns/femspace.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>

namespace dpns {

/// Model coefficients. Physical runs use strictly positive values; alpha
/// or sigma may be zero in degenerate assembly checks.
struct PhysicalParams {
    double rho = 1.0;   // fluid density
    double nu = 1.0;    // kinematic viscosity
    double mu = 1.0;    // dynamic viscosity
    double k_m = 1.0;   // matrix permeability
    double k_f = 1.0;   // microfracture permeability
    double sigma = 1.0; // shape factor
    double alpha = 1.0; // Beavers-Joseph constant

    /// slip coefficient alpha rho nu sqrt(N) / sqrt(trace(Pi)); with
    /// Pi = k_f I it collapses to alpha rho nu / sqrt(k_f) for any N
    double bjs_coefficient() const { return alpha * rho * nu / std::sqrt(k_f); }
    void validate() const;
};

struct SourceSpec {
    std::function<Vec2(Vec2)> f_s;                  // body force, fluid region
    std::function<double(Vec2)> f_d;                // microfracture source
    BoundaryValueFn u_dirichlet;                    // data on GammaS
    std::function<double(Vec2)> phi_m_dirichlet;    // data on GammaD
    std::function<double(Vec2)> phi_f_dirichlet;
};

/// Taylor-Hood velocity/pressure on the fluid region plus one shared P2
/// scalar layout for both dual pressures; block order [u | p | phi_m | phi_f].
struct CoupledSpaces {
    std::shared_ptr<const Mesh> mesh;
    std::vector<InterfaceEdge> gamma;
    DofMap velocity; // P2 vector, GammaS constrained
    DofMap pressure; // P1 scalar, unconstrained
    DofMap phi;      // P2 scalar, GammaD constrained (phi_m and phi_f alike)

    int off_u = 0, off_p = 0, off_phim = 0, off_phif = 0, n_total = 0;
    std::vector<char> constrained; // per global dof
    Eigen::VectorXd bc_values;     // prescribed where constrained, else 0
};

CoupledSpaces make_coupled_spaces(std::shared_ptr<const Mesh> mesh, const SourceSpec& src);

struct BlockSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd rhs;
    int off_u = 0, off_p = 0, off_phim = 0, off_phif = 0, n = 0;
};

using Triplets = std::vector<Eigen::Triplet<double>>;

/// a_s + a_d + a_Gamma in the coupled block layout.
void assemble_a(const CoupledSpaces& sp, const PhysicalParams& pr, Triplets& out);

/// d(v, p) into the (u,p) block and -d(u, q) into (p,u); the two blocks are
/// negative transposes of each other.
void assemble_d(const CoupledSpaces& sp, const PhysicalParams& pr, Triplets& out);

/// Picard linearization of the trilinear form,
///   b(beta; v, w) = ((beta.grad) v, w) + 1/2 ((div beta) v, w),
/// assembled over the domain of `vel`; beta must live on that same dofmap.
void assemble_b(const FeFunction& beta, const DofMap& vel, Triplets& out,
                int offset = 0, double scale = 1.0);

/// Newton block: b(du; u, w) terms, derivative of the convection at u.
void assemble_b_derivative(const FeFunction& u, const DofMap& vel, Triplets& out,
                           int offset = 0);

/// coeff * 2 (D(trial), D(test)) over a vector map's domain.
void assemble_epsilon_stiffness(const DofMap& vel, double coeff, Triplets& out,
                                int offset = 0);

/// scale * (div trial, test): velocity columns against scalar test rows.
void assemble_divergence(const DofMap& vel, const DofMap& scal, Triplets& out,
                         int row_offset, int col_offset, double scale);

/// coeff * (grad trial, grad test) on a scalar map.
void assemble_grad_stiffness(const DofMap& scal, double coeff, Triplets& out,
                             int offset = 0);

/// coeff * (trial, test) mass on a scalar map.
void assemble_mass(const DofMap& scal, double coeff, Triplets& out, int offset = 0);

Eigen::VectorXd assemble_rhs(const CoupledSpaces& sp, const SourceSpec& src,
                             const PhysicalParams& pr);

BlockSystem build_system(const CoupledSpaces& sp, const PhysicalParams& pr,
                         const SourceSpec& src, const FeFunction* picard_beta);

/// Symmetric elimination of constrained dofs: boundary data moved to the
/// right-hand side, unit diagonal on constrained rows.
void eliminate_constraints(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& rhs,
                           const std::vector<char>& constrained,
                           const Eigen::VectorXd& values);

void apply_dirichlet(BlockSystem& sys, const CoupledSpaces& sp);

/// b(beta; v, v) evaluated through the skew identity's boundary route:
/// 1/2 <beta.n_s, |v|^2> on Gamma, with a Gauss rule exact for the
/// degree-6 trace integrand.
double interface_convection_integral(const FeFunction& beta, const FeFunction& v);

void write_matrix_market(const Eigen::SparseMatrix<double>& A, std::ostream& os);

/// Local P1 stiffness with constant coefficient, for kernel-level checks.
Eigen::Matrix3d local_scalar_stiffness(const TriGeom& g, double coeff);

} // namespace dpns
