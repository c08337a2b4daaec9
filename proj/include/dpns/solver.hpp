#pragma once

#include "dpns/assembly.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dpns {

struct CoupledState {
    FeFunction u, p, phim, phif;
};

Eigen::VectorXd pack_state(const CoupledSpaces& sp, const CoupledState& st);
CoupledState unpack_state(const CoupledSpaces& sp, const Eigen::VectorXd& x);

struct SolveReport {
    int iterations = 0; // linear solves performed
    std::vector<double> residual_history;
    bool converged = false;
    double final_residual = 0.0;
    bool damped = false;
    std::string linear_stats;

    std::string to_text() const;
    void write_csv(std::ostream& os) const;
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
    SolveReport report;
    NonConvergenceError(const std::string& msg, SolveReport rep)
        : std::runtime_error(msg), report(std::move(rep)) {}
};

/// Direct sparse solve with a relative-residual check at 1e-10.
Eigen::VectorXd linear_solve(const BlockSystem& sys);
Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

/// Nonlinear residual of the coupled equations at the given state, tested
/// against every basis function; constrained entries are zeroed.
Eigen::VectorXd residual_vector(const CoupledState& st, const CoupledSpaces& sp,
                                const SourceSpec& src, const PhysicalParams& pr);
double residual(const CoupledState& st, const CoupledSpaces& sp, const SourceSpec& src,
                const PhysicalParams& pr);

/// Fixed-point iteration with the convection frozen at the previous
/// velocity. Warm start: the linear problem with the convection omitted.
/// Damped (factor 0.5) after three consecutive residual increases.
std::pair<CoupledState, SolveReport>
picard_solve(const CoupledSpaces& sp, const SourceSpec& src, const PhysicalParams& pr,
             const SolverOptions& opts = {}, const CoupledState* initial = nullptr);

std::pair<CoupledState, SolveReport>
newton_solve(const CoupledSpaces& sp, const SourceSpec& src, const PhysicalParams& pr,
             const SolverOptions& opts = {}, const CoupledState* initial = nullptr);

} // namespace dpns
