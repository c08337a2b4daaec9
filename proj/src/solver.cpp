#include "dpns/solver.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace dpns {

Eigen::VectorXd pack_state(const CoupledSpaces& sp, const CoupledState& st) {
    Eigen::VectorXd x(sp.n_total);
    x.segment(sp.off_u, sp.velocity.n_dofs()) = st.u.coeffs;
    x.segment(sp.off_p, sp.pressure.n_dofs()) = st.p.coeffs;
    x.segment(sp.off_phim, sp.phi.n_dofs()) = st.phim.coeffs;
    x.segment(sp.off_phif, sp.phi.n_dofs()) = st.phif.coeffs;
    return x;
}

CoupledState unpack_state(const CoupledSpaces& sp, const Eigen::VectorXd& x) {
    CoupledState st;
    st.u = {&sp.velocity, x.segment(sp.off_u, sp.velocity.n_dofs())};
    st.p = {&sp.pressure, x.segment(sp.off_p, sp.pressure.n_dofs())};
    st.phim = {&sp.phi, x.segment(sp.off_phim, sp.phi.n_dofs())};
    st.phif = {&sp.phi, x.segment(sp.off_phif, sp.phi.n_dofs())};
    return st;
}

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("sparse factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd x = lu.solve(b);
    const double bnorm = b.norm();
    if (bnorm > 0.0) {
        // one step of iterative refinement if the direct solve lost digits
        double rel = (A * x - b).norm() / bnorm;
        if (rel > 1e-12) {
            x += lu.solve(b - A * x);
            rel = (A * x - b).norm() / bnorm;
        }
        if (rel > 1e-10)
            throw SingularSystemError("linear solve residual above tolerance");
    }
    return x;
}

Eigen::VectorXd linear_solve(const BlockSystem& sys) { return sparse_solve(sys.A, sys.rhs); }

Eigen::VectorXd residual_vector(const CoupledState& st, const CoupledSpaces& sp,
                                const SourceSpec& src, const PhysicalParams& pr) {
    Triplets trip;
    assemble_a(sp, pr, trip);
    assemble_d(sp, pr, trip);
    assemble_b(st.u, sp.velocity, trip, sp.off_u);
    Eigen::SparseMatrix<double> A(sp.n_total, sp.n_total);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd r = A * pack_state(sp, st) - assemble_rhs(sp, src, pr);
    for (int d = 0; d < sp.n_total; ++d)
        if (sp.constrained[d])
            r[d] = 0.0;
    return r;
}

double residual(const CoupledState& st, const CoupledSpaces& sp, const SourceSpec& src,
                const PhysicalParams& pr) {
    return residual_vector(st, sp, src, pr).norm();
}

namespace {

std::string lu_stats(const Eigen::SparseMatrix<double>& A) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "sparse-lu n=%d nnz=%d",
                  static_cast<int>(A.rows()), static_cast<int>(A.nonZeros()));
    return buf;
}

struct NonlinearLoop {
    const CoupledSpaces& sp;
    const SourceSpec& src;
    const PhysicalParams& pr;
    SolverOptions opts;
    SolveReport report;
    Eigen::VectorXd x;

    // shared by picard and newton: linear part and load vector
    Eigen::SparseMatrix<double> A0;
    Eigen::VectorXd rhs0;

    NonlinearLoop(const CoupledSpaces& s, const SourceSpec& f, const PhysicalParams& p,
                  const SolverOptions& o, const CoupledState* initial)
        : sp(s), src(f), pr(p), opts(o) {
        Triplets trip;
        assemble_a(sp, pr, trip);
        assemble_d(sp, pr, trip);
        A0.resize(sp.n_total, sp.n_total);
        A0.setFromTriplets(trip.begin(), trip.end());
        rhs0 = assemble_rhs(sp, src, pr);
        if (initial) {
            x = pack_state(sp, *initial);
            for (int d = 0; d < sp.n_total; ++d)
                if (sp.constrained[d])
                    x[d] = sp.bc_values[d];
        } else {
            x = solve_linearized(nullptr); // convection omitted
        }
        report.linear_stats = lu_stats(A0);
    }

    Eigen::VectorXd solve_linearized(const FeFunction* beta, const FeFunction* newton_at = nullptr) {
        Eigen::SparseMatrix<double> A = A0;
        if (beta || newton_at) {
            Triplets trip;
            if (beta)
                assemble_b(*beta, sp.velocity, trip, sp.off_u);
            if (newton_at)
                assemble_b_derivative(*newton_at, sp.velocity, trip, sp.off_u);
            Eigen::SparseMatrix<double> B(sp.n_total, sp.n_total);
            B.setFromTriplets(trip.begin(), trip.end());
            A += B;
        }
        Eigen::VectorXd rhs = rhs0;
        eliminate_constraints(A, rhs, sp.constrained, sp.bc_values);
        return sparse_solve(A, rhs);
    }

    Eigen::VectorXd current_residual_vector() {
        const CoupledState cur = unpack_state(sp, x);
        Triplets trip;
        assemble_b(cur.u, sp.velocity, trip, sp.off_u);
        Eigen::SparseMatrix<double> Bm(sp.n_total, sp.n_total);
        Bm.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd r = A0 * x + Bm * x - rhs0;
        for (int d = 0; d < sp.n_total; ++d)
            if (sp.constrained[d])
                r[d] = 0.0;
        return r;
    }

    double record_residual() {
        const double r = current_residual_vector().norm();
        report.residual_history.push_back(r);
        report.final_residual = r;
        report.iterations = static_cast<int>(report.residual_history.size());
        return r;
    }
};

} // namespace

std::pair<CoupledState, SolveReport>
picard_solve(const CoupledSpaces& sp, const SourceSpec& src, const PhysicalParams& pr,
             const SolverOptions& opts, const CoupledState* initial) {
    if (!(opts.tol > 0))
        throw std::invalid_argument("picard_solve: tol must be positive");
    NonlinearLoop loop(sp, src, pr, opts, initial);
    int rising = 0;
    bool damp = false;
    while (true) {
        const double r = loop.record_residual();
        if (r <= opts.tol) {
            loop.report.converged = true;
            break;
        }
        if (loop.report.iterations > opts.max_iter)
            throw NonConvergenceError("picard_solve: max_iter exceeded", loop.report);
        const auto& hist = loop.report.residual_history;
        if (hist.size() >= 2 && hist[hist.size() - 1] > hist[hist.size() - 2]) {
            if (++rising >= 3)
                damp = true;
        } else {
            rising = 0;
        }
        const CoupledState cur = unpack_state(sp, loop.x);
        Eigen::VectorXd xnew = loop.solve_linearized(&cur.u);
        loop.x = damp ? Eigen::VectorXd(0.5 * (xnew + loop.x)) : std::move(xnew);
    }
    loop.report.damped = damp;
    return {unpack_state(sp, loop.x), loop.report};
}

std::pair<CoupledState, SolveReport>
newton_solve(const CoupledSpaces& sp, const SourceSpec& src, const PhysicalParams& pr,
             const SolverOptions& opts, const CoupledState* initial) {
    if (!(opts.tol > 0))
        throw std::invalid_argument("newton_solve: tol must be positive");
    NonlinearLoop loop(sp, src, pr, opts, initial);
    const std::vector<char>& cons = sp.constrained;
    const Eigen::VectorXd zero_bc = Eigen::VectorXd::Zero(sp.n_total);
    while (true) {
        const Eigen::VectorXd rvec = loop.current_residual_vector();
        const double r = rvec.norm();
        loop.report.residual_history.push_back(r);
        loop.report.final_residual = r;
        loop.report.iterations = static_cast<int>(loop.report.residual_history.size());
        if (r <= opts.tol) {
            loop.report.converged = true;
            break;
        }
        if (loop.report.iterations > opts.max_iter)
            throw NonConvergenceError("newton_solve: max_iter exceeded", loop.report);
        const CoupledState cur = unpack_state(sp, loop.x);
        Triplets trip;
        assemble_b(cur.u, sp.velocity, trip, sp.off_u);
        assemble_b_derivative(cur.u, sp.velocity, trip, sp.off_u);
        Eigen::SparseMatrix<double> J = loop.A0;
        Eigen::SparseMatrix<double> B(sp.n_total, sp.n_total);
        B.setFromTriplets(trip.begin(), trip.end());
        J += B;
        Eigen::VectorXd rhs = -rvec;
        eliminate_constraints(J, rhs, cons, zero_bc);
        loop.x += sparse_solve(J, rhs);
    }
    return {unpack_state(sp, loop.x), loop.report};
}

std::string SolveReport::to_text() const {
    std::ostringstream os;
    os << "converged: " << (converged ? "yes" : "no") << "\n"
       << "iterations: " << iterations << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", final_residual);
    os << "final_residual: " << buf << "\n"
       << "damped: " << (damped ? "yes" : "no") << "\n"
       << "linear_solver: " << linear_stats << "\n"
       << "residual_history:\n";
    for (std::size_t k = 0; k < residual_history.size(); ++k) {
        std::snprintf(buf, sizeof buf, "  %3zu  %.17g", k, residual_history[k]);
        os << buf << "\n";
    }
    return os.str();
}

void SolveReport::write_csv(std::ostream& os) const {
    os << "step,residual\n";
    char buf[64];
    for (std::size_t k = 0; k < residual_history.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, residual_history[k]);
        os << buf;
    }
}

} // namespace dpns
