#include "dpns/verify.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <ostream>
#include <sstream>

namespace dpns {

#ifndef M_PI
#define M_PI 3.14159265358979323846
#endif

namespace {

std::string fmt(const char* key, double v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %.17g\n", key, v);
    return buf;
}

Eigen::VectorXd load_vector_vec(const DofMap& vel, const std::function<Vec2(Vec2)>& f) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(vel.n_dofs());
    if (!f)
        return F;
    const TriangleRule& rule = triangle_rule_degree5();
    for (int t : vel.tri_ids) {
        const TriGeom g = tri_geom(*vel.mesh, t);
        const auto& cd = vel.cell_dofs[t];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            shape_values(vel.spec.degree, l, N);
            const Vec2 pt = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            const Vec2 fv = f(pt);
            const double w = rule.weights[q] * 2.0 * g.area;
            for (int k = 0; k < vel.spec.scalar_size(); ++k) {
                F[cd[2 * k]] += w * fv.x * N[k];
                F[cd[2 * k + 1]] += w * fv.y * N[k];
            }
        }
    }
    return F;
}

Eigen::VectorXd load_vector_scal(const DofMap& scal, const std::function<double(Vec2)>& f) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(scal.n_dofs());
    if (!f)
        return F;
    const TriangleRule& rule = triangle_rule_degree5();
    for (int t : scal.tri_ids) {
        const TriGeom g = tri_geom(*scal.mesh, t);
        const auto& cd = scal.cell_dofs[t];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            shape_values(scal.spec.degree, l, N);
            const Vec2 pt = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            const double fv = f(pt);
            const double w = rule.weights[q] * 2.0 * g.area;
            for (int k = 0; k < scal.spec.scalar_size(); ++k)
                F[cd[k]] += w * fv * N[k];
        }
    }
    return F;
}

double riesz_dual_norm(const Eigen::SparseMatrix<double>& gram_full,
                       const Eigen::VectorXd& load, const std::vector<char>& constrained) {
    Eigen::SparseMatrix<double> A = gram_full;
    Eigen::VectorXd rhs = load;
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(rhs.size());
    eliminate_constraints(A, rhs, constrained, zeros);
    const Eigen::VectorXd z = sparse_solve(A, rhs);
    return std::sqrt(std::max(0.0, z.dot(rhs)));
}

} // namespace

double dual_norm_fluid(const std::function<Vec2(Vec2)>& f, const CoupledSpaces& sp) {
    Triplets trip;
    assemble_epsilon_stiffness(sp.velocity, 0.5, trip); // (D(u), D(v))
    Eigen::SparseMatrix<double> M(sp.velocity.n_dofs(), sp.velocity.n_dofs());
    M.setFromTriplets(trip.begin(), trip.end());
    return riesz_dual_norm(M, load_vector_vec(sp.velocity, f),
                           {sp.velocity.constrained.begin(), sp.velocity.constrained.end()});
}

double dual_norm_dual(const std::function<double(Vec2)>& f, const CoupledSpaces& sp) {
    Triplets trip;
    assemble_grad_stiffness(sp.phi, 1.0, trip);
    Eigen::SparseMatrix<double> M(sp.phi.n_dofs(), sp.phi.n_dofs());
    M.setFromTriplets(trip.begin(), trip.end());
    return riesz_dual_norm(M, load_vector_scal(sp.phi, f),
                           {sp.phi.constrained.begin(), sp.phi.constrained.end()});
}

EnergyReport energy_audit(const CoupledState& st, const CoupledSpaces& sp,
                          const SourceSpec& src, const PhysicalParams& pr,
                          double residual_gate) {
    const double res = residual(st, sp, src, pr);
    if (!(res <= residual_gate)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "energy_audit: state not converged (residual %.3e > gate %.3e)", res,
                      residual_gate);
        throw std::invalid_argument(buf);
    }
    EnergyReport rep;
    rep.dsemi_u = norms(st.u, NormKind::Dseminorm);
    rep.h1_phim = norms(st.phim, NormKind::H1semi);
    rep.h1_phif = norms(st.phif, NormKind::H1semi);
    rep.fs_dual = dual_norm_fluid(src.f_s, sp);
    rep.fd_dual = dual_norm_dual(src.f_d, sp);

    const double d2 = rep.dsemi_u * rep.dsemi_u;
    const double m2 = rep.h1_phim * rep.h1_phim;
    const double f2 = rep.h1_phif * rep.h1_phif;
    rep.lhs_printed = pr.rho * pr.nu * d2 + 2.0 * pr.sigma * pr.k_m / pr.mu * m2 +
                      pr.sigma * pr.k_f / pr.mu * f2;
    rep.rhs_printed = pr.rho / pr.nu * rep.fs_dual * rep.fs_dual +
                      (pr.sigma > 0
                           ? pr.mu / (pr.sigma * pr.k_f) * rep.fd_dual * rep.fd_dual
                           : std::numeric_limits<double>::infinity());
    rep.lhs_forms = pr.rho * pr.nu * d2 + pr.k_m / pr.mu * m2 + pr.k_f / pr.mu * f2;
    rep.rhs_forms = pr.rho / pr.nu * rep.fs_dual * rep.fs_dual +
                    pr.mu / pr.k_f * rep.fd_dual * rep.fd_dual;
    rep.pass_printed = rep.lhs_printed <= rep.rhs_printed;
    rep.pass_forms = rep.lhs_forms <= rep.rhs_forms;
    return rep;
}

std::string EnergyReport::to_text() const {
    std::ostringstream os;
    os << "checks: " << checks << "\n"
       << fmt("dsemi_u", dsemi_u) << fmt("h1_phim", h1_phim) << fmt("h1_phif", h1_phif)
       << fmt("fs_dual", fs_dual) << fmt("fd_dual", fd_dual)
       << fmt("lhs_printed", lhs_printed) << fmt("rhs_printed", rhs_printed)
       << "pass_printed: " << (pass_printed ? "yes" : "no") << "\n"
       << fmt("lhs_forms", lhs_forms) << fmt("rhs_forms", rhs_forms)
       << "pass_forms: " << (pass_forms ? "yes" : "no") << "\n";
    return os.str();
}

EnergyIdentity energy_identity(const CoupledState& st, const CoupledSpaces& sp,
                               const SourceSpec& src, const PhysicalParams& pr) {
    EnergyIdentity id;
    const double d = norms(st.u, NormKind::Dseminorm);
    id.viscous = 2.0 * pr.rho * pr.nu * d * d;
    const double gm = norms(st.phim, NormKind::H1semi);
    const double gf = norms(st.phif, NormKind::H1semi);
    id.darcy_m = pr.k_m / pr.mu * gm * gm;
    id.darcy_f = pr.k_f / pr.mu * gf * gf;
    FeFunction diff{&sp.phi, st.phim.coeffs - st.phif.coeffs};
    const double ex = norms(diff, NormKind::L2);
    id.exchange = pr.sigma * pr.k_m / pr.mu * ex * ex;

    const EdgeRule& erule = edge_rule_gauss(3);
    double tang = 0.0;
    for (const auto& ge : sp.gamma)
        for (std::size_t q = 0; q < erule.points.size(); ++q) {
            double l[3];
            edge_point_barycentric(*sp.mesh, ge.fluid_tri, ge.a, ge.b, erule.points[q], l);
            const double ut = dot(eval_vector(st.u, ge.fluid_tri, l), ge.tangent);
            tang += erule.weights[q] * ge.length * ut * ut;
        }
    id.bjs = pr.bjs_coefficient() * tang;
    id.convection = interface_convection_integral(st.u, st.u);

    id.lhs = id.viscous + id.darcy_m + id.darcy_f + id.exchange + id.bjs + id.convection;
    id.rhs = assemble_rhs(sp, src, pr).dot(pack_state(sp, st));
    id.rel_gap = std::abs(id.lhs - id.rhs) / std::max({1e-300, std::abs(id.lhs), std::abs(id.rhs)});
    return id;
}

std::string EnergyIdentity::to_text() const {
    std::ostringstream os;
    os << "checks: " << checks << "\n"
       << fmt("viscous", viscous) << fmt("darcy_m", darcy_m) << fmt("darcy_f", darcy_f)
       << fmt("exchange", exchange) << fmt("bjs", bjs) << fmt("convection", convection)
       << fmt("lhs", lhs) << fmt("rhs", rhs) << fmt("rel_gap", rel_gap);
    return os.str();
}

InfSupReport infsup_from_matrices(const Eigen::SparseMatrix<double>& B,
                                  const Eigen::SparseMatrix<double>& Mu,
                                  const Eigen::SparseMatrix<double>& Mp,
                                  std::uint64_t seed) {
    const int nq = static_cast<int>(B.rows());
    const int nu = static_cast<int>(B.cols());
    InfSupReport rep;
    rep.n_pressure = nq;

    // saddle [[Mu, B^T],[B, -eps Mp]]: one factorization drives the inverse
    // iteration; the shift keeps it regular for spurious-mode pairs
    Triplets trip;
    for (int c = 0; c < Mu.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Mu, c); it; ++it)
            trip.emplace_back(it.row(), c, it.value());
    for (int c = 0; c < B.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(B, c); it; ++it) {
            trip.emplace_back(nu + it.row(), c, it.value());
            trip.emplace_back(c, nu + it.row(), it.value());
        }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> MuChol(Mu);
    if (MuChol.info() != Eigen::Success)
        throw SingularSystemError("infsup: velocity gram not SPD");

    auto S_apply = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        return B * MuChol.solve(Eigen::VectorXd(B.transpose() * q));
    };

    Rng rng(seed);
    // spectral scale estimate, then a tiny shift so exactly singular
    // pressure modes keep the shifted operator invertible
    double scale = 0.0;
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd q(nq);
        for (int i = 0; i < nq; ++i)
            q[i] = rng.symmetric();
        const double mq = q.dot(Mp * q);
        if (mq > 0)
            scale = std::max(scale, q.dot(S_apply(q)) / mq);
    }
    const double eps = 1e-10 * std::max(scale, 1e-30);

    for (int c = 0; c < Mp.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Mp, c); it; ++it)
            trip.emplace_back(nu + it.row(), nu + c, -eps * it.value());
    Eigen::SparseMatrix<double> Keps(nu + nq, nu + nq);
    Keps.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> Kelu;
    Kelu.analyzePattern(Keps);
    Kelu.factorize(Keps);
    if (Kelu.info() != Eigen::Success)
        throw SingularSystemError("infsup: shifted saddle factorization failed");

    auto OP_apply = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        // (S + eps Mp)^{-1} Mp q through the shifted saddle system
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + nq);
        rhs.tail(nq) = Mp * q;
        const Eigen::VectorXd sol = Kelu.solve(rhs);
        return -sol.tail(nq);
    };

    const int m = std::min(12, nq);
    Eigen::MatrixXd Q(nq, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < nq; ++i)
            Q(i, j) = rng.symmetric();

    auto orthonormalize = [&](Eigen::MatrixXd& Z) {
        for (int j = 0; j < Z.cols(); ++j) {
            for (int i = 0; i < j; ++i) {
                const double proj = Z.col(i).dot(Mp * Z.col(j));
                Z.col(j) -= proj * Z.col(i);
            }
            const double nn = std::sqrt(Z.col(j).dot(Mp * Z.col(j)));
            if (nn > 0)
                Z.col(j) /= nn;
        }
    };
    orthonormalize(Q);

    double lambda = 0.0, lambda_prev = -1.0;
    const int max_iter = 300;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXd Z(nq, m);
        for (int j = 0; j < m; ++j)
            Z.col(j) = OP_apply(Q.col(j));
        orthonormalize(Z);
        Eigen::MatrixXd SZ(nq, m);
        for (int j = 0; j < m; ++j)
            SZ.col(j) = S_apply(Z.col(j));
        const Eigen::MatrixXd Shat = Z.transpose() * SZ;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Shat + Shat.transpose()));
        Q = Z * eig.eigenvectors();
        rep.iterations = it + 1;

        // skip exactly singular modes: beta_h is the smallest NONZERO value
        const Eigen::VectorXd& ritz = eig.eigenvalues();
        const double zero_tol = std::max(1e-10 * std::abs(ritz(m - 1)), 1e-300);
        int first = 0;
        while (first < m && ritz(first) <= zero_tol)
            ++first;
        if (first == m)
            continue;
        rep.n_zero_modes = first;
        lambda = ritz(first);

        const Eigen::VectorXd q1 = Q.col(first);
        const Eigen::VectorXd Sq = S_apply(q1);
        const double den = std::max(Sq.norm(), std::abs(lambda) * (Mp * q1).norm());
        rep.residual = den > 0 ? (Sq - lambda * (Mp * q1)).norm() / den : 0.0;
        if (rep.residual <= 1e-9 && std::abs(lambda - lambda_prev) <=
                                        1e-12 * std::max(1.0, std::abs(lambda)))
            break;
        lambda_prev = lambda;
    }
    if (!(rep.residual <= 1e-8) || !(lambda > 0)) {
        // clustered near-kernels or exactly singular pressure modes defeat
        // the subspace iteration; fall back to the dense pencil solve and
        // skip the zero modes (beta_h is the smallest NONZERO value)
        Eigen::MatrixXd Sd(nq, nq);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nq);
        for (int j = 0; j < nq; ++j) {
            e[j] = 1.0;
            Sd.col(j) = S_apply(e);
            e[j] = 0.0;
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> geig(
            0.5 * (Sd + Sd.transpose()), Eigen::MatrixXd(Mp));
        if (geig.info() != Eigen::Success)
            throw NonConvergenceError("infsup: eigen solve did not converge", {});
        const Eigen::VectorXd& evals = geig.eigenvalues();
        const double lmax = std::abs(evals(nq - 1));
        const double zero_tol = std::max(1e-12 * lmax, 1e-300);
        int first = 0;
        while (first < nq && evals(first) <= zero_tol)
            ++first;
        if (first == nq)
            throw SingularSystemError("infsup: divergence block vanishes");
        rep.n_zero_modes = first;
        lambda = evals(first);
        const Eigen::VectorXd q1 = geig.eigenvectors().col(first);
        const Eigen::VectorXd Sq = S_apply(q1);
        const double den = std::max(Sq.norm(), std::abs(lambda) * (Mp * q1).norm());
        rep.residual = den > 0 ? (Sq - lambda * (Mp * q1)).norm() / den : 0.0;
    }
    if (!(rep.residual <= 1e-8))
        throw NonConvergenceError("infsup: eigen iteration did not converge", {});
    rep.beta_h = std::sqrt(std::max(0.0, lambda));
    return rep;
}

InfSupReport infsup_estimate(const DofMap& velocity, const DofMap& pressure,
                             const PhysicalParams& pr, std::uint64_t seed) {
    // free velocity dofs only
    std::vector<int> full_to_free(velocity.n_dofs(), -1);
    int nfree = 0;
    for (int d = 0; d < velocity.n_dofs(); ++d)
        if (!velocity.constrained[d])
            full_to_free[d] = nfree++;

    Triplets btrip;
    assemble_divergence(velocity, pressure, btrip, 0, 0, -pr.rho); // d(v, q)
    Triplets mut;
    assemble_epsilon_stiffness(velocity, 0.5, mut); // (D(u), D(v))
    Triplets mpt;
    assemble_mass(pressure, 1.0, mpt);

    Triplets bfree, mufree;
    for (const auto& e : btrip)
        if (full_to_free[e.col()] >= 0)
            bfree.emplace_back(e.row(), full_to_free[e.col()], e.value());
    for (const auto& e : mut)
        if (full_to_free[e.row()] >= 0 && full_to_free[e.col()] >= 0)
            mufree.emplace_back(full_to_free[e.row()], full_to_free[e.col()], e.value());

    Eigen::SparseMatrix<double> B(pressure.n_dofs(), nfree), Mu(nfree, nfree),
        Mp(pressure.n_dofs(), pressure.n_dofs());
    B.setFromTriplets(bfree.begin(), bfree.end());
    Mu.setFromTriplets(mufree.begin(), mufree.end());
    Mp.setFromTriplets(mpt.begin(), mpt.end());

    InfSupReport rep = infsup_from_matrices(B, Mu, Mp, seed);
    rep.h = velocity.mesh->h;
    return rep;
}

double convection_trilinear(const FeFunction& v, const FeFunction& w, const FeFunction& z) {
    const DofMap& dm = *v.dm;
    const TriangleRule& rule = triangle_rule_degree5();
    double acc = 0.0;
    for (int t : dm.tri_ids) {
        const double area = dm.mesh->tri_area(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            const Vec2 vv = eval_vector(v, t, l);
            const Mat2 Jw = grad_vector(w, t, l);
            const Vec2 zz = eval_vector(z, t, l);
            const Vec2 conv{Jw.m[0][0] * vv.x + Jw.m[0][1] * vv.y,
                            Jw.m[1][0] * vv.x + Jw.m[1][1] * vv.y};
            acc += rule.weights[q] * 2.0 * area * dot(conv, zz);
        }
    }
    return acc;
}

FeFunction random_function(const DofMap& dm, Rng& rng) {
    FeFunction f{&dm, Eigen::VectorXd::Zero(dm.n_dofs())};
    for (int d = 0; d < dm.n_dofs(); ++d)
        f.coeffs[d] = dm.constrained[d] ? 0.0 : rng.symmetric();
    return f;
}

FeFunction random_smooth_function(const DofMap& dm, Rng& rng) {
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& p : dm.support_points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    double a[2][4];
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < 4; ++k)
            a[c][k] = rng.symmetric();
    const int modes[4][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    FeFunction f = interpolate(
        [&](Vec2 p, int c) {
            const double xh = (p.x - lo.x) / (hi.x - lo.x);
            const double yh = (p.y - lo.y) / (hi.y - lo.y);
            double v = 0;
            for (int k = 0; k < 4; ++k)
                v += a[c][k] * std::sin(modes[k][0] * M_PI * xh) *
                     std::sin(modes[k][1] * M_PI * yh);
            return v;
        },
        dm);
    for (int d = 0; d < dm.n_dofs(); ++d)
        f.coeffs[d] = dm.constrained[d] ? 0.0 : f.coeffs[d] + 0.05 * rng.symmetric();
    return f;
}

TrilinearEstimate estimate_trilinear_constant(const DofMap& velocity, int samples,
                                              std::uint64_t seed) {
    if (samples < 1)
        throw std::invalid_argument("estimate_trilinear_constant: samples must be positive");
    TrilinearEstimate est;
    est.samples = samples;

    auto ratio = [&](const FeFunction& v, const FeFunction& w, const FeFunction& z) {
        const double den = norms(v, NormKind::Dseminorm) * norms(w, NormKind::Dseminorm) *
                           norms(z, NormKind::Dseminorm);
        if (den < 1e-14)
            return 0.0; // guard the 0/0 triple
        return std::abs(convection_trilinear(v, w, z)) / den;
    };

    // fixed smooth candidates, constrained dofs zeroed to stay in the space
    const RectStack geo = velocity.mesh->geometry;
    auto smooth = [&](int which) {
        FeFunction f = interpolate(
            [&, which](Vec2 p, int c) {
                const double sx = std::sin(M_PI * (p.x - geo.x0) / (geo.x1 - geo.x0));
                const double sy = std::sin(M_PI * (p.y - geo.y_interface) /
                                           (geo.y_top - geo.y_interface));
                const double s2x = std::sin(2.0 * M_PI * p.x);
                switch (which) {
                case 0: return c == 0 ? sx * sy : 0.0;
                case 1: return c == 1 ? s2x * sy : 0.0;
                default: return c == 0 ? sx * sy * p.y : -sx * sy * p.x;
                }
            },
            velocity);
        for (int d = 0; d < velocity.n_dofs(); ++d)
            if (velocity.constrained[d])
                f.coeffs[d] = 0.0;
        return f;
    };
    const FeFunction c0 = smooth(0), c1 = smooth(1), c2 = smooth(2);
    for (const auto* v : {&c0, &c1, &c2})
        for (const auto* w : {&c0, &c1, &c2})
            for (const auto* z : {&c0, &c1, &c2})
                est.nhat = std::max(est.nhat, ratio(*v, *w, *z));

    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        const FeFunction v = random_function(velocity, rng);
        const FeFunction w = random_function(velocity, rng);
        const FeFunction z = random_function(velocity, rng);
        const double r = ratio(v, w, z);
        est.best_ratio = std::max(est.best_ratio, r);
        est.nhat = std::max(est.nhat, r);
    }
    return est;
}

UniquenessReport uniqueness_probe(const CoupledSpaces& sp, const SourceSpec& src,
                                  const PhysicalParams& pr, int n_starts,
                                  std::uint64_t seed, const SolverOptions& opts) {
    if (n_starts < 2)
        throw std::invalid_argument("uniqueness_probe: n_starts must be >= 2");
    UniquenessReport rep;
    rep.n_starts = n_starts;
    rep.nhat = estimate_trilinear_constant(sp.velocity, 200, seed).nhat;
    rep.fs_dual = dual_norm_fluid(src.f_s, sp);
    rep.fd_dual = dual_norm_dual(src.f_d, sp);
    rep.indicator =
        rep.nhat * (std::pow(pr.rho, -1.0) * std::pow(pr.nu, -2.0) * rep.fs_dual +
                    std::pow(pr.rho, -1.5) * std::pow(pr.nu, -1.5) * std::sqrt(pr.mu) *
                        std::pow(pr.sigma, -0.5) * std::pow(pr.k_f, -0.5) * rep.fd_dual);

    Rng rng(seed + 1);
    std::vector<Eigen::VectorXd> solutions;
    std::vector<CoupledState> states;
    for (int s = 0; s < n_starts; ++s) {
        CoupledState init;
        init.u = random_function(sp.velocity, rng);
        init.p = random_function(sp.pressure, rng);
        init.phim = random_function(sp.phi, rng);
        init.phif = random_function(sp.phi, rng);
        try {
            auto [st, srep] = picard_solve(sp, src, pr, opts, &init);
            solutions.push_back(pack_state(sp, st));
            states.push_back(st);
            rep.n_converged += 1;
        } catch (const NonConvergenceError&) {
            // recorded, not fatal
        }
    }
    for (std::size_t i = 0; i < solutions.size(); ++i)
        for (std::size_t j = i + 1; j < solutions.size(); ++j) {
            const double d = (solutions[i] - solutions[j]).norm() /
                             (1.0 + std::max(solutions[i].norm(), solutions[j].norm()));
            rep.max_rel_distance = std::max(rep.max_rel_distance, d);
        }
    if (states.size() >= 2) {
        const double d1 = norms(states[0].u, NormKind::Dseminorm);
        const double d2 = norms(states[1].u, NormKind::Dseminorm);
        rep.contraction = 2.0 * pr.rho * pr.nu - rep.nhat * (d1 + d2);
    } else if (states.size() == 1) {
        const double d1 = norms(states[0].u, NormKind::Dseminorm);
        rep.contraction = 2.0 * pr.rho * pr.nu - 2.0 * rep.nhat * d1;
    }

    rep.beta_h = infsup_estimate(sp.velocity, sp.pressure, pr).beta_h;
    if (!states.empty()) {
        const double C2 = pr.rho / pr.nu * rep.fs_dual * rep.fs_dual +
                          pr.mu / (pr.sigma * pr.k_f) * rep.fd_dual * rep.fd_dual;
        const double C = std::sqrt(C2);
        rep.pressure_norm = norms(states[0].p, NormKind::L2);
        rep.pressure_bound =
            (2.0 * std::sqrt(pr.rho * pr.nu) * C + rep.nhat * C2 / (pr.rho * pr.nu) +
             pr.rho * rep.fs_dual + rep.fd_dual) /
            rep.beta_h;
        rep.pressure_pass = rep.pressure_norm <= rep.pressure_bound;
    }
    return rep;
}

std::string UniquenessReport::to_text() const {
    std::ostringstream os;
    os << "checks: " << checks << "\n"
       << fmt("nhat", nhat) << fmt("fs_dual", fs_dual) << fmt("fd_dual", fd_dual)
       << fmt("indicator", indicator) << "n_starts: " << n_starts << "\n"
       << "n_converged: " << n_converged << "\n"
       << fmt("max_rel_distance", max_rel_distance) << fmt("contraction", contraction)
       << fmt("beta_h", beta_h) << fmt("pressure_norm", pressure_norm)
       << fmt("pressure_bound", pressure_bound)
       << "pressure_pass: " << (pressure_pass ? "yes" : "no") << "\n";
    return os.str();
}

InterfaceResiduals interface_residuals(const CoupledState& st, const CoupledSpaces& sp,
                                       const PhysicalParams& pr) {
    InterfaceResiduals out;
    const EdgeRule& rule = edge_rule_gauss(4);

    // trace basis of the dual scalar space on Gamma
    const std::vector<int> ents = interface_entities(sp.phi);
    std::map<int, int> ent_to_local;
    for (std::size_t i = 0; i < ents.size(); ++i)
        ent_to_local[ents[i]] = static_cast<int>(i);
    const int nt = static_cast<int>(ents.size());
    Eigen::MatrixXd Mg = Eigen::MatrixXd::Zero(nt, nt);
    Eigen::VectorXd r_noex = Eigen::VectorXd::Zero(nt);
    Eigen::VectorXd r_mass = Eigen::VectorXd::Zero(nt);
    double stress_sq = 0.0, bjs_sq = 0.0;

    const double cm = pr.k_m / pr.mu, cf = pr.k_f / pr.mu;
    const double bjs_coef = pr.alpha * pr.nu / std::sqrt(pr.k_f);
    for (const auto& ge : sp.gamma) {
        const Vec2 nd = -1.0 * ge.normal_s;
        // local trace dofs on this edge (3 entities for P2)
        int tri_local[6];
        const auto& cd = sp.phi.cell_dofs[ge.dual_tri];
        for (int k = 0; k < 6; ++k) {
            auto it = ent_to_local.find(cd[k]); // arity 1: dof == entity
            tri_local[k] = it == ent_to_local.end() ? -1 : it->second;
        }
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double s = rule.points[q];
            double ld[3], lf[3];
            edge_point_barycentric(*sp.mesh, ge.dual_tri, ge.a, ge.b, s, ld);
            edge_point_barycentric(*sp.mesh, ge.fluid_tri, ge.a, ge.b, s, lf);
            const double w = rule.weights[q] * ge.length;

            double Nphi[6];
            shape_values(2, ld, Nphi);

            const Vec2 gm = grad_scalar(st.phim, ge.dual_tri, ld);
            const Vec2 gf = grad_scalar(st.phif, ge.dual_tri, ld);
            const Vec2 uval = eval_vector(st.u, ge.fluid_tri, lf);
            const Mat2 Ju = grad_vector(st.u, ge.fluid_tri, lf);
            const double pval = eval_scalar(st.p, ge.fluid_tri, lf);
            const double phif_val = eval_scalar(st.phif, ge.dual_tri, ld);

            const double g_noex = cm * dot(gm, nd);
            const double g_mass = dot(uval, ge.normal_s) - cf * dot(gf, nd);
            // n.D(u).n and tau.D(u).n from the fluid-side gradient trace
            const Vec2 n = ge.normal_s, tau = ge.tangent;
            const double Dnn = n.x * (Ju.m[0][0] * n.x + 0.5 * (Ju.m[0][1] + Ju.m[1][0]) * n.y) +
                               n.y * (0.5 * (Ju.m[0][1] + Ju.m[1][0]) * n.x + Ju.m[1][1] * n.y);
            const double Dtn = tau.x * (Ju.m[0][0] * n.x + 0.5 * (Ju.m[0][1] + Ju.m[1][0]) * n.y) +
                               tau.y * (0.5 * (Ju.m[0][1] + Ju.m[1][0]) * n.x + Ju.m[1][1] * n.y);
            const double g_stress = pval - 2.0 * pr.nu * Dnn - phif_val / pr.rho;
            const double g_bjs = -2.0 * pr.nu * Dtn - bjs_coef * dot(uval, tau);

            stress_sq += w * g_stress * g_stress;
            bjs_sq += w * g_bjs * g_bjs;
            for (int k = 0; k < 6; ++k) {
                if (tri_local[k] < 0)
                    continue;
                r_noex[tri_local[k]] += w * g_noex * Nphi[k];
                r_mass[tri_local[k]] += w * g_mass * Nphi[k];
                for (int k2 = 0; k2 < 6; ++k2)
                    if (tri_local[k2] >= 0)
                        Mg(tri_local[k], tri_local[k2]) += w * Nphi[k] * Nphi[k2];
            }
        }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(Mg);
    out.no_exchange = std::sqrt(std::max(0.0, r_noex.dot(ldlt.solve(r_noex))));
    out.mass_conservation = std::sqrt(std::max(0.0, r_mass.dot(ldlt.solve(r_mass))));
    out.normal_stress = std::sqrt(stress_sq);
    out.bjs = std::sqrt(bjs_sq);
    return out;
}

FieldErrors manufactured_errors(const CoupledState& st, const CoupledSpaces& sp,
                                const ManufacturedCase& mc) {
    FieldErrors e;
    const TriangleRule& rule = triangle_rule_degree5();
    const auto& f = mc.f;
    for (int t : sp.velocity.tri_ids) {
        const TriGeom g = tri_geom(*sp.mesh, t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            const Vec2 pt = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            const double w = rule.weights[q] * 2.0 * g.area;
            const Vec2 uh = eval_vector(st.u, t, l);
            const Mat2 J = grad_vector(st.u, t, l);
            const double ph = eval_scalar(st.p, t, l);
            const double dux = uh.x - f.ux(pt.x, pt.y);
            const double duy = uh.y - f.uy(pt.x, pt.y);
            e.u_l2 += w * (dux * dux + duy * duy);
            const double e00 = J.m[0][0] - f.dux_dx(pt.x, pt.y);
            const double e01 = J.m[0][1] - f.dux_dy(pt.x, pt.y);
            const double e10 = J.m[1][0] - f.duy_dx(pt.x, pt.y);
            const double e11 = J.m[1][1] - f.duy_dy(pt.x, pt.y);
            e.u_h1 += w * (e00 * e00 + e01 * e01 + e10 * e10 + e11 * e11);
            const double dp = ph - f.p(pt.x, pt.y);
            e.p_l2 += w * dp * dp;
        }
    }
    for (int t : sp.phi.tri_ids) {
        const TriGeom g = tri_geom(*sp.mesh, t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            const Vec2 pt = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            const double w = rule.weights[q] * 2.0 * g.area;
            const Vec2 gm = grad_scalar(st.phim, t, l);
            const Vec2 gf = grad_scalar(st.phif, t, l);
            const double em0 = gm.x - f.dphim_dx(pt.x, pt.y);
            const double em1 = gm.y - f.dphim_dy(pt.x, pt.y);
            const double ef0 = gf.x - f.dphif_dx(pt.x, pt.y);
            const double ef1 = gf.y - f.dphif_dy(pt.x, pt.y);
            e.phim_h1 += w * (em0 * em0 + em1 * em1);
            e.phif_h1 += w * (ef0 * ef0 + ef1 * ef1);
        }
    }
    e.u_l2 = std::sqrt(e.u_l2);
    e.u_h1 = std::sqrt(e.u_h1);
    e.p_l2 = std::sqrt(e.p_l2);
    e.phim_h1 = std::sqrt(e.phim_h1);
    e.phif_h1 = std::sqrt(e.phif_h1);
    return e;
}

ConvergenceTable convergence_study(const ManufacturedCase& mc, const PhysicalParams& pr,
                                   const ConvergenceOptions& opts) {
    ConvergenceTable table;
    auto run_level = [&](int level) -> ConvergenceRow {
        const int nx = opts.base_nx << (level - 1);
        auto mesh = std::make_shared<Mesh>(build_two_domain_mesh(nx, nx));
        const SourceSpec src = mc.sources(opts.scale);
        const CoupledSpaces sp = make_coupled_spaces(mesh, src);
        ConvergenceRow row;
        row.level = level;
        row.nx = nx;
        row.h = mesh->h;
        row.dofs = sp.n_total;
        auto [st, rep] = opts.use_newton ? newton_solve(sp, src, pr, opts.solver)
                                         : picard_solve(sp, src, pr, opts.solver);
        row.err = manufactured_errors(st, sp, mc);
        row.iface = interface_residuals(st, sp, pr);
        return row;
    };
    if (opts.parallel) {
        std::vector<std::future<ConvergenceRow>> futs;
        for (int level = 1; level <= opts.levels; ++level)
            futs.push_back(std::async(std::launch::async, run_level, level));
        for (auto& fu : futs)
            table.rows.push_back(fu.get());
    } else {
        for (int level = 1; level <= opts.levels; ++level)
            table.rows.push_back(run_level(level));
    }
    return table;
}

std::vector<std::array<double, 5>> ConvergenceTable::orders() const {
    std::vector<std::array<double, 5>> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1].err;
        const auto& b = rows[i].err;
        const double lh = std::log2(rows[i - 1].h / rows[i].h);
        auto ord = [lh](double ea, double eb) { return std::log2(ea / eb) / lh; };
        out.push_back({ord(a.u_l2, b.u_l2), ord(a.u_h1, b.u_h1), ord(a.p_l2, b.p_l2),
                       ord(a.phim_h1, b.phim_h1), ord(a.phif_h1, b.phif_h1)});
    }
    return out;
}

std::vector<std::array<double, 4>> ConvergenceTable::interface_orders() const {
    std::vector<std::array<double, 4>> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1].iface;
        const auto& b = rows[i].iface;
        const double lh = std::log2(rows[i - 1].h / rows[i].h);
        auto ord = [lh](double ea, double eb) { return std::log2(ea / eb) / lh; };
        out.push_back({ord(a.no_exchange, b.no_exchange),
                       ord(a.mass_conservation, b.mass_conservation),
                       ord(a.normal_stress, b.normal_stress), ord(a.bjs, b.bjs)});
    }
    return out;
}

void ConvergenceTable::write_csv(std::ostream& os) const {
    os << "level,nx,dofs,h,err_u_l2,order_u_l2,err_u_h1,order_u_h1,err_p_l2,order_p_l2,"
          "err_phim_h1,order_phim_h1,err_phif_h1,order_phif_h1,"
          "res_no_exchange,res_mass,res_stress,res_bjs\n";
    const auto ords = orders();
    char buf[512];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string ord[5];
        for (int k = 0; k < 5; ++k) {
            if (i == 0)
                ord[k] = "";
            else {
                std::snprintf(buf, sizeof buf, "%.6f", ords[i - 1][k]);
                ord[k] = buf;
            }
        }
        std::snprintf(buf, sizeof buf,
                      "%d,%d,%d,%.17g,%.17g,%s,%.17g,%s,%.17g,%s,%.17g,%s,%.17g,%s,"
                      "%.17g,%.17g,%.17g,%.17g\n",
                      r.level, r.nx, r.dofs, r.h, r.err.u_l2, ord[0].c_str(), r.err.u_h1,
                      ord[1].c_str(), r.err.p_l2, ord[2].c_str(), r.err.phim_h1,
                      ord[3].c_str(), r.err.phif_h1, ord[4].c_str(), r.iface.no_exchange,
                      r.iface.mass_conservation, r.iface.normal_stress, r.iface.bjs);
        os << buf;
    }
}

std::string ConvergenceTable::to_text() const {
    std::ostringstream os;
    os << "checks: " << checks << "\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%5s %5s %8s %10s %12s %12s %12s %12s %12s\n", "level",
                  "nx", "dofs", "h", "u_l2", "u_h1", "p_l2", "phim_h1", "phif_h1");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%5d %5d %8d %10.4e %12.5e %12.5e %12.5e %12.5e %12.5e\n",
                      r.level, r.nx, r.dofs, r.h, r.err.u_l2, r.err.u_h1, r.err.p_l2,
                      r.err.phim_h1, r.err.phif_h1);
        os << buf;
    }
    const auto ords = orders();
    for (std::size_t i = 0; i < ords.size(); ++i) {
        std::snprintf(buf, sizeof buf,
                      "order %zu->%zu: u_l2 %.2f  u_h1 %.2f  p_l2 %.2f  phim_h1 %.2f  "
                      "phif_h1 %.2f\n",
                      i + 1, i + 2, ords[i][0], ords[i][1], ords[i][2], ords[i][3], ords[i][4]);
        os << buf;
    }
    return os.str();
}

namespace {

double max_sampled_ratio(const DofMap& dm, int nsamples, std::uint64_t seed, bool rough_too,
                         const std::function<double(const FeFunction&)>& ratio) {
    Rng rng(seed);
    double c = 0.0;
    for (int s = 0; s < nsamples; ++s) {
        const FeFunction v = (rough_too && s % 2) ? random_function(dm, rng)
                                                  : random_smooth_function(dm, rng);
        c = std::max(c, ratio(v));
    }
    return c;
}

} // namespace

double korn_constant(const DofMap& velocity, int nsamples, std::uint64_t seed) {
    return max_sampled_ratio(velocity, nsamples, seed, true, [](const FeFunction& v) {
        const double d = norms(v, NormKind::Dseminorm);
        return d > 1e-14 ? norms(v, NormKind::H1semi) / d : 0.0;
    });
}

double poincare_constant(const DofMap& scalar_map, int nsamples, std::uint64_t seed) {
    return max_sampled_ratio(scalar_map, nsamples, seed, false, [](const FeFunction& v) {
        const double d = norms(v, NormKind::H1semi);
        return d > 1e-14 ? norms(v, NormKind::L2) / d : 0.0;
    });
}

double trace_constant(const DofMap& dm, int nsamples, std::uint64_t seed) {
    return max_sampled_ratio(dm, nsamples, seed, false, [](const FeFunction& v) {
        const double l2 = norms(v, NormKind::L2);
        const double h1 = std::sqrt(l2 * l2 + std::pow(norms(v, NormKind::H1semi), 2));
        return (l2 > 1e-14 && h1 > 1e-14) ? norms(v, NormKind::L2Gamma) / std::sqrt(l2 * h1)
                                          : 0.0;
    });
}

double inverse_trace_constant(const DofMap& dual_velocity, int nsamples, std::uint64_t seed) {
    Rng rng(seed);
    const auto gamma = interface_geometry(*dual_velocity.mesh);
    const EdgeRule& erule = edge_rule_gauss(3);
    const TriangleRule& trule = triangle_rule_degree5();
    const double h = dual_velocity.mesh->h;
    double c = 0.0;
    for (int s = 0; s < nsamples; ++s) {
        const FeFunction v = random_function(dual_velocity, rng);
        for (const auto& ge : gamma) {
            const Vec2 nd = -1.0 * ge.normal_s;
            double edge_sq = 0.0;
            for (std::size_t q = 0; q < erule.points.size(); ++q) {
                double l[3];
                edge_point_barycentric(*dual_velocity.mesh, ge.dual_tri, ge.a, ge.b,
                                       erule.points[q], l);
                const Mat2 J = grad_vector(v, ge.dual_tri, l);
                const Vec2 fn{J.m[0][0] * nd.x + J.m[0][1] * nd.y,
                              J.m[1][0] * nd.x + J.m[1][1] * nd.y};
                edge_sq += erule.weights[q] * ge.length * dot(fn, fn);
            }
            double k_sq = 0.0;
            const double area = dual_velocity.mesh->tri_area(ge.dual_tri);
            for (std::size_t q = 0; q < trule.points.size(); ++q) {
                const Mat2 J = grad_vector(v, ge.dual_tri, trule.points[q].data());
                k_sq += trule.weights[q] * 2.0 * area *
                        (J.m[0][0] * J.m[0][0] + J.m[0][1] * J.m[0][1] +
                         J.m[1][0] * J.m[1][0] + J.m[1][1] * J.m[1][1]);
            }
            if (k_sq > 1e-28)
                c = std::max(c, std::sqrt(edge_sq) * std::sqrt(h) / std::sqrt(k_sq));
        }
    }
    return c;
}

} // namespace dpns
