#include "dpns/assembly.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dpns {

void PhysicalParams::validate() const {
    if (!(rho > 0 && nu > 0 && mu > 0 && k_m > 0 && k_f > 0))
        throw std::invalid_argument("PhysicalParams: rho, nu, mu, k_m, k_f must be positive");
    if (sigma < 0 || alpha < 0)
        throw std::invalid_argument("PhysicalParams: sigma, alpha must be nonnegative");
}

CoupledSpaces make_coupled_spaces(std::shared_ptr<const Mesh> mesh, const SourceSpec& src) {
    CoupledSpaces sp;
    sp.mesh = std::move(mesh);
    sp.gamma = interface_geometry(*sp.mesh);
    sp.velocity = build_dofmap(*sp.mesh, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS},
                               src.u_dirichlet);
    sp.pressure = build_dofmap(*sp.mesh, {1, 1}, Domain::Fluid, {});
    sp.phi = build_dofmap(*sp.mesh, {2, 1}, Domain::Dual, {BoundaryTag::GammaD});

    sp.off_u = 0;
    sp.off_p = sp.velocity.n_dofs();
    sp.off_phim = sp.off_p + sp.pressure.n_dofs();
    sp.off_phif = sp.off_phim + sp.phi.n_dofs();
    sp.n_total = sp.off_phif + sp.phi.n_dofs();

    sp.constrained.assign(sp.n_total, 0);
    sp.bc_values = Eigen::VectorXd::Zero(sp.n_total);
    for (int d = 0; d < sp.velocity.n_dofs(); ++d)
        if (sp.velocity.constrained[d]) {
            sp.constrained[sp.off_u + d] = 1;
            sp.bc_values[sp.off_u + d] = sp.velocity.prescribed[d];
        }
    for (int d = 0; d < sp.phi.n_dofs(); ++d)
        if (sp.phi.constrained[d]) {
            const Vec2 pt = sp.phi.support_points[d];
            sp.constrained[sp.off_phim + d] = 1;
            sp.constrained[sp.off_phif + d] = 1;
            if (src.phi_m_dirichlet)
                sp.bc_values[sp.off_phim + d] = src.phi_m_dirichlet(pt);
            if (src.phi_f_dirichlet)
                sp.bc_values[sp.off_phif + d] = src.phi_f_dirichlet(pt);
        }
    return sp;
}

namespace {

Vec2 quad_point(const TriGeom& g, const double l[3]) {
    return l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
}

} // namespace

Eigen::Matrix3d local_scalar_stiffness(const TriGeom& g, double coeff) {
    Eigen::Matrix3d K;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            K(i, j) = coeff * g.area * dot(g.grad_l[i], g.grad_l[j]);
    return K;
}

void assemble_a(const CoupledSpaces& sp, const PhysicalParams& pr, Triplets& out) {
    const TriangleRule& rule = triangle_rule_degree5();
    const Mesh& mesh = *sp.mesh;

    // a_s = 2 rho nu (D(u), D(v)) over the fluid region
    for (int t : sp.velocity.tri_ids) {
        const TriGeom g = tri_geom(mesh, t);
        const auto& cd = sp.velocity.cell_dofs[t];
        const double scale = 2.0 * g.area;
        double local[12][12] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            Vec2 G[6];
            shape_gradients(2, l, g, G);
            const double w = rule.weights[q] * scale;
            for (int ki = 0; ki < 6; ++ki)
                for (int ci = 0; ci < 2; ++ci)
                    for (int kj = 0; kj < 6; ++kj)
                        for (int cj = 0; cj < 2; ++cj) {
                            double dd = G[ki][cj] * G[kj][ci];
                            if (ci == cj)
                                dd += dot(G[ki], G[kj]);
                            local[2 * ki + ci][2 * kj + cj] += w * pr.rho * pr.nu * dd;
                        }
        }
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                out.emplace_back(sp.off_u + cd[i], sp.off_u + cd[j], local[i][j]);
    }

    // a_d: gradient terms plus the mass-exchange coupling on the dual region
    const double cm = pr.k_m / pr.mu, cf = pr.k_f / pr.mu, cx = pr.sigma * pr.k_m / pr.mu;
    for (int t : sp.phi.tri_ids) {
        const TriGeom g = tri_geom(mesh, t);
        const auto& cd = sp.phi.cell_dofs[t];
        const double scale = 2.0 * g.area;
        double stiff[6][6] = {}, mass[6][6] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            Vec2 G[6];
            shape_values(2, l, N);
            shape_gradients(2, l, g, G);
            const double w = rule.weights[q] * scale;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    stiff[i][j] += w * dot(G[i], G[j]);
                    mass[i][j] += w * N[i] * N[j];
                }
        }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                out.emplace_back(sp.off_phim + cd[i], sp.off_phim + cd[j],
                                 cm * stiff[i][j] + cx * mass[i][j]);
                out.emplace_back(sp.off_phim + cd[i], sp.off_phif + cd[j], -cx * mass[i][j]);
                out.emplace_back(sp.off_phif + cd[i], sp.off_phim + cd[j], -cx * mass[i][j]);
                out.emplace_back(sp.off_phif + cd[i], sp.off_phif + cd[j],
                                 cf * stiff[i][j] + cx * mass[i][j]);
            }
    }

    // a_Gamma: pressure-velocity coupling (antisymmetric pair) and the BJS
    // tangential friction, on the interface edges
    const EdgeRule& erule = edge_rule_gauss(3);
    const double bjs = pr.bjs_coefficient();
    for (const auto& ge : sp.gamma) {
        const auto& cdu = sp.velocity.cell_dofs[ge.fluid_tri];
        const auto& cdp = sp.phi.cell_dofs[ge.dual_tri];
        double nu_phi[12][6] = {}; // <phi_f, v . n_s>
        double tt[12][12] = {};    // <u . tau, v . tau>
        for (std::size_t q = 0; q < erule.points.size(); ++q) {
            double lf[3], ld[3];
            edge_point_barycentric(*sp.mesh, ge.fluid_tri, ge.a, ge.b, erule.points[q], lf);
            edge_point_barycentric(*sp.mesh, ge.dual_tri, ge.a, ge.b, erule.points[q], ld);
            double Nu[6], Np[6];
            shape_values(2, lf, Nu);
            shape_values(2, ld, Np);
            const double w = erule.weights[q] * ge.length;
            for (int ki = 0; ki < 6; ++ki)
                for (int ci = 0; ci < 2; ++ci) {
                    const double vn = Nu[ki] * ge.normal_s[ci];
                    const double vt = Nu[ki] * ge.tangent[ci];
                    for (int j = 0; j < 6; ++j)
                        nu_phi[2 * ki + ci][j] += w * Np[j] * vn;
                    for (int kj = 0; kj < 6; ++kj)
                        for (int cj = 0; cj < 2; ++cj)
                            tt[2 * ki + ci][2 * kj + cj] +=
                                w * vt * Nu[kj] * ge.tangent[cj];
                }
        }
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 6; ++j) {
                out.emplace_back(sp.off_u + cdu[i], sp.off_phif + cdp[j], nu_phi[i][j]);
                out.emplace_back(sp.off_phif + cdp[j], sp.off_u + cdu[i], -nu_phi[i][j]);
            }
            for (int j = 0; j < 12; ++j)
                out.emplace_back(sp.off_u + cdu[i], sp.off_u + cdu[j], bjs * tt[i][j]);
        }
    }
}

void assemble_d(const CoupledSpaces& sp, const PhysicalParams& pr, Triplets& out) {
    const TriangleRule& rule = triangle_rule_degree5();
    for (int t : sp.velocity.tri_ids) {
        const TriGeom g = tri_geom(*sp.mesh, t);
        const auto& cdu = sp.velocity.cell_dofs[t];
        const auto& cdp = sp.pressure.cell_dofs[t];
        double local[12][3] = {}; // d(v_i, q_j) = -rho (div v_i, q_j)
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double Np[3];
            Vec2 G[6];
            shape_values(1, l, Np);
            shape_gradients(2, l, g, G);
            const double w = rule.weights[q] * 2.0 * g.area;
            for (int k = 0; k < 6; ++k)
                for (int c = 0; c < 2; ++c) {
                    const double div_v = G[k][c];
                    for (int j = 0; j < 3; ++j)
                        local[2 * k + c][j] -= w * pr.rho * div_v * Np[j];
                }
        }
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 3; ++j) {
                out.emplace_back(sp.off_u + cdu[i], sp.off_p + cdp[j], local[i][j]);
                out.emplace_back(sp.off_p + cdp[j], sp.off_u + cdu[i], -local[i][j]);
            }
    }
}

void assemble_b(const FeFunction& beta, const DofMap& vel, Triplets& out,
                int offset, double scale) {
    if (beta.dm != &vel)
        throw std::invalid_argument("assemble_b: beta not on the given velocity dofmap");
    const TriangleRule& rule = triangle_rule_degree5();
    for (int t : vel.tri_ids) {
        const TriGeom g = tri_geom(*vel.mesh, t);
        const auto& cd = vel.cell_dofs[t];
        double conv[6][6] = {}; // scalar part, diagonal in components
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            Vec2 G[6];
            shape_values(2, l, N);
            shape_gradients(2, l, g, G);
            const Vec2 b = eval_vector(beta, t, l);
            const Mat2 Jb = grad_vector(beta, t, l);
            const double divb = Jb.m[0][0] + Jb.m[1][1];
            const double w = rule.weights[q] * 2.0 * g.area;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    conv[i][j] += w * (dot(b, G[j]) + 0.5 * divb * N[j]) * N[i];
        }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c)
                    out.emplace_back(offset + cd[2 * i + c], offset + cd[2 * j + c],
                                     scale * conv[i][j]);
    }
}

void assemble_b_derivative(const FeFunction& u, const DofMap& vel, Triplets& out, int offset) {
    if (u.dm != &vel)
        throw std::invalid_argument("assemble_b_derivative: state not on the given dofmap");
    const TriangleRule& rule = triangle_rule_degree5();
    for (int t : vel.tri_ids) {
        const TriGeom g = tri_geom(*vel.mesh, t);
        const auto& cd = vel.cell_dofs[t];
        double local[12][12] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            Vec2 G[6];
            shape_values(2, l, N);
            shape_gradients(2, l, g, G);
            const Vec2 uval = eval_vector(u, t, l);
            const Mat2 Ju = grad_vector(u, t, l);
            const double w = rule.weights[q] * 2.0 * g.area;
            for (int ki = 0; ki < 6; ++ki)
                for (int ci = 0; ci < 2; ++ci)
                    for (int kj = 0; kj < 6; ++kj)
                        for (int cj = 0; cj < 2; ++cj) {
                            const double val = N[kj] * Ju.m[ci][cj] * N[ki] +
                                               0.5 * G[kj][cj] * uval[ci] * N[ki];
                            local[2 * ki + ci][2 * kj + cj] += w * val;
                        }
        }
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                out.emplace_back(offset + cd[i], offset + cd[j], local[i][j]);
    }
}

void assemble_epsilon_stiffness(const DofMap& vel, double coeff, Triplets& out, int offset) {
    const TriangleRule& rule = triangle_rule_degree5();
    const int ns = vel.spec.scalar_size();
    for (int t : vel.tri_ids) {
        const TriGeom g = tri_geom(*vel.mesh, t);
        const auto& cd = vel.cell_dofs[t];
        double local[12][12] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            Vec2 G[6];
            shape_gradients(vel.spec.degree, l, g, G);
            const double w = rule.weights[q] * 2.0 * g.area * coeff;
            for (int ki = 0; ki < ns; ++ki)
                for (int ci = 0; ci < 2; ++ci)
                    for (int kj = 0; kj < ns; ++kj)
                        for (int cj = 0; cj < 2; ++cj) {
                            double dd = G[ki][cj] * G[kj][ci];
                            if (ci == cj)
                                dd += dot(G[ki], G[kj]);
                            local[2 * ki + ci][2 * kj + cj] += w * dd;
                        }
        }
        for (int i = 0; i < 2 * ns; ++i)
            for (int j = 0; j < 2 * ns; ++j)
                out.emplace_back(offset + cd[i], offset + cd[j], local[i][j]);
    }
}

void assemble_divergence(const DofMap& vel, const DofMap& scal, Triplets& out,
                         int row_offset, int col_offset, double scale) {
    const TriangleRule& rule = triangle_rule_degree5();
    const int nv = vel.spec.scalar_size(), nq = scal.spec.scalar_size();
    for (int t : vel.tri_ids) {
        if (scal.cell_dofs[t][0] < 0)
            continue;
        const TriGeom g = tri_geom(*vel.mesh, t);
        const auto& cdu = vel.cell_dofs[t];
        const auto& cdq = scal.cell_dofs[t];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            Vec2 G[6];
            shape_values(scal.spec.degree, l, N);
            shape_gradients(vel.spec.degree, l, g, G);
            const double w = rule.weights[q] * 2.0 * g.area * scale;
            for (int k = 0; k < nv; ++k)
                for (int c = 0; c < 2; ++c)
                    for (int i = 0; i < nq; ++i)
                        out.emplace_back(row_offset + cdq[i], col_offset + cdu[2 * k + c],
                                         w * G[k][c] * N[i]);
        }
    }
}

void assemble_grad_stiffness(const DofMap& scal, double coeff, Triplets& out, int offset) {
    const TriangleRule& rule = triangle_rule_degree5();
    const int ns = scal.spec.scalar_size();
    for (int t : scal.tri_ids) {
        const TriGeom g = tri_geom(*scal.mesh, t);
        const auto& cd = scal.cell_dofs[t];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            Vec2 G[6];
            shape_gradients(scal.spec.degree, l, g, G);
            const double w = rule.weights[q] * 2.0 * g.area * coeff;
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < ns; ++j)
                    out.emplace_back(offset + cd[i], offset + cd[j], w * dot(G[i], G[j]));
        }
    }
}

void assemble_mass(const DofMap& scal, double coeff, Triplets& out, int offset) {
    const TriangleRule& rule = triangle_rule_degree5();
    const int ns = scal.spec.scalar_size();
    for (int t : scal.tri_ids) {
        const TriGeom g = tri_geom(*scal.mesh, t);
        const auto& cd = scal.cell_dofs[t];
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double N[6];
            shape_values(scal.spec.degree, l, N);
            const double w = rule.weights[q] * 2.0 * g.area * coeff;
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < ns; ++j)
                    out.emplace_back(offset + cd[i], offset + cd[j], w * N[i] * N[j]);
        }
    }
}

Eigen::VectorXd assemble_rhs(const CoupledSpaces& sp, const SourceSpec& src,
                             const PhysicalParams& pr) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.n_total);
    const TriangleRule& rule = triangle_rule_degree5();
    if (src.f_s) {
        for (int t : sp.velocity.tri_ids) {
            const TriGeom g = tri_geom(*sp.mesh, t);
            const auto& cd = sp.velocity.cell_dofs[t];
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double* l = rule.points[q].data();
                double N[6];
                shape_values(2, l, N);
                const Vec2 f = src.f_s(quad_point(g, l));
                const double w = rule.weights[q] * 2.0 * g.area;
                for (int k = 0; k < 6; ++k) {
                    rhs[sp.off_u + cd[2 * k]] += w * pr.rho * f.x * N[k];
                    rhs[sp.off_u + cd[2 * k + 1]] += w * pr.rho * f.y * N[k];
                }
            }
        }
    }
    if (src.f_d) {
        for (int t : sp.phi.tri_ids) {
            const TriGeom g = tri_geom(*sp.mesh, t);
            const auto& cd = sp.phi.cell_dofs[t];
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double* l = rule.points[q].data();
                double N[6];
                shape_values(2, l, N);
                const double f = src.f_d(quad_point(g, l));
                const double w = rule.weights[q] * 2.0 * g.area;
                for (int k = 0; k < 6; ++k)
                    rhs[sp.off_phif + cd[k]] += w * f * N[k];
            }
        }
    }
    return rhs;
}

BlockSystem build_system(const CoupledSpaces& sp, const PhysicalParams& pr,
                         const SourceSpec& src, const FeFunction* picard_beta) {
    Triplets trip;
    assemble_a(sp, pr, trip);
    assemble_d(sp, pr, trip);
    if (picard_beta)
        assemble_b(*picard_beta, sp.velocity, trip, sp.off_u);
    BlockSystem sys;
    sys.off_u = sp.off_u;
    sys.off_p = sp.off_p;
    sys.off_phim = sp.off_phim;
    sys.off_phif = sp.off_phif;
    sys.n = sp.n_total;
    sys.A.resize(sp.n_total, sp.n_total);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.rhs = assemble_rhs(sp, src, pr);
    return sys;
}

void eliminate_constraints(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& rhs,
                           const std::vector<char>& constrained,
                           const Eigen::VectorXd& values) {
    const int n = static_cast<int>(A.rows());
    // move boundary data to the right-hand side
    for (int col = 0; col < A.outerSize(); ++col) {
        if (!constrained[col])
            continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
            if (!constrained[it.row()])
                rhs[it.row()] -= it.value() * values[col];
    }
    Triplets trip;
    trip.reserve(A.nonZeros() + n);
    for (int col = 0; col < A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
            if (!constrained[it.row()] && !constrained[col])
                trip.emplace_back(it.row(), col, it.value());
    for (int d = 0; d < n; ++d)
        if (constrained[d]) {
            trip.emplace_back(d, d, 1.0);
            rhs[d] = values[d];
        }
    A.setZero();
    A.setFromTriplets(trip.begin(), trip.end());
}

void apply_dirichlet(BlockSystem& sys, const CoupledSpaces& sp) {
    eliminate_constraints(sys.A, sys.rhs, sp.constrained, sp.bc_values);
}

double interface_convection_integral(const FeFunction& beta, const FeFunction& v) {
    const DofMap& dm = *v.dm;
    const auto gamma = interface_geometry(*dm.mesh);
    const EdgeRule& rule = edge_rule_gauss(4); // |v|^2 (beta.n) has degree 6
    double acc = 0.0;
    for (const auto& ge : gamma) {
        const int t = dm.domain == Domain::Dual ? ge.dual_tri : ge.fluid_tri;
        if (dm.cell_dofs[t][0] < 0)
            continue;
        const Vec2 nrm = dm.domain == Domain::Dual ? -1.0 * ge.normal_s : ge.normal_s;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double l[3];
            edge_point_barycentric(*dm.mesh, t, ge.a, ge.b, rule.points[q], l);
            const Vec2 b = eval_vector(beta, t, l);
            const Vec2 u = eval_vector(v, t, l);
            acc += rule.weights[q] * ge.length * dot(b, nrm) * dot(u, u);
        }
    }
    return 0.5 * acc;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& A, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
    char buf[64];
    for (int col = 0; col < A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n",
                          static_cast<int>(it.row()) + 1, col + 1, it.value());
            os << buf;
        }
}

} // namespace dpns
