#include "dpns/femspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpns {

namespace {

// local scalar ordering: vertices 0,1,2 then (for P2) edges (0,1),(1,2),(2,0)
constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};

std::pair<int, int> ekey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace

TriGeom tri_geom(const Mesh& m, int t) {
    TriGeom g;
    const auto& v = m.triangles[t].v;
    for (int k = 0; k < 3; ++k)
        g.p[k] = m.nodes[v[k]];
    const double twoA = (g.p[1].x - g.p[0].x) * (g.p[2].y - g.p[0].y) -
                        (g.p[2].x - g.p[0].x) * (g.p[1].y - g.p[0].y);
    g.area = 0.5 * twoA;
    // grad l_k is the inward-scaled normal of the opposite edge
    for (int k = 0; k < 3; ++k) {
        const Vec2 a = g.p[(k + 1) % 3], b = g.p[(k + 2) % 3];
        g.grad_l[k] = {(a.y - b.y) / twoA, (b.x - a.x) / twoA};
    }
    return g;
}

void shape_values(int degree, const double l[3], double* out) {
    if (degree == 1) {
        out[0] = l[0];
        out[1] = l[1];
        out[2] = l[2];
        return;
    }
    for (int k = 0; k < 3; ++k)
        out[k] = l[k] * (2.0 * l[k] - 1.0);
    for (int e = 0; e < 3; ++e)
        out[3 + e] = 4.0 * l[kEdgeVerts[e][0]] * l[kEdgeVerts[e][1]];
}

void shape_gradients(int degree, const double l[3], const TriGeom& g, Vec2* out) {
    if (degree == 1) {
        for (int k = 0; k < 3; ++k)
            out[k] = g.grad_l[k];
        return;
    }
    for (int k = 0; k < 3; ++k)
        out[k] = (4.0 * l[k] - 1.0) * g.grad_l[k];
    for (int e = 0; e < 3; ++e) {
        const int i = kEdgeVerts[e][0], j = kEdgeVerts[e][1];
        out[3 + e] = 4.0 * (l[j] * g.grad_l[i] + l[i] * g.grad_l[j]);
    }
}

DofMap build_dofmap(const Mesh& mesh, ElementSpec spec, Domain domain,
                    const std::vector<BoundaryTag>& dirichlet,
                    const BoundaryValueFn& value, bool allow_interface_dirichlet) {
    if (spec.degree != 1 && spec.degree != 2)
        throw std::invalid_argument("build_dofmap: degree must be 1 or 2");
    if (spec.arity != 1 && spec.arity != 2)
        throw std::invalid_argument("build_dofmap: arity must be 1 or 2");
    for (BoundaryTag tag : dirichlet)
        if (tag == BoundaryTag::Interface && !allow_interface_dirichlet)
            throw std::invalid_argument(
                "build_dofmap: interface conditions are natural, not essential");

    DofMap dm;
    dm.mesh = &mesh;
    dm.spec = spec;
    dm.domain = domain;

    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        if (dm.in_domain(mesh.triangles[t].region))
            dm.tri_ids.push_back(t);

    // vertices of the domain, ascending node id
    dm.vertex_entity.assign(mesh.nodes.size(), -1);
    std::vector<char> used(mesh.nodes.size(), 0);
    for (int t : dm.tri_ids)
        for (int v : mesh.triangles[t].v)
            used[v] = 1;
    for (int n = 0; n < static_cast<int>(mesh.nodes.size()); ++n)
        if (used[n]) {
            dm.vertex_entity[n] = dm.n_entities++;
            dm.support_points.push_back(mesh.nodes[n]);
        }

    // edge midpoints for P2, ascending (min,max) key
    if (spec.degree == 2) {
        for (int t : dm.tri_ids) {
            const auto& v = mesh.triangles[t].v;
            for (auto [i, j] : kEdgeVerts)
                dm.edge_entity.emplace(ekey(v[i], v[j]), -1);
        }
        for (auto& [key, ent] : dm.edge_entity) {
            ent = dm.n_entities++;
            dm.support_points.push_back(0.5 * (mesh.nodes[key.first] + mesh.nodes[key.second]));
        }
    }

    dm.cell_dofs.assign(mesh.triangles.size(), {});
    for (auto& cd : dm.cell_dofs)
        cd.fill(-1);
    for (int t : dm.tri_ids) {
        const auto& v = mesh.triangles[t].v;
        auto& cd = dm.cell_dofs[t];
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < spec.arity; ++c)
                cd[k * spec.arity + c] = dm.dof(dm.vertex_entity[v[k]], c);
        if (spec.degree == 2)
            for (int e = 0; e < 3; ++e) {
                const int ent = dm.edge_entity.at(ekey(v[kEdgeVerts[e][0]], v[kEdgeVerts[e][1]]));
                for (int c = 0; c < spec.arity; ++c)
                    cd[(3 + e) * spec.arity + c] = dm.dof(ent, c);
            }
    }

    dm.constrained.assign(dm.n_dofs(), 0);
    dm.prescribed = Eigen::VectorXd::Zero(dm.n_dofs());
    auto constrain_entity = [&](int ent) {
        for (int c = 0; c < spec.arity; ++c) {
            const int d = dm.dof(ent, c);
            dm.constrained[d] = 1;
            dm.prescribed[d] = value ? value(dm.support_points[ent], c) : 0.0;
        }
    };
    for (const auto& be : mesh.boundary_edges) {
        if (std::find(dirichlet.begin(), dirichlet.end(), be.tag) == dirichlet.end())
            continue;
        // all dofs supported on the closed edge, endpoints included
        if (dm.vertex_entity[be.a] >= 0)
            constrain_entity(dm.vertex_entity[be.a]);
        if (dm.vertex_entity[be.b] >= 0)
            constrain_entity(dm.vertex_entity[be.b]);
        if (spec.degree == 2) {
            auto it = dm.edge_entity.find(ekey(be.a, be.b));
            if (it != dm.edge_entity.end())
                constrain_entity(it->second);
        }
    }
    return dm;
}

FeFunction zero_function(const DofMap& dm) {
    return {&dm, Eigen::VectorXd::Zero(dm.n_dofs())};
}

FeFunction interpolate(const std::function<double(Vec2, int)>& expr, const DofMap& dm) {
    FeFunction f{&dm, Eigen::VectorXd::Zero(dm.n_dofs())};
    for (int ent = 0; ent < dm.n_entities; ++ent)
        for (int c = 0; c < dm.spec.arity; ++c)
            f.coeffs[dm.dof(ent, c)] = expr(dm.support_points[ent], c);
    return f;
}

double eval_scalar(const FeFunction& f, int tri, const double l[3]) {
    const auto& dm = *f.dm;
    double N[6];
    shape_values(dm.spec.degree, l, N);
    double v = 0.0;
    const auto& cd = dm.cell_dofs[tri];
    for (int k = 0; k < dm.spec.scalar_size(); ++k)
        v += f.coeffs[cd[k]] * N[k];
    return v;
}

Vec2 grad_scalar(const FeFunction& f, int tri, const double l[3]) {
    const auto& dm = *f.dm;
    const TriGeom g = tri_geom(*dm.mesh, tri);
    Vec2 G[6];
    shape_gradients(dm.spec.degree, l, g, G);
    Vec2 v{0, 0};
    const auto& cd = dm.cell_dofs[tri];
    for (int k = 0; k < dm.spec.scalar_size(); ++k)
        v = v + f.coeffs[cd[k]] * G[k];
    return v;
}

Vec2 eval_vector(const FeFunction& f, int tri, const double l[3]) {
    const auto& dm = *f.dm;
    double N[6];
    shape_values(dm.spec.degree, l, N);
    Vec2 v{0, 0};
    const auto& cd = dm.cell_dofs[tri];
    for (int k = 0; k < dm.spec.scalar_size(); ++k) {
        v.x += f.coeffs[cd[2 * k]] * N[k];
        v.y += f.coeffs[cd[2 * k + 1]] * N[k];
    }
    return v;
}

Mat2 grad_vector(const FeFunction& f, int tri, const double l[3]) {
    const auto& dm = *f.dm;
    const TriGeom g = tri_geom(*dm.mesh, tri);
    Vec2 G[6];
    shape_gradients(dm.spec.degree, l, g, G);
    Mat2 J;
    const auto& cd = dm.cell_dofs[tri];
    for (int k = 0; k < dm.spec.scalar_size(); ++k) {
        const double cx = f.coeffs[cd[2 * k]], cy = f.coeffs[cd[2 * k + 1]];
        J.m[0][0] += cx * G[k].x;
        J.m[0][1] += cx * G[k].y;
        J.m[1][0] += cy * G[k].x;
        J.m[1][1] += cy * G[k].y;
    }
    return J;
}

void edge_point_barycentric(const Mesh& m, int tri, int a, int b, double s, double l[3]) {
    const auto& v = m.triangles[tri].v;
    l[0] = l[1] = l[2] = 0.0;
    int ia = -1, ib = -1;
    for (int k = 0; k < 3; ++k) {
        if (v[k] == a) ia = k;
        if (v[k] == b) ib = k;
    }
    if (ia < 0 || ib < 0)
        throw std::invalid_argument("edge_point_barycentric: edge not on triangle");
    l[ia] = 1.0 - s;
    l[ib] = s;
}

namespace {

double volume_norm(const FeFunction& f, NormKind kind) {
    const auto& dm = *f.dm;
    const TriangleRule& rule = triangle_rule_degree5();
    double acc = 0.0;
    for (int t : dm.tri_ids) {
        const double area = dm.mesh->tri_area(t);
        double cell = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double* l = rule.points[q].data();
            double val = 0.0;
            if (kind == NormKind::L2) {
                if (dm.spec.arity == 1) {
                    const double u = eval_scalar(f, t, l);
                    val = u * u;
                } else {
                    const Vec2 u = eval_vector(f, t, l);
                    val = dot(u, u);
                }
            } else if (kind == NormKind::H1semi) {
                if (dm.spec.arity == 1) {
                    const Vec2 g = grad_scalar(f, t, l);
                    val = dot(g, g);
                } else {
                    const Mat2 J = grad_vector(f, t, l);
                    val = J.m[0][0] * J.m[0][0] + J.m[0][1] * J.m[0][1] +
                          J.m[1][0] * J.m[1][0] + J.m[1][1] * J.m[1][1];
                }
            } else { // Dseminorm
                const Mat2 J = grad_vector(f, t, l);
                const double d01 = 0.5 * (J.m[0][1] + J.m[1][0]);
                val = J.m[0][0] * J.m[0][0] + J.m[1][1] * J.m[1][1] + 2.0 * d01 * d01;
            }
            cell += rule.weights[q] * val;
        }
        acc += cell * (area / 0.5);
    }
    return std::sqrt(acc);
}

double gamma_norm(const FeFunction& f, NormKind kind) {
    const auto& dm = *f.dm;
    const auto gamma = interface_geometry(*dm.mesh);
    // pick the triangle on this dofmap's side of Gamma
    bool any = false;
    const EdgeRule& rule = edge_rule_gauss(kind == NormKind::L4Gamma ? 5 : 3);
    double acc = 0.0;
    for (const auto& ge : gamma) {
        const int t = dm.domain == Domain::Dual ? ge.dual_tri : ge.fluid_tri;
        if (dm.cell_dofs[t][0] < 0)
            continue;
        any = true;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double l[3];
            edge_point_barycentric(*dm.mesh, t, ge.a, ge.b, rule.points[q], l);
            double v2;
            if (dm.spec.arity == 1) {
                const double u = eval_scalar(f, t, l);
                v2 = u * u;
            } else {
                const Vec2 u = eval_vector(f, t, l);
                v2 = dot(u, u);
            }
            acc += rule.weights[q] * ge.length * (kind == NormKind::L4Gamma ? v2 * v2 : v2);
        }
    }
    if (!any)
        throw std::invalid_argument("norms: function has no interface dofs");
    return kind == NormKind::L4Gamma ? std::pow(acc, 0.25) : std::sqrt(acc);
}

} // namespace

double norms(const FeFunction& f, NormKind kind) {
    if (kind == NormKind::Dseminorm && f.dm->spec.arity != 2)
        throw std::invalid_argument("norms: Dseminorm requires a vector field");
    switch (kind) {
    case NormKind::L2:
    case NormKind::H1semi:
    case NormKind::Dseminorm:
        return volume_norm(f, kind);
    case NormKind::L2Gamma:
    case NormKind::L4Gamma:
        return gamma_norm(f, kind);
    }
    return 0.0;
}

std::vector<int> interface_entities(const DofMap& dm) {
    std::vector<int> verts;
    std::vector<int> edges;
    for (const auto& be : dm.mesh->boundary_edges) {
        if (be.tag != BoundaryTag::Interface)
            continue;
        if (dm.vertex_entity[be.a] >= 0)
            verts.push_back(be.a);
        if (dm.vertex_entity[be.b] >= 0)
            verts.push_back(be.b);
        if (dm.spec.degree == 2) {
            auto it = dm.edge_entity.find(ekey(be.a, be.b));
            if (it != dm.edge_entity.end())
                edges.push_back(it->second);
        }
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    std::vector<int> ents;
    ents.reserve(verts.size() + edges.size());
    for (int n : verts)
        ents.push_back(dm.vertex_entity[n]);
    std::sort(edges.begin(), edges.end());
    for (int e : edges)
        ents.push_back(e);
    return ents;
}

std::vector<std::pair<int, int>> interface_dof_pairs(const DofMap& from, const DofMap& to) {
    if (from.mesh != to.mesh)
        throw std::invalid_argument("interface_dof_pairs: maps on different meshes");
    if (from.spec.degree != to.spec.degree || from.spec.arity != to.spec.arity)
        throw std::invalid_argument("interface_dof_pairs: element specs differ");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& be : from.mesh->boundary_edges) {
        if (be.tag != BoundaryTag::Interface)
            continue;
        auto add_entity = [&](int ea, int eb) {
            for (int c = 0; c < from.spec.arity; ++c)
                pairs.emplace_back(from.dof(ea, c), to.dof(eb, c));
        };
        for (int n : {be.a, be.b})
            if (from.vertex_entity[n] >= 0 && to.vertex_entity[n] >= 0)
                add_entity(from.vertex_entity[n], to.vertex_entity[n]);
        if (from.spec.degree == 2) {
            auto ia = from.edge_entity.find(ekey(be.a, be.b));
            auto ib = to.edge_entity.find(ekey(be.a, be.b));
            if (ia != from.edge_entity.end() && ib != to.edge_entity.end())
                add_entity(ia->second, ib->second);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

} // namespace dpns
