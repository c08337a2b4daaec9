#include "dpns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dpns {

namespace {

long long edge_key(int a, int b, long long n) {
    return static_cast<long long>(std::min(a, b)) * n + std::max(a, b);
}

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

double longest_edge(const Mesh& m, const Triangle& t) {
    double e = 0.0;
    for (int k = 0; k < 3; ++k)
        e = std::max(e, norm(m.nodes[t.v[(k + 1) % 3]] - m.nodes[t.v[k]]));
    return e;
}

} // namespace

double Mesh::tri_area(int t) const {
    const auto& v = triangles[t].v;
    return signed_area(nodes[v[0]], nodes[v[1]], nodes[v[2]]);
}

Vec2 Mesh::tri_centroid(int t) const {
    const auto& v = triangles[t].v;
    return (1.0 / 3.0) * (nodes[v[0]] + nodes[v[1]] + nodes[v[2]]);
}

Mesh build_two_domain_mesh(int nx, int ny, const RectStack& geo) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_two_domain_mesh: nx, ny must be >= 1");
    if (!(geo.x0 < geo.x1 && geo.y_bottom < geo.y_interface && geo.y_interface < geo.y_top))
        throw std::invalid_argument("build_two_domain_mesh: degenerate rectangle stack");

    Mesh m;
    m.geometry = geo;
    const int rows = 2 * ny;
    const double dx = (geo.x1 - geo.x0) / nx;
    const double dy_d = (geo.y_interface - geo.y_bottom) / ny;
    const double dy_s = (geo.y_top - geo.y_interface) / ny;

    auto node_id = [&](int i, int j) { return j * (nx + 1) + i; };
    m.nodes.reserve((nx + 1) * (rows + 1));
    for (int j = 0; j <= rows; ++j) {
        const double y = j <= ny ? geo.y_bottom + j * dy_d
                                 : geo.y_interface + (j - ny) * dy_s;
        for (int i = 0; i <= nx; ++i)
            m.nodes.push_back({geo.x0 + i * dx, y});
    }

    m.triangles.reserve(2 * nx * rows);
    for (int j = 0; j < rows; ++j) {
        const Region reg = j < ny ? Region::Dual : Region::Fluid;
        for (int i = 0; i < nx; ++i) {
            const int n00 = node_id(i, j), n10 = node_id(i + 1, j);
            const int n01 = node_id(i, j + 1), n11 = node_id(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                m.triangles.push_back({{n00, n10, n11}, reg});
                m.triangles.push_back({{n00, n11, n01}, reg});
            } else {
                m.triangles.push_back({{n00, n10, n01}, reg});
                m.triangles.push_back({{n10, n11, n01}, reg});
            }
        }
    }

    for (int i = 0; i < nx; ++i) {
        m.boundary_edges.push_back({node_id(i, 0), node_id(i + 1, 0), BoundaryTag::GammaD});
        m.boundary_edges.push_back({node_id(i, rows), node_id(i + 1, rows), BoundaryTag::GammaS});
        m.boundary_edges.push_back({node_id(i, ny), node_id(i + 1, ny), BoundaryTag::Interface});
    }
    for (int j = 0; j < rows; ++j) {
        const BoundaryTag tag = j < ny ? BoundaryTag::GammaD : BoundaryTag::GammaS;
        m.boundary_edges.push_back({node_id(0, j), node_id(0, j + 1), tag});
        m.boundary_edges.push_back({node_id(nx, j), node_id(nx, j + 1), tag});
    }

    for (const auto& t : m.triangles)
        m.h = std::max(m.h, longest_edge(m, t));
    return m;
}

Mesh refine_uniform(const Mesh& coarse) {
    Mesh m;
    m.geometry = coarse.geometry;
    m.nodes = coarse.nodes;

    const long long n0 = static_cast<long long>(coarse.nodes.size());
    std::map<long long, int> midpoint;
    auto mid = [&](int a, int b) {
        const long long key = edge_key(a, b, n0);
        auto it = midpoint.find(key);
        if (it != midpoint.end())
            return it->second;
        const int id = static_cast<int>(m.nodes.size());
        m.nodes.push_back(0.5 * (coarse.nodes[a] + coarse.nodes[b]));
        midpoint.emplace(key, id);
        return id;
    };

    m.triangles.reserve(4 * coarse.triangles.size());
    for (const auto& t : coarse.triangles) {
        const int a = t.v[0], b = t.v[1], c = t.v[2];
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        m.triangles.push_back({{a, ab, ca}, t.region});
        m.triangles.push_back({{ab, b, bc}, t.region});
        m.triangles.push_back({{ca, bc, c}, t.region});
        m.triangles.push_back({{ab, bc, ca}, t.region});
    }

    m.boundary_edges.reserve(2 * coarse.boundary_edges.size());
    for (const auto& e : coarse.boundary_edges) {
        const int ab = mid(e.a, e.b);
        m.boundary_edges.push_back({e.a, ab, e.tag});
        m.boundary_edges.push_back({ab, e.b, e.tag});
    }

    for (const auto& t : m.triangles)
        m.h = std::max(m.h, longest_edge(m, t));
    return m;
}

std::vector<InterfaceEdge> interface_geometry(const Mesh& m) {
    const long long n = static_cast<long long>(m.nodes.size());
    std::map<long long, std::vector<int>> edge_tris;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        const auto& v = m.triangles[t].v;
        for (int k = 0; k < 3; ++k)
            edge_tris[edge_key(v[k], v[(k + 1) % 3], n)].push_back(t);
    }

    std::vector<InterfaceEdge> gamma;
    for (const auto& be : m.boundary_edges) {
        if (be.tag != BoundaryTag::Interface)
            continue;
        InterfaceEdge g;
        g.a = be.a;
        g.b = be.b;
        auto it = edge_tris.find(edge_key(be.a, be.b, n));
        if (it == edge_tris.end() || it->second.size() != 2)
            throw std::runtime_error("interface_geometry: interface edge not shared by two triangles");
        for (int t : it->second) {
            if (m.triangles[t].region == Region::Fluid)
                g.fluid_tri = t;
            else
                g.dual_tri = t;
        }
        if (g.fluid_tri < 0 || g.dual_tri < 0)
            throw std::runtime_error("interface_geometry: interface edge not between regions");

        const Vec2 e = m.nodes[g.b] - m.nodes[g.a];
        g.length = norm(e);
        Vec2 nrm{e.y / g.length, -e.x / g.length};
        const Vec2 mid = 0.5 * (m.nodes[g.a] + m.nodes[g.b]);
        if (dot(nrm, m.tri_centroid(g.dual_tri) - mid) < 0.0)
            nrm = -1.0 * nrm;
        g.normal_s = nrm;
        g.tangent = perp(nrm);
        gamma.push_back(g);
    }
    return gamma;
}

MeshReport validate(const Mesh& m) {
    MeshReport rep;
    auto fail = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

    const long long n = static_cast<long long>(m.nodes.size());
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        if (m.tri_area(t) <= 0.0)
            fail("negative area: triangle " + std::to_string(t));
        for (int k = 0; k < 3; ++k) {
            const int v = m.triangles[t].v[k];
            if (v < 0 || v >= static_cast<int>(m.nodes.size()))
                fail("node index out of range: triangle " + std::to_string(t));
        }
    }

    std::map<long long, std::vector<int>> edge_tris;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        const auto& v = m.triangles[t].v;
        for (int k = 0; k < 3; ++k)
            edge_tris[edge_key(v[k], v[(k + 1) % 3], n)].push_back(t);
    }

    std::map<long long, BoundaryTag> tagged;
    for (const auto& be : m.boundary_edges) {
        const long long key = edge_key(be.a, be.b, n);
        if (tagged.count(key))
            fail("duplicate boundary tag on edge (" + std::to_string(be.a) + "," + std::to_string(be.b) + ")");
        tagged[key] = be.tag;
        if (!edge_tris.count(key))
            fail("tagged edge not in mesh: (" + std::to_string(be.a) + "," + std::to_string(be.b) + ")");
    }

    for (const auto& [key, tris] : edge_tris) {
        const int a = static_cast<int>(key / n), b = static_cast<int>(key % n);
        const auto label = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
        if (tris.size() == 1) {
            // true boundary edge: must carry the wall tag of its region
            auto it = tagged.find(key);
            if (it == tagged.end()) {
                fail("boundary edge untagged: " + label);
                continue;
            }
            const Region reg = m.triangles[tris[0]].region;
            const BoundaryTag want = reg == Region::Fluid ? BoundaryTag::GammaS : BoundaryTag::GammaD;
            if (it->second != want)
                fail("wrong wall tag on edge " + label);
        } else if (tris.size() == 2) {
            const Region r0 = m.triangles[tris[0]].region;
            const Region r1 = m.triangles[tris[1]].region;
            auto it = tagged.find(key);
            if (r0 != r1) {
                if (it == tagged.end() || it->second != BoundaryTag::Interface)
                    fail("interface edge untagged: " + label);
            } else if (it != tagged.end()) {
                fail("interior edge carries boundary tag: " + label);
            }
        } else {
            fail("edge shared by more than two triangles: " + label);
        }
    }

    double hmax = 0.0;
    for (const auto& t : m.triangles)
        hmax = std::max(hmax, longest_edge(m, t));
    if (!(std::abs(hmax - m.h) <= 1e-12 * std::max(1.0, hmax)))
        fail("h does not equal the maximum longest edge");

    return rep;
}

} // namespace dpns
