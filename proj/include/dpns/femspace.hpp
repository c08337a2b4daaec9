#pragma once

#include "dpns/mesh.hpp"
#include "dpns/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace dpns {

enum class Domain { Fluid, Dual, Both };

/// Lagrange element: degree 1 (3 scalar basis functions) or 2 (6), scalar
/// or 2-vector valued.
struct ElementSpec {
    int degree = 2;
    int arity = 1;
    int scalar_size() const { return degree == 1 ? 3 : 6; }
    int local_size() const { return scalar_size() * arity; }
};

/// (point, component) -> prescribed value on a Dirichlet boundary.
using BoundaryValueFn = std::function<double(Vec2, int)>;

/// Enumerates the scalar entities (vertices, and edge midpoints for P2) of
/// one subdomain; dof = entity * arity + component. Immutable once built.
struct DofMap {
    const Mesh* mesh = nullptr;
    ElementSpec spec;
    Domain domain = Domain::Both;

    std::vector<int> tri_ids;                 // triangles of the domain, ascending
    std::vector<int> vertex_entity;           // node id -> entity or -1
    std::map<std::pair<int, int>, int> edge_entity; // (min,max) -> entity
    int n_entities = 0;
    std::vector<Vec2> support_points;         // per entity
    std::vector<std::array<int, 12>> cell_dofs; // per mesh triangle, -1 outside

    std::vector<char> constrained;            // per dof
    Eigen::VectorXd prescribed;               // per dof, 0 where free

    int n_dofs() const { return n_entities * spec.arity; }
    int dof(int entity, int comp) const { return entity * spec.arity + comp; }
    bool in_domain(Region r) const {
        return domain == Domain::Both || (domain == Domain::Fluid) == (r == Region::Fluid);
    }
};

/// Builds the dof layout for one subdomain and marks Dirichlet-constrained
/// dofs (every dof supported on a closed tagged edge, interface endpoints
/// included) with interpolated boundary values. Requesting the Interface
/// tag throws unless allow_interface_dirichlet is set; only the auxiliary
/// problem constrains the interface.
DofMap build_dofmap(const Mesh& mesh, ElementSpec spec, Domain domain,
                    const std::vector<BoundaryTag>& dirichlet,
                    const BoundaryValueFn& value = {},
                    bool allow_interface_dirichlet = false);

struct FeFunction {
    const DofMap* dm = nullptr;
    Eigen::VectorXd coeffs;
};

FeFunction zero_function(const DofMap& dm);

/// Nodal Lagrange interpolation: coefficients are point values at the dof
/// support points; the identity on already-discrete inputs.
FeFunction interpolate(const std::function<double(Vec2, int)>& expr, const DofMap& dm);

enum class NormKind { L2, H1semi, Dseminorm, L2Gamma, L4Gamma };

/// Quadrature-exact norm evaluation (volume: degree-5 rule; interface:
/// Gauss rules matching the integrand degree).
double norms(const FeFunction& f, NormKind kind);

// --- element-level evaluation helpers -----------------------------------

struct TriGeom {
    Vec2 p[3];
    double area = 0.0;
    Vec2 grad_l[3]; // gradients of the barycentric coordinates
};

TriGeom tri_geom(const Mesh& m, int t);

void shape_values(int degree, const double l[3], double* out);
void shape_gradients(int degree, const double l[3], const TriGeom& g, Vec2* out);

struct Mat2 {
    double m[2][2] = {{0, 0}, {0, 0}}; // m[i][j] = d u_i / d x_j
};

double eval_scalar(const FeFunction& f, int tri, const double l[3]);
Vec2 grad_scalar(const FeFunction& f, int tri, const double l[3]);
Vec2 eval_vector(const FeFunction& f, int tri, const double l[3]);
Mat2 grad_vector(const FeFunction& f, int tri, const double l[3]);

/// Barycentric coordinates on triangle t of the point (1-s) a + s b for an
/// edge (a, b) of that triangle.
void edge_point_barycentric(const Mesh& m, int tri, int a, int b, double s, double l[3]);

// --- interface traces ----------------------------------------------------

/// Entities of the dofmap lying on Gamma, vertices first (ascending node
/// id) then edge midpoints (ascending edge key).
std::vector<int> interface_entities(const DofMap& dm);

/// Dof pairs (from, to) matched by entity identity and component; both maps
/// must live on the same mesh.
std::vector<std::pair<int, int>> interface_dof_pairs(const DofMap& from, const DofMap& to);

} // namespace dpns
