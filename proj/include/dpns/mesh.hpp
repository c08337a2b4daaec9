#pragma once

#include "dpns/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace dpns {

enum class Region { Fluid, Dual };
enum class BoundaryTag { GammaS, GammaD, Interface };

struct Triangle {
    std::array<int, 3> v{}; // counterclockwise
    Region region = Region::Fluid;
};

struct BoundaryEdge {
    int a = 0, b = 0;
    BoundaryTag tag = BoundaryTag::GammaS;
};

/// Axis-aligned two-rectangle stack: fluid region on top of the
/// dual-porosity region, separated by the flat horizontal interface.
struct RectStack {
    double x0 = 0.0, x1 = 1.0;
    double y_bottom = 0.0, y_interface = 1.0, y_top = 2.0;
};

/// Matched triangulation of both subdomains. Nodes on the interface are
/// shared by the fluid and dual meshes; immutable after construction.
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    double h = 0.0;
    RectStack geometry;

    double tri_area(int t) const;
    Vec2 tri_centroid(int t) const;
};

/// Per-edge interface metadata. n_s points from the fluid side into the
/// dual side, tau = perp(n_s).
struct InterfaceEdge {
    int a = 0, b = 0; // node ids
    Vec2 normal_s;
    Vec2 tangent;
    double length = 0.0;
    int fluid_tri = -1;
    int dual_tri = -1;
};

/// Structured alternating-diagonal triangulation, 2*nx*ny triangles per
/// subdomain; throws std::invalid_argument for nonpositive counts.
Mesh build_two_domain_mesh(int nx, int ny, const RectStack& geo = {});

/// Red refinement: every triangle into 4 congruent children, tags
/// inherited, h exactly halved.
Mesh refine_uniform(const Mesh& m);

struct MeshReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

MeshReport validate(const Mesh& m);

std::vector<InterfaceEdge> interface_geometry(const Mesh& m);

} // namespace dpns
