#pragma once

#include <array>
#include <vector>

namespace dpns {

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)} in barycentric
/// coordinates. Weights sum to the reference measure 1/2, so an integral
/// over a physical triangle K is  (area_K / 0.5) * sum_i w_i f(p_i).
struct TriangleRule {
    std::vector<std::array<double, 3>> points; // (l1, l2, l3)
    std::vector<double> weights;
    int exactness = 0;
};

/// Midpoint-degree rules used by the assembly kernels.
const TriangleRule& triangle_rule_degree2(); // 3 points
const TriangleRule& triangle_rule_degree5(); // 7 points, default everywhere

/// Gauss-Legendre on [0,1]; weights sum to 1. n in {2,3,4,5},
/// exact for polynomials of degree 2n-1.
struct EdgeRule {
    std::vector<double> points;
    std::vector<double> weights;
    int exactness = 0;
};

const EdgeRule& edge_rule_gauss(int npoints);

} // namespace dpns
