#pragma once

#include "dpns/assembly.hpp"

#include <functional>
#include <string>

namespace dpns {

/// Closed-form exact fields with first derivatives and the matching
/// forcing terms (see scripts/gen_manufactured.py).
struct ManufacturedFields {
    std::function<double(double, double)> ux, uy, p, phi_m, phi_f;
    std::function<double(double, double)> fs_x, fs_y, fd;
    std::function<double(double, double)> dux_dx, dux_dy, duy_dx, duy_dy;
    std::function<double(double, double)> dphim_dx, dphim_dy, dphif_dx, dphif_dy;
};

ManufacturedFields make_trig_fields(const PhysicalParams& pr);
ManufacturedFields make_poly_fields(const PhysicalParams& pr);

struct ManufacturedCase {
    std::string name;
    bool homogeneous = true; // zero essential boundary data
    ManufacturedFields f;

    /// Forcing (and, for inhomogeneous cases, Dirichlet data), optionally
    /// scaled; scaling changes the data, not the exact solution.
    SourceSpec sources(double scale = 1.0) const;
};

/// Trigonometric fields vanishing on the outer walls; every interface
/// condition holds identically.
ManufacturedCase trig_case(const PhysicalParams& pr);

/// Quadratic velocity / linear pressure / quadratic dual pressures inside
/// the discrete spaces, with nonzero Dirichlet traces on the outer walls.
ManufacturedCase poly_case(const PhysicalParams& pr);

} // namespace dpns
