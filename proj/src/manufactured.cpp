#include "dpns/manufactured.hpp"

#include <cmath>

#ifndef M_PI
#define M_PI 3.14159265358979323846
#endif

namespace dpns {

#include "manufactured_fields.inc"

ManufacturedFields make_trig_fields(const PhysicalParams& pr) { return make_trig_fields_impl(pr); }
ManufacturedFields make_poly_fields(const PhysicalParams& pr) { return make_poly_fields_impl(pr); }

SourceSpec ManufacturedCase::sources(double scale) const {
    SourceSpec s;
    const ManufacturedFields ff = f;
    s.f_s = [ff, scale](Vec2 p) {
        return Vec2{scale * ff.fs_x(p.x, p.y), scale * ff.fs_y(p.x, p.y)};
    };
    s.f_d = [ff, scale](Vec2 p) { return scale * ff.fd(p.x, p.y); };
    if (!homogeneous) {
        s.u_dirichlet = [ff, scale](Vec2 p, int c) {
            return scale * (c == 0 ? ff.ux(p.x, p.y) : ff.uy(p.x, p.y));
        };
        s.phi_m_dirichlet = [ff, scale](Vec2 p) { return scale * ff.phi_m(p.x, p.y); };
        s.phi_f_dirichlet = [ff, scale](Vec2 p) { return scale * ff.phi_f(p.x, p.y); };
    }
    return s;
}

ManufacturedCase trig_case(const PhysicalParams& pr) {
    return {"trig", true, make_trig_fields(pr)};
}

ManufacturedCase poly_case(const PhysicalParams& pr) {
    return {"poly", false, make_poly_fields(pr)};
}

} // namespace dpns
