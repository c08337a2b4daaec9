#include "dpns/vtk_io.hpp"

#include <cstdio>
#include <ostream>

namespace dpns {

void write_vtk(const Mesh& m, const std::vector<VtkField>& fields, std::ostream& os) {
    char buf[128];
    os << "# vtk DataFile Version 3.0\n";
    os << "dpns fields\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.nodes.size() << " double\n";
    for (const auto& p : m.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
        os << buf;
    }
    os << "CELLS " << m.triangles.size() << " " << 4 * m.triangles.size() << "\n";
    for (const auto& t : m.triangles)
        os << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    os << "CELL_TYPES " << m.triangles.size() << "\n";
    for (std::size_t i = 0; i < m.triangles.size(); ++i)
        os << "5\n";
    os << "CELL_DATA " << m.triangles.size() << "\n";
    os << "SCALARS region int 1\nLOOKUP_TABLE default\n";
    for (const auto& t : m.triangles)
        os << (t.region == Region::Fluid ? 0 : 1) << "\n";

    if (fields.empty())
        return;
    os << "POINT_DATA " << m.nodes.size() << "\n";
    for (const auto& f : fields) {
        const DofMap& dm = *f.fn->dm;
        if (dm.spec.arity == 1) {
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (std::size_t n = 0; n < m.nodes.size(); ++n) {
                const int ent = dm.vertex_entity[n];
                std::snprintf(buf, sizeof buf, "%.17g\n",
                              ent >= 0 ? f.fn->coeffs[dm.dof(ent, 0)] : 0.0);
                os << buf;
            }
        } else {
            os << "VECTORS " << f.name << " double\n";
            for (std::size_t n = 0; n < m.nodes.size(); ++n) {
                const int ent = dm.vertex_entity[n];
                const double vx = ent >= 0 ? f.fn->coeffs[dm.dof(ent, 0)] : 0.0;
                const double vy = ent >= 0 ? f.fn->coeffs[dm.dof(ent, 1)] : 0.0;
                std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", vx, vy);
                os << buf;
            }
        }
    }
}

} // namespace dpns
