#pragma once

#include "dpns/femspace.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dpns {

struct VtkField {
    std::string name;
    const FeFunction* fn = nullptr;
};

/// Legacy ASCII VTK unstructured grid: triangles with region tags as
/// CELL_DATA, fields sampled at mesh vertices as POINT_DATA (vertex part
/// of P2 fields; zero where a field's subdomain does not reach).
void write_vtk(const Mesh& m, const std::vector<VtkField>& fields, std::ostream& os);

} // namespace dpns
