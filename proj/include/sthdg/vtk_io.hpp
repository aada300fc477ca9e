#ifndef STHDG_VTK_IO_HPP
#define STHDG_VTK_IO_HPP

#include <string>

#include "sthdg/forms.hpp"

namespace sthdg {

/// Writes one slab's solution as a legacy ASCII VTK unstructured grid.
/// Every space-time cell is subdivided once (corner + edge-midpoint samples,
/// eight sub-tetrahedra) so the quadratic part of the fields is visible;
/// points are duplicated per cell because the fields are discontinuous.
/// Coordinates are (x, y, t); velocity is written as a 3-vector with zero
/// third component.
void write_slab_vtk(const SlabMesh& mesh, const DofLayout& layout,
                    const ReferenceTables& ref, const SlabState& state,
                    const std::string& path);

}  // namespace sthdg

#endif  // STHDG_VTK_IO_HPP
