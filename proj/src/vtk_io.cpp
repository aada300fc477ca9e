#include "sthdg/vtk_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "sthdg/errors.hpp"

namespace sthdg {

void write_slab_vtk(const SlabMesh& mesh, const DofLayout& layout,
                    const ReferenceTables& ref, const SlabState& state,
                    const std::string& path) {
  // Reference sample points: 4 corners and 6 edge midpoints.
  Eigen::MatrixXd pts(10, 3);
  pts.row(0) << 0, 0, 0;
  pts.row(1) << 1, 0, 0;
  pts.row(2) << 0, 1, 0;
  pts.row(3) << 0, 0, 1;
  pts.row(4) << 0.5, 0, 0;    // edge 0-1
  pts.row(5) << 0, 0.5, 0;    // edge 0-2
  pts.row(6) << 0, 0, 0.5;    // edge 0-3
  pts.row(7) << 0.5, 0.5, 0;  // edge 1-2
  pts.row(8) << 0.5, 0, 0.5;  // edge 1-3
  pts.row(9) << 0, 0.5, 0.5;  // edge 2-3
  static constexpr std::array<std::array<int, 4>, 8> kSubTets = {{{0, 4, 5, 6},
                                                                  {4, 1, 7, 8},
                                                                  {5, 7, 2, 9},
                                                                  {6, 8, 9, 3},
                                                                  {4, 5, 6, 8},
                                                                  {4, 5, 7, 8},
                                                                  {5, 6, 8, 9},
                                                                  {5, 7, 8, 9}}};

  const Eigen::MatrixXd Phi = ref.b3.values(pts);
  const int n3 = layout.n3;
  const int n3p = layout.n3p;
  const int nc = mesh.num_cells();

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  char buf[256];

  out << "# vtk DataFile Version 3.0\n";
  out << "space-time slab t in [" << mesh.t0 << ", " << mesh.t1 << "]\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << 10 * nc << " double\n";
  for (int c = 0; c < nc; ++c) {
    const AffineMap& map = mesh.cell_maps[c];
    for (int i = 0; i < 10; ++i) {
      const Eigen::Vector3d X = map.apply(pts.row(i).transpose());
      std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", X[0], X[1], X[2]);
      out << buf;
    }
  }

  out << "CELLS " << 8 * nc << " " << 8 * nc * 5 << "\n";
  for (int c = 0; c < nc; ++c)
    for (const auto& tet : kSubTets)
      out << "4 " << 10 * c + tet[0] << " " << 10 * c + tet[1] << " " << 10 * c + tet[2]
          << " " << 10 * c + tet[3] << "\n";

  out << "CELL_TYPES " << 8 * nc << "\n";
  for (int i = 0; i < 8 * nc; ++i) out << "10\n";

  out << "POINT_DATA " << 10 * nc << "\n";
  out << "VECTORS velocity double\n";
  for (int c = 0; c < nc; ++c) {
    const Eigen::VectorXd ux = Phi * state.cell.row(c).segment(0, n3).transpose();
    const Eigen::VectorXd uy = Phi * state.cell.row(c).segment(n3, n3).transpose();
    for (int i = 0; i < 10; ++i) {
      std::snprintf(buf, sizeof buf, "%.12g %.12g 0\n", ux[i], uy[i]);
      out << buf;
    }
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    const Eigen::VectorXd p =
        Phi.leftCols(n3p) * state.cell.row(c).segment(2 * n3, n3p).transpose();
    for (int i = 0; i < 10; ++i) {
      std::snprintf(buf, sizeof buf, "%.12g\n", p[i]);
      out << buf;
    }
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace sthdg
