#pragma once

#include <array>
#include <vector>

#include "ifepic/mesh.hpp"

namespace ifepic {

// Linear function a*x + b*y + c; one piece of a local shape function.
struct LinearFunc {
  double a = 0.0, b = 0.0, c = 0.0;
  double eval(Vec2 p) const { return a * p.x + b * p.y + c; }
  Vec2 grad() const { return {a, b}; }
};

// Standard linear shape functions of a triangle (value 1 at vertex i, 0 at
// the others).
std::array<LinearFunc, 3> p1_basis(const std::array<Vec2, 3>& v);

// Piecewise-linear immersed basis of one interface triangle: three local
// functions, each with a piece per side of the interface segment.
struct IFELocalBasis {
  int tri = -1;
  std::array<LinearFunc, 3> minus, plus;
};

// Solves the 6x6 constraint system (3 nodal values, value match at the two
// cut points, flux match across the segment) for each local function.
// Throws Error when the system's condition estimate exceeds 1e12.
IFELocalBasis build_local_basis(const InterfaceCut& cut, const std::array<Vec2, 3>& v,
                                double beta_minus, double beta_plus);

double eval(const IFELocalBasis& basis, int i, Vec2 p, bool minus_side);
Vec2 grad(const IFELocalBasis& basis, int i, bool minus_side);

// Immutable per-mesh cache of the immersed bases, parallel to mesh.cuts.
struct BasisTable {
  double beta_minus = 1.0, beta_plus = 1.0;
  std::vector<IFELocalBasis> by_cut;
};

// Builds bases for every interface triangle. A triangle whose constraint
// system is degenerate is reclassified to its majority side (mesh is
// adjusted), matching the mesh's own sliver handling.
BasisTable build_basis_table(TriangulatedMesh& mesh, double beta_minus, double beta_plus);

// The three local shape functions of a triangle on the requested side:
// immersed basis on interface triangles, standard basis elsewhere.
std::array<LinearFunc, 3> local_basis(const TriangulatedMesh& mesh, const BasisTable& table,
                                      int tri, bool minus_side);

// Diffusion coefficient seen by triangle `tri` at a point on the given side.
double local_beta(const TriangulatedMesh& mesh, const BasisTable& table, int tri,
                  bool minus_side);

}  // namespace ifepic
