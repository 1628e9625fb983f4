#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ifepic/grid.hpp"

namespace ifepic {

enum class TriClass : std::uint8_t { NonInterfaceMinus, NonInterfacePlus, Interface };

// Each cell splits along the lower-left -> upper-right diagonal.
// Cell (ci,cj) with corners A=(ci,cj) B=(ci+1,cj) C=(ci+1,cj+1) D=(ci,cj+1)
// yields lower triangle (A,B,C) and upper triangle (A,C,D), both CCW.
struct Triangle {
  std::array<int, 3> n{};   // global node ids, CCW
  int cell = 0;             // cell index cj*nx + ci
  bool upper = false;
  TriClass cls = TriClass::NonInterfacePlus;
  int cut = -1;             // index into TriangulatedMesh::cuts when Interface
};

// Interface crossing of one triangle. The interface is approximated by the
// straight segment DE; sub-polygon areas satisfy |T+|+|T-| = |T|.
struct InterfaceCut {
  int tri = -1;
  Vec2 D{}, E{};
  std::vector<Vec2> poly_minus, poly_plus;  // CCW sub-polygons (3 or 4 vertices)
  double area_minus = 0.0, area_plus = 0.0;
  Vec2 normal{};                             // unit normal of DE, points minus -> plus
  std::array<bool, 3> vertex_minus{};        // per triangle vertex
};

struct Edge {
  int a = 0, b = 0;        // node ids
  int t0 = -1, t1 = -1;    // adjacent triangles (interior edges only)
  bool interface = false;  // endpoint signs differ
};

struct TriangulatedMesh {
  CartesianGrid grid;
  InterfaceGeometry geom;
  std::vector<std::uint8_t> node_minus;  // per node, 1 = inside conductor
  std::vector<Triangle> triangles;       // 2 per cell: lower then upper
  std::vector<InterfaceCut> cuts;
  std::vector<Edge> edges;               // all interior edges

  bool is_node_minus(int id) const { return node_minus[id] != 0; }
  int lower_tri(int ci, int cj) const { return 2 * (cj * grid.nx + ci); }
  int upper_tri(int ci, int cj) const { return lower_tri(ci, cj) + 1; }
  Vec2 node_pos(int id) const {
    return grid.node_pos(id % grid.nnx(), id / grid.nnx());
  }
  std::array<Vec2, 3> tri_coords(const Triangle& t) const {
    return {node_pos(t.n[0]), node_pos(t.n[1]), node_pos(t.n[2])};
  }
  // True if the cell has both inside and outside corners (deposit-side notion
  // of an interface element).
  bool cell_mixed(int ci, int cj) const;
};

struct Location {
  int ci = 0, cj = 0;  // cell
  int tri = -1;        // triangle id
  bool minus = false;  // level set < 0 at the position
};

// Bisection root of the level set on segment p1-p2 to 1e-12 of the segment
// parameter. Requires a sign change (endpoint within tolerance returns it).
Vec2 edge_root(Vec2 p1, Vec2 p2, const InterfaceGeometry& geom);

// Cut data for an interface triangle; throws on degenerate cuts, which
// build_mesh converts into a majority-side reclassification.
InterfaceCut compute_cut(const TriangulatedMesh& mesh, int tri_id);

TriangulatedMesh build_mesh(const CartesianGrid& grid, const InterfaceGeometry& geom);

// Cell via floor division with ties to the lower-index cell; triangle by the
// diagonal test; side from the level-set sign. Throws if outside the domain.
Location locate(const TriangulatedMesh& mesh, Vec2 p);

double triangle_area(Vec2 a, Vec2 b, Vec2 c);
double polygon_area(const std::vector<Vec2>& poly);

}  // namespace ifepic
