#pragma once

#include <array>
#include <vector>

#include "ifepic/grid.hpp"

namespace ifepic {

// 7-point symmetric triangle rule, exact to polynomial degree 5.
struct TriQuadPoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;           // weight, sums to 1 over the rule
};

const std::array<TriQuadPoint, 7>& tri_rule_deg5();

// Physical quadrature points and weights (weights scaled by |area|) for a
// triangle given by its vertices.
struct PhysQuad {
  std::vector<Vec2> pts;
  std::vector<double> w;
};

PhysQuad triangle_quadrature(Vec2 a, Vec2 b, Vec2 c);

// Fan-triangulates a convex polygon (3 or 4 vertices here) and concatenates
// the per-triangle rules.
PhysQuad polygon_quadrature(const std::vector<Vec2>& poly);

// 2-point Gauss on a segment, exact to degree 3.
PhysQuad segment_quadrature(Vec2 a, Vec2 b);

}  // namespace ifepic
