#include "ifepic/quadrature.hpp"

#include <cmath>

#include "ifepic/mesh.hpp"

namespace ifepic {

const std::array<TriQuadPoint, 7>& tri_rule_deg5() {
  static const std::array<TriQuadPoint, 7> rule = [] {
    const double s = std::sqrt(15.0);
    const double a1 = (6.0 - s) / 21.0, w1 = (155.0 - s) / 1200.0;
    const double a2 = (6.0 + s) / 21.0, w2 = (155.0 + s) / 1200.0;
    std::array<TriQuadPoint, 7> r{};
    r[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0};
    r[1] = {1.0 - 2.0 * a1, a1, a1, w1};
    r[2] = {a1, 1.0 - 2.0 * a1, a1, w1};
    r[3] = {a1, a1, 1.0 - 2.0 * a1, w1};
    r[4] = {1.0 - 2.0 * a2, a2, a2, w2};
    r[5] = {a2, 1.0 - 2.0 * a2, a2, w2};
    r[6] = {a2, a2, 1.0 - 2.0 * a2, w2};
    return r;
  }();
  return rule;
}

PhysQuad triangle_quadrature(Vec2 a, Vec2 b, Vec2 c) {
  const double area = std::abs(triangle_area(a, b, c));
  PhysQuad q;
  q.pts.reserve(7);
  q.w.reserve(7);
  for (const auto& p : tri_rule_deg5()) {
    q.pts.push_back({p.l0 * a.x + p.l1 * b.x + p.l2 * c.x,
                     p.l0 * a.y + p.l1 * b.y + p.l2 * c.y});
    q.w.push_back(p.w * area);
  }
  return q;
}

PhysQuad polygon_quadrature(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) throw Error("polygon_quadrature: fewer than 3 vertices");
  PhysQuad q;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    PhysQuad t = triangle_quadrature(poly[0], poly[k], poly[k + 1]);
    q.pts.insert(q.pts.end(), t.pts.begin(), t.pts.end());
    q.w.insert(q.w.end(), t.w.begin(), t.w.end());
  }
  return q;
}

PhysQuad segment_quadrature(Vec2 a, Vec2 b) {
  const double g = 1.0 / std::sqrt(3.0);
  const Vec2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  const Vec2 half{0.5 * (b.x - a.x), 0.5 * (b.y - a.y)};
  const double len = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y));
  PhysQuad q;
  q.pts = {{mid.x - g * half.x, mid.y - g * half.y},
           {mid.x + g * half.x, mid.y + g * half.y}};
  q.w = {0.5 * len, 0.5 * len};
  return q;
}

}  // namespace ifepic
