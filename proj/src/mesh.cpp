#include "ifepic/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace ifepic {

double triangle_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

Vec2 edge_root(Vec2 p1, Vec2 p2, const InterfaceGeometry& geom) {
  double f1 = geom(p1), f2 = geom(p2);
  if (f1 == 0.0) return p1;
  if (f2 == 0.0) return p2;
  if (f1 * f2 > 0.0) throw Error("edge_root: endpoints do not bracket the interface");
  double ta = 0.0, tb = 1.0;
  // 50 halvings take the parameter interval below 1e-12.
  for (int it = 0; it < 50 && (tb - ta) > 1e-13; ++it) {
    double tm = 0.5 * (ta + tb);
    Vec2 pm = p1 + tm * (p2 - p1);
    double fm = geom(pm);
    if (fm == 0.0) return pm;
    if (f1 * fm < 0.0)
      tb = tm;
    else
      ta = tm;
  }
  double tm = 0.5 * (ta + tb);
  return p1 + tm * (p2 - p1);
}

namespace {

struct DegenerateCut {};

InterfaceCut cut_triangle(const std::array<Vec2, 3>& v, const std::array<bool, 3>& minus,
                          const InterfaceGeometry& geom, int tri_id) {
  InterfaceCut cut;
  cut.tri = tri_id;
  cut.vertex_minus = minus;

  // Walk the CCW vertex loop, emitting vertices to their side's polygon and
  // a root point to both polygons on each sign-change edge.
  std::vector<Vec2> roots;
  for (int k = 0; k < 3; ++k) {
    int k2 = (k + 1) % 3;
    if (minus[k])
      cut.poly_minus.push_back(v[k]);
    else
      cut.poly_plus.push_back(v[k]);
    if (minus[k] != minus[k2]) {
      Vec2 r = edge_root(v[k], v[k2], geom);
      cut.poly_minus.push_back(r);
      cut.poly_plus.push_back(r);
      roots.push_back(r);
    }
  }
  if (roots.size() != 2) throw Error("compute_cut: triangle is not an interface triangle");
  cut.D = roots[0];
  cut.E = roots[1];

  cut.area_minus = polygon_area(cut.poly_minus);
  cut.area_plus = polygon_area(cut.poly_plus);
  double total = triangle_area(v[0], v[1], v[2]);
  if (std::min(cut.area_minus, cut.area_plus) < 1e-10 * total) throw DegenerateCut{};

  Vec2 de = cut.E - cut.D;
  double len = norm(de);
  if (len == 0.0) throw DegenerateCut{};
  Vec2 n{-de.y / len, de.x / len};
  // Orient from the minus sub-polygon toward the plus one.
  auto centroid = [](const std::vector<Vec2>& poly) {
    Vec2 c{};
    for (const Vec2& p : poly) c = c + p;
    return (1.0 / static_cast<double>(poly.size())) * c;
  };
  if (dot(n, centroid(cut.poly_plus) - centroid(cut.poly_minus)) < 0.0) n = -1.0 * n;
  cut.normal = n;
  return cut;
}

}  // namespace

bool TriangulatedMesh::cell_mixed(int ci, int cj) const {
  int in = 0;
  const int ids[4] = {grid.node_id(ci, cj), grid.node_id(ci + 1, cj),
                      grid.node_id(ci + 1, cj + 1), grid.node_id(ci, cj + 1)};
  for (int id : ids) in += is_node_minus(id) ? 1 : 0;
  return in > 0 && in < 4;
}

InterfaceCut compute_cut(const TriangulatedMesh& mesh, int tri_id) {
  const Triangle& t = mesh.triangles[tri_id];
  std::array<bool, 3> minus{};
  for (int k = 0; k < 3; ++k) minus[k] = mesh.is_node_minus(t.n[k]);
  return cut_triangle(mesh.tri_coords(t), minus, mesh.geom, tri_id);
}

TriangulatedMesh build_mesh(const CartesianGrid& grid, const InterfaceGeometry& geom) {
  TriangulatedMesh mesh;
  mesh.grid = grid;
  mesh.geom = geom;
  const int nx = grid.nx, ny = grid.ny;
  const double hx = grid.hx(), hy = grid.hy();

  mesh.node_minus.resize(grid.node_count());
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.node_minus[grid.node_id(i, j)] =
          node_inside(geom, grid.node_pos(i, j), hx, hy) ? 1 : 0;

  mesh.triangles.reserve(2 * grid.cell_count());
  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      int A = grid.node_id(ci, cj), B = grid.node_id(ci + 1, cj);
      int C = grid.node_id(ci + 1, cj + 1), D = grid.node_id(ci, cj + 1);
      Triangle lo, up;
      lo.n = {A, B, C};
      lo.cell = cj * nx + ci;
      lo.upper = false;
      up.n = {A, C, D};
      up.cell = lo.cell;
      up.upper = true;
      mesh.triangles.push_back(lo);
      mesh.triangles.push_back(up);
    }
  }

  for (Triangle& t : mesh.triangles) {
    int in = 0;
    for (int k = 0; k < 3; ++k) in += mesh.is_node_minus(t.n[k]) ? 1 : 0;
    if (in == 3)
      t.cls = TriClass::NonInterfaceMinus;
    else if (in == 0)
      t.cls = TriClass::NonInterfacePlus;
    else
      t.cls = TriClass::Interface;

    // A sign-preserving edge crossed twice means the mesh cannot represent
    // the interface with one segment per triangle.
    auto coords = mesh.tri_coords(t);
    for (int k = 0; k < 3; ++k) {
      int k2 = (k + 1) % 3;
      bool sk = mesh.is_node_minus(t.n[k]), sk2 = mesh.is_node_minus(t.n[k2]);
      if (sk == sk2) {
        Vec2 mid = 0.5 * (coords[k] + coords[k2]);
        bool sm = node_inside(geom, mid, hx, hy);
        if (sm != sk)
          throw Error("build_mesh: triangle " + std::to_string(&t - mesh.triangles.data()) +
                      " has more than 2 cut edges (interface under-resolved)");
      }
    }
  }

  for (int id = 0; id < static_cast<int>(mesh.triangles.size()); ++id) {
    Triangle& t = mesh.triangles[id];
    if (t.cls != TriClass::Interface) continue;
    try {
      InterfaceCut cut = compute_cut(mesh, id);
      t.cut = static_cast<int>(mesh.cuts.size());
      mesh.cuts.push_back(std::move(cut));
    } catch (const DegenerateCut&) {
      // Sliver below resolution: classify to the majority side.
      std::array<Vec2, 3> v = mesh.tri_coords(t);
      std::vector<Vec2> pm, pp;
      for (int k = 0; k < 3; ++k) {
        std::vector<Vec2>& dst = mesh.is_node_minus(t.n[k]) ? pm : pp;
        dst.push_back(v[k]);
      }
      t.cls = (pm.size() > pp.size()) ? TriClass::NonInterfaceMinus : TriClass::NonInterfacePlus;
      t.cut = -1;
    }
  }

  // Interior edges: horizontal, vertical, and the cell diagonals.
  auto add_edge = [&](int a, int b, int t0, int t1) {
    Edge e;
    e.a = a;
    e.b = b;
    e.t0 = t0;
    e.t1 = t1;
    e.interface = mesh.is_node_minus(a) != mesh.is_node_minus(b);
    mesh.edges.push_back(e);
  };
  for (int cj = 1; cj < ny; ++cj)
    for (int ci = 0; ci < nx; ++ci)
      add_edge(grid.node_id(ci, cj), grid.node_id(ci + 1, cj),
               mesh.lower_tri(ci, cj), mesh.upper_tri(ci, cj - 1));
  for (int cj = 0; cj < ny; ++cj)
    for (int ci = 1; ci < nx; ++ci)
      add_edge(grid.node_id(ci, cj), grid.node_id(ci, cj + 1),
               mesh.upper_tri(ci, cj), mesh.lower_tri(ci - 1, cj));
  for (int cj = 0; cj < ny; ++cj)
    for (int ci = 0; ci < nx; ++ci)
      add_edge(grid.node_id(ci, cj), grid.node_id(ci + 1, cj + 1),
               mesh.lower_tri(ci, cj), mesh.upper_tri(ci, cj));

  return mesh;
}

Location locate(const TriangulatedMesh& mesh, Vec2 p) {
  const CartesianGrid& g = mesh.grid;
  if (!g.contains(p)) throw Error("locate: position outside domain");
  auto axis = [](double coord, double lo, double h, int n) {
    double u = (coord - lo) / h;
    int i = static_cast<int>(std::floor(u));
    // Positions on a gridline belong to the lower-index cell.
    if (i >= 1 && u == static_cast<double>(i)) --i;
    return std::clamp(i, 0, n - 1);
  };
  Location loc;
  loc.ci = axis(p.x, g.xmin, g.hx(), g.nx);
  loc.cj = axis(p.y, g.ymin, g.hy(), g.ny);
  double lx = (p.x - (g.xmin + loc.ci * g.hx())) / g.hx();
  double ly = (p.y - (g.ymin + loc.cj * g.hy())) / g.hy();
  bool lower = ly <= lx;  // on-diagonal ties go to the lower triangle
  loc.tri = lower ? mesh.lower_tri(loc.ci, loc.cj) : mesh.upper_tri(loc.ci, loc.cj);
  loc.minus = mesh.geom(p) < 0.0;
  return loc;
}

}  // namespace ifepic
