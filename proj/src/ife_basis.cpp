#include "ifepic/ife_basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace ifepic {

std::array<LinearFunc, 3> p1_basis(const std::array<Vec2, 3>& v) {
  const double det = (v[1].x - v[0].x) * (v[2].y - v[0].y) -
                     (v[2].x - v[0].x) * (v[1].y - v[0].y);
  std::array<LinearFunc, 3> phi;
  for (int i = 0; i < 3; ++i) {
    const Vec2& p = v[(i + 1) % 3];
    const Vec2& q = v[(i + 2) % 3];
    phi[i].a = (p.y - q.y) / det;
    phi[i].b = (q.x - p.x) / det;
    phi[i].c = (p.x * q.y - q.x * p.y) / det;
  }
  return phi;
}

IFELocalBasis build_local_basis(const InterfaceCut& cut, const std::array<Vec2, 3>& v,
                                double beta_minus, double beta_plus) {
  // Work in coordinates centered at the triangle centroid to keep the
  // constraint matrix well scaled.
  const Vec2 c0 = (1.0 / 3.0) * (v[0] + v[1] + v[2]);
  const Vec2 D = cut.D - c0, E = cut.E - c0, n = cut.normal;

  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  // Unknown order: (a-, b-, c-, a+, b+, c+).
  for (int i = 0; i < 3; ++i) {
    const Vec2 p = v[i] - c0;
    const int off = cut.vertex_minus[i] ? 0 : 3;
    M(i, off + 0) = p.x;
    M(i, off + 1) = p.y;
    M(i, off + 2) = 1.0;
  }
  for (int r = 0; r < 2; ++r) {
    const Vec2 p = (r == 0) ? D : E;
    M(3 + r, 0) = p.x;
    M(3 + r, 1) = p.y;
    M(3 + r, 2) = 1.0;
    M(3 + r, 3) = -p.x;
    M(3 + r, 4) = -p.y;
    M(3 + r, 5) = -1.0;
  }
  M(5, 0) = beta_minus * n.x;
  M(5, 1) = beta_minus * n.y;
  M(5, 3) = -beta_plus * n.x;
  M(5, 4) = -beta_plus * n.y;

  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(M);
  const double smin = svd.singularValues()(5), smax = svd.singularValues()(0);
  if (smin <= 0.0 || smax / smin > 1e12)
    throw Error("build_local_basis: degenerate constraint system on triangle " +
                std::to_string(cut.tri));

  const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(M);
  IFELocalBasis basis;
  basis.tri = cut.tri;
  for (int i = 0; i < 3; ++i) {
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    rhs(i) = 1.0;
    const Eigen::Matrix<double, 6, 1> x = lu.solve(rhs);
    // Undo the centroid shift: phi = a*(x-cx) + b*(y-cy) + c.
    basis.minus[i] = {x(0), x(1), x(2) - x(0) * c0.x - x(1) * c0.y};
    basis.plus[i] = {x(3), x(4), x(5) - x(3) * c0.x - x(4) * c0.y};
  }
  return basis;
}

double eval(const IFELocalBasis& basis, int i, Vec2 p, bool minus_side) {
  return (minus_side ? basis.minus[i] : basis.plus[i]).eval(p);
}

Vec2 grad(const IFELocalBasis& basis, int i, bool minus_side) {
  return (minus_side ? basis.minus[i] : basis.plus[i]).grad();
}

BasisTable build_basis_table(TriangulatedMesh& mesh, double beta_minus, double beta_plus) {
  if (beta_minus <= 0.0 || beta_plus <= 0.0)
    throw Error("build_basis_table: conductivities must be positive");
  BasisTable table;
  table.beta_minus = beta_minus;
  table.beta_plus = beta_plus;
  table.by_cut.resize(mesh.cuts.size());
  for (std::size_t k = 0; k < mesh.cuts.size(); ++k) {
    const InterfaceCut& cut = mesh.cuts[k];
    Triangle& t = mesh.triangles[cut.tri];
    if (t.cut != static_cast<int>(k)) continue;  // already reclassified
    try {
      table.by_cut[k] = build_local_basis(cut, mesh.tri_coords(t), beta_minus, beta_plus);
    } catch (const Error&) {
      t.cls = (cut.area_minus > cut.area_plus) ? TriClass::NonInterfaceMinus
                                               : TriClass::NonInterfacePlus;
      t.cut = -1;
    }
  }
  return table;
}

std::array<LinearFunc, 3> local_basis(const TriangulatedMesh& mesh, const BasisTable& table,
                                      int tri, bool minus_side) {
  const Triangle& t = mesh.triangles[tri];
  if (t.cls == TriClass::Interface) {
    const IFELocalBasis& b = table.by_cut[t.cut];
    return minus_side ? b.minus : b.plus;
  }
  return p1_basis(mesh.tri_coords(t));
}

double local_beta(const TriangulatedMesh& mesh, const BasisTable& table, int tri,
                  bool minus_side) {
  const Triangle& t = mesh.triangles[tri];
  if (t.cls == TriClass::Interface)
    return minus_side ? table.beta_minus : table.beta_plus;
  return t.cls == TriClass::NonInterfaceMinus ? table.beta_minus : table.beta_plus;
}

}  // namespace ifepic
