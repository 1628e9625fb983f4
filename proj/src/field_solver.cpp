#include "ifepic/field_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>

#include "ifepic/quadrature.hpp"

namespace ifepic {

void validate_config(const SolverConfig& cfg) {
  if (cfg.epsilon != -1 && cfg.epsilon != 0 && cfg.epsilon != 1)
    throw Error("solver config: epsilon must be -1, 0, or 1");
  if (cfg.sigma0 < 0.0) throw Error("solver config: sigma0 must be nonnegative");
  if (cfg.scheme == Scheme::Ppife && cfg.sigma0 == 0.0 && cfg.epsilon != 1)
    throw Error("solver config: sigma0 > 0 required for epsilon in {-1, 0}");
  if (!(cfg.linear_tol > 0.0 && cfg.linear_tol < 1.0))
    throw Error("solver config: linear_tol must lie in (0, 1)");
  if (cfg.max_iterations <= 0)
    throw Error("solver config: max_iterations must be positive");
}

SourceSpec SourceSpec::analytic(std::function<double(Vec2)> f) {
  SourceSpec s;
  s.f = std::move(f);
  return s;
}

SourceSpec SourceSpec::nodal(std::vector<double> values) {
  SourceSpec s;
  s.nodal_values = std::move(values);
  return s;
}

namespace {

using Trip = Eigen::Triplet<double>;

Eigen::SparseMatrix<double> from_triplets(int n, const std::vector<Trip>& trips) {
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

// Shared worker for the edge terms; assemble_penalty enables the consistency
// pair, assemble_stabilization only the jump product.
void edge_terms(const TriangulatedMesh& mesh, const BasisTable& table, bool consistency,
                int epsilon, double sigma0, std::vector<Trip>& trips) {
  const double sigma_e = sigma0 * std::max(table.beta_minus, table.beta_plus);
  const double hx = mesh.grid.hx(), hy = mesh.grid.hy();
  for (const Edge& e : mesh.edges) {
    if (!e.interface) continue;
    const Vec2 pa = mesh.node_pos(e.a), pb = mesh.node_pos(e.b);
    const double elen = norm(pb - pa);
    Vec2 n{(pb.y - pa.y) / elen, -(pb.x - pa.x) / elen};
    const Triangle& t1 = mesh.triangles[e.t1];
    const auto c1 = mesh.tri_coords(t1);
    const Vec2 cen1 = (1.0 / 3.0) * (c1[0] + c1[1] + c1[2]);
    const Vec2 mid = 0.5 * (pa + pb);
    if (dot(n, cen1 - mid) < 0.0) n = -1.0 * n;

    // Union of both triangles' nodes (4 on a conforming mesh).
    const Triangle& t0 = mesh.triangles[e.t0];
    int uni[6], m = 0, l0[3], l1[3];
    for (int k = 0; k < 3; ++k) {
      uni[m] = t0.n[k];
      l0[k] = m++;
    }
    for (int k = 0; k < 3; ++k) {
      int* found = std::find(uni, uni + m, t1.n[k]);
      if (found == uni + m) {
        uni[m] = t1.n[k];
        l1[k] = m++;
      } else {
        l1[k] = static_cast<int>(found - uni);
      }
    }

    // Split at the interface crossing so each piece sees one side.
    std::array<std::pair<Vec2, Vec2>, 2> segs{{{pa, pb}, {pa, pb}}};
    int nseg = 1;
    try {
      const Vec2 r = edge_root(pa, pb, mesh.geom);
      if (norm(r - pa) > 1e-13 * elen && norm(r - pb) > 1e-13 * elen) {
        segs[0] = {pa, r};
        segs[1] = {r, pb};
        nseg = 2;
      }
    } catch (const Error&) {
      // Node-classification threshold flipped an endpoint; treat as uncut.
    }

    double jmp[6], avg[6];
    for (int s = 0; s < nseg; ++s) {
      const Vec2 smid = 0.5 * (segs[s].first + segs[s].second);
      const bool minus = node_inside(mesh.geom, smid, hx, hy);
      const auto b0 = local_basis(mesh, table, e.t0, minus);
      const auto b1 = local_basis(mesh, table, e.t1, minus);
      const double beta0 = local_beta(mesh, table, e.t0, minus);
      const double beta1 = local_beta(mesh, table, e.t1, minus);
      const PhysQuad q = segment_quadrature(segs[s].first, segs[s].second);
      for (std::size_t qi = 0; qi < q.pts.size(); ++qi) {
        const Vec2 p = q.pts[qi];
        const double w = q.w[qi];
        std::fill(jmp, jmp + m, 0.0);
        std::fill(avg, avg + m, 0.0);
        for (int k = 0; k < 3; ++k) {
          jmp[l0[k]] += b0[k].eval(p);
          avg[l0[k]] += 0.5 * beta0 * dot(b0[k].grad(), n);
          jmp[l1[k]] -= b1[k].eval(p);
          avg[l1[k]] += 0.5 * beta1 * dot(b1[k].grad(), n);
        }
        for (int row = 0; row < m; ++row) {
          for (int col = 0; col < m; ++col) {
            double v = (sigma_e / elen) * jmp[col] * jmp[row];
            if (consistency)
              v += -avg[col] * jmp[row] + epsilon * avg[row] * jmp[col];
            if (v != 0.0) trips.emplace_back(uni[row], uni[col], w * v);
          }
        }
      }
    }
  }
}

#ifndef NDEBUG
// Traces of the global space agree across noninterface edges; spot-check the
// ones adjacent to interface triangles.
void check_conforming_traces(const TriangulatedMesh& mesh, const BasisTable& table) {
  const double hx = mesh.grid.hx(), hy = mesh.grid.hy();
  for (const Edge& e : mesh.edges) {
    if (e.interface) continue;
    const Triangle& t0 = mesh.triangles[e.t0];
    const Triangle& t1 = mesh.triangles[e.t1];
    if (t0.cls != TriClass::Interface && t1.cls != TriClass::Interface) continue;
    const Vec2 pa = mesh.node_pos(e.a), pb = mesh.node_pos(e.b);
    const bool minus = node_inside(mesh.geom, 0.5 * (pa + pb), hx, hy);
    const auto b0 = local_basis(mesh, table, e.t0, minus);
    const auto b1 = local_basis(mesh, table, e.t1, minus);
    for (const Vec2& p : segment_quadrature(pa, pb).pts) {
      for (int k = 0; k < 3; ++k) {
        double v0 = b0[k].eval(p);
        // Match by node id against the neighbor's trace.
        double v1 = 0.0;
        for (int k2 = 0; k2 < 3; ++k2)
          if (t1.n[k2] == t0.n[k]) v1 = b1[k2].eval(p);
        if (t0.n[k] == e.a || t0.n[k] == e.b) assert(std::abs(v0 - v1) < 1e-9);
      }
    }
  }
}
#endif

}  // namespace

Eigen::SparseMatrix<double> assemble_volume(const TriangulatedMesh& mesh,
                                            const BasisTable& table) {
  const int n = mesh.grid.node_count();
  std::vector<Trip> trips;
  trips.reserve(mesh.triangles.size() * 9);
  for (const Triangle& t : mesh.triangles) {
    const auto v = mesh.tri_coords(t);
    if (t.cls != TriClass::Interface) {
      const double beta =
          t.cls == TriClass::NonInterfaceMinus ? table.beta_minus : table.beta_plus;
      const double area = triangle_area(v[0], v[1], v[2]);
      const auto phi = p1_basis(v);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trips.emplace_back(t.n[i], t.n[j], beta * area * dot(phi[i].grad(), phi[j].grad()));
    } else {
      const InterfaceCut& cut = mesh.cuts[t.cut];
      const IFELocalBasis& ib = table.by_cut[t.cut];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double val =
              table.beta_minus * cut.area_minus * dot(ib.minus[i].grad(), ib.minus[j].grad()) +
              table.beta_plus * cut.area_plus * dot(ib.plus[i].grad(), ib.plus[j].grad());
          trips.emplace_back(t.n[i], t.n[j], val);
        }
    }
  }
  return from_triplets(n, trips);
}

Eigen::SparseMatrix<double> assemble_penalty(const TriangulatedMesh& mesh,
                                             const BasisTable& table,
                                             const SolverConfig& cfg) {
  validate_config(cfg);
#ifndef NDEBUG
  check_conforming_traces(mesh, table);
#endif
  std::vector<Trip> trips;
  edge_terms(mesh, table, true, cfg.epsilon, cfg.sigma0, trips);
  return from_triplets(mesh.grid.node_count(), trips);
}

Eigen::SparseMatrix<double> assemble_stabilization(const TriangulatedMesh& mesh,
                                                   const BasisTable& table, double sigma0) {
  std::vector<Trip> trips;
  edge_terms(mesh, table, false, 0, sigma0, trips);
  return from_triplets(mesh.grid.node_count(), trips);
}

Eigen::VectorXd assemble_load(const TriangulatedMesh& mesh, const BasisTable& table,
                              const SolverConfig& cfg, const SourceSpec& source) {
  const int n = mesh.grid.node_count();
  const bool nodal = cfg.rhs_mode == RhsMode::NodalDensity;
  if (nodal && static_cast<int>(source.nodal_values.size()) != n)
    throw Error("assemble_load: nodal source array does not match node count");
  if (!nodal && !source.f) throw Error("assemble_load: analytic source function missing");

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (const Triangle& t : mesh.triangles) {
    const auto v = mesh.tri_coords(t);
    const auto interp = p1_basis(v);
    auto fval = [&](Vec2 p) {
      if (!nodal) return source.f(p);
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += source.nodal_values[t.n[k]] * interp[k].eval(p);
      return s;
    };
    if (t.cls != TriClass::Interface) {
      const PhysQuad q = triangle_quadrature(v[0], v[1], v[2]);
      for (std::size_t qi = 0; qi < q.pts.size(); ++qi)
        for (int k = 0; k < 3; ++k)
          b(t.n[k]) += q.w[qi] * fval(q.pts[qi]) * interp[k].eval(q.pts[qi]);
    } else {
      const InterfaceCut& cut = mesh.cuts[t.cut];
      const IFELocalBasis& ib = table.by_cut[t.cut];
      for (int side = 0; side < 2; ++side) {
        const bool minus = side == 0;
        const PhysQuad q = polygon_quadrature(minus ? cut.poly_minus : cut.poly_plus);
        for (std::size_t qi = 0; qi < q.pts.size(); ++qi)
          for (int k = 0; k < 3; ++k)
            b(t.n[k]) += q.w[qi] * fval(q.pts[qi]) * eval(ib, k, q.pts[qi], minus);
      }
    }
  }
  return b;
}

SparseSystem reduce_dirichlet(const TriangulatedMesh& mesh,
                              const Eigen::SparseMatrix<double>& A,
                              const Eigen::VectorXd& load,
                              const std::function<double(Vec2)>& g) {
  const CartesianGrid& grid = mesh.grid;
  const int n = grid.node_count();
  if (A.rows() != n || load.size() != n)
    throw Error("reduce_dirichlet: system size does not match node count");

  SparseSystem sys;
  sys.free_of_global.assign(n, -1);
  sys.boundary_value.assign(n, 0.0);
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      const int id = grid.node_id(i, j);
      if (grid.boundary_node(i, j))
        sys.boundary_value[id] = g(grid.node_pos(i, j));
      else {
        sys.free_of_global[id] = static_cast<int>(sys.global_of_free.size());
        sys.global_of_free.push_back(id);
      }
    }

  const int nf = static_cast<int>(sys.global_of_free.size());
  sys.b = Eigen::VectorXd::Zero(nf);
  for (int fi = 0; fi < nf; ++fi) sys.b(fi) = load(sys.global_of_free[fi]);

  std::vector<Trip> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int fr = sys.free_of_global[it.row()];
      if (fr < 0) continue;
      const int fc = sys.free_of_global[it.col()];
      if (fc >= 0)
        trips.emplace_back(fr, fc, it.value());
      else
        sys.b(fr) -= it.value() * sys.boundary_value[it.col()];
    }
  sys.A = from_triplets(nf, trips);
  return sys;
}

FieldSolution solve(const SparseSystem& sys, const SolverConfig& cfg) {
  validate_config(cfg);
  const bool symmetric = cfg.scheme == Scheme::Galerkin || cfg.epsilon == -1;
  Eigen::VectorXd x;
  int iters = 0;
  if (symmetric) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(0.1 * cfg.linear_tol);
    cg.setMaxIterations(cfg.max_iterations);
    cg.compute(sys.A);
    x = cg.solve(sys.b);
    iters = static_cast<int>(cg.iterations());
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.A);
    if (lu.info() != Eigen::Success) throw Error("solve: sparse factorization failed");
    x = lu.solve(sys.b);
  }

  const double bnorm = sys.b.norm();
  const double res = (sys.A * x - sys.b).norm() / (bnorm > 0.0 ? bnorm : 1.0);
  if (!(res <= cfg.linear_tol))
    throw Error("solve: residual " + std::to_string(res) + " above tolerance after " +
                std::to_string(iters) + " iterations");

  FieldSolution sol;
  const int n = static_cast<int>(sys.free_of_global.size());
  sol.phi.assign(n, 0.0);
  for (int id = 0; id < n; ++id) {
    const int f = sys.free_of_global[id];
    sol.phi[id] = f >= 0 ? x(f) : sys.boundary_value[id];
  }
  sol.residual = res;
  sol.iterations = iters;
  return sol;
}

FieldSolution solve_field(const TriangulatedMesh& mesh, const BasisTable& table,
                          const SolverConfig& cfg, const SourceSpec& source,
                          const std::function<double(Vec2)>& g) {
  validate_config(cfg);
  Eigen::SparseMatrix<double> A = assemble_volume(mesh, table);
  if (cfg.scheme == Scheme::Ppife) {
    const Eigen::SparseMatrix<double> P = assemble_penalty(mesh, table, cfg);
    A = A + P;
  }
  const Eigen::VectorXd load = assemble_load(mesh, table, cfg, source);
  const SparseSystem sys = reduce_dirichlet(mesh, A, load, g);
  return solve(sys, cfg);
}

void dump_matrix(const Eigen::SparseMatrix<double>& A, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("dump_matrix: cannot open " + path);
  out.precision(16);
  out << std::scientific;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
  if (!out) throw Error("dump_matrix: write failed for " + path);
}

}  // namespace ifepic
