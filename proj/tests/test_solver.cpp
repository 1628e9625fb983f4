#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ifepic/driver.hpp"
#include "ifepic/field_solver.hpp"

using namespace ifepic;

namespace {

constexpr double kR0 = 3.14159265358979323846 / 12.0;

struct Problem {
  CartesianGrid grid;
  TriangulatedMesh mesh;
  BasisTable table;
};

Problem make_problem(int n, const InterfaceGeometry& geom, double bm, double bp) {
  CartesianGrid g = CartesianGrid::square(n);
  TriangulatedMesh mesh = build_mesh(g, geom);
  BasisTable table = build_basis_table(mesh, bm, bp);
  return {g, std::move(mesh), std::move(table)};
}

InterfaceGeometry bench_circle() { return InterfaceGeometry::circle({0.0, 0.0}, kR0); }

double max_abs(const Eigen::SparseMatrix<double>& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double max_asymmetry(const Eigen::SparseMatrix<double>& A) {
  Eigen::SparseMatrix<double> D = Eigen::SparseMatrix<double>(A.transpose()) - A;
  return max_abs(D);
}

double max_row_sum(const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.cols());
  Eigen::VectorXd r = A * ones;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("stiffness assembly: symmetry, constant kernel, known stencil") {
  const Problem p = make_problem(8, InterfaceGeometry::none(), 1.0, 1.0);
  const auto A = assemble_volume(p.mesh, p.table);
  REQUIRE(A.rows() == static_cast<int>(p.grid.node_count()));

  CHECK(max_asymmetry(A) < 1e-13);
  CHECK(max_row_sum(A) < 1e-12);

  // Unit coefficient on right-triangle pairs gives the classic 5-point
  // stencil: 4 on the diagonal, -1 to the four axis neighbors, 0 across the
  // cell diagonal.
  const int nnx = p.grid.nnx();
  const int c = p.grid.node_id(4, 4);
  CHECK(A.coeff(c, c) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(A.coeff(c, c + 1) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(A.coeff(c, c - 1) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(A.coeff(c, c + nnx) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(A.coeff(c, c - nnx) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(std::abs(A.coeff(c, c + nnx + 1)) < 1e-13);

  // Positive semidefinite: random quadratic forms stay nonnegative.
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(A.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = dist(gen);
    v.normalize();
    CHECK(v.dot(A * v) >= -1e-12);
  }
}

TEST_CASE("penalty terms vanish without jumps") {
  // No interface edges at all: the penalty matrix is identically empty.
  {
    const Problem p = make_problem(10, InterfaceGeometry::none(), 1.0, 10.0);
    SolverConfig cfg;
    const auto P = assemble_penalty(p.mesh, p.table, cfg);
    CHECK(max_abs(P) == 0.0);
  }
  // Equal coefficients: the immersed basis degenerates to the continuous
  // one, so every jump integrand cancels to roundoff.
  {
    const Problem p = make_problem(20, bench_circle(), 5.0, 5.0);
    SolverConfig cfg;
    const auto P = assemble_penalty(p.mesh, p.table, cfg);
    CHECK(max_abs(P) < 1e-10);
  }
}

TEST_CASE("symmetric scheme matrices are symmetric") {
  const Problem p = make_problem(20, bench_circle(), 1.0, 10.0);
  SolverConfig cfg;
  cfg.epsilon = -1;
  const auto A = assemble_volume(p.mesh, p.table);
  const auto P = assemble_penalty(p.mesh, p.table, cfg);
  Eigen::SparseMatrix<double> M = A + P;
  const double scale = max_abs(M);
  CHECK(max_asymmetry(M) / scale < 1e-12);

  // The nonsymmetric variant really is nonsymmetric on this mesh.
  cfg.epsilon = 1;
  Eigen::SparseMatrix<double> N = A + assemble_penalty(p.mesh, p.table, cfg);
  CHECK(max_asymmetry(N) / max_abs(N) > 1e-8);
}

TEST_CASE("stabilization part is positive semidefinite for any scale") {
  const Problem p = make_problem(20, bench_circle(), 1.0, 10.0);
  for (const double sigma0 : {0.0, 10.0}) {
    const auto S = assemble_stabilization(p.mesh, p.table, sigma0);
    CHECK(max_asymmetry(S) < 1e-11);
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd v(S.rows());
      for (int i = 0; i < v.size(); ++i) v[i] = dist(gen);
      v.normalize();
      CHECK(v.dot(S * v) >= -1e-11);
    }
  }
}

TEST_CASE("load vector: constants, zero source, nodal-analytic agreement") {
  SolverConfig cfg;

  // f = 0 gives the zero vector.
  {
    const Problem p = make_problem(10, InterfaceGeometry::none(), 1.0, 1.0);
    const auto b = assemble_load(p.mesh, p.table, cfg, SourceSpec::analytic([](Vec2) { return 0.0; }));
    CHECK(b.cwiseAbs().maxCoeff() == 0.0);
  }
  // f = 3: interior entry is 3 * (support area)/3 = 3 h^2 (six triangles of
  // area h^2/2 around an interior node).
  {
    const Problem p = make_problem(10, InterfaceGeometry::none(), 1.0, 1.0);
    const auto b = assemble_load(p.mesh, p.table, cfg, SourceSpec::analytic([](Vec2) { return 3.0; }));
    const double h = p.grid.hx();
    CHECK(b[p.grid.node_id(5, 5)] == doctest::Approx(3.0 * h * h).epsilon(1e-12));
    // Corner (0,0) lies on the cell diagonal: two triangles, patch area h^2.
    CHECK(b[p.grid.node_id(0, 0)] == doctest::Approx(3.0 * h * h / 3.0).epsilon(1e-12));
    // Corner (nx,0) touches only one triangle: patch area h^2/2.
    CHECK(b[p.grid.node_id(10, 0)] == doctest::Approx(3.0 * h * h / 6.0).epsilon(1e-12));
  }
  // A constant fed through the nodal route must match the analytic route
  // even across interface triangles.
  {
    const Problem p = make_problem(20, bench_circle(), 1.0, 10.0);
    const auto ba = assemble_load(p.mesh, p.table, cfg, SourceSpec::analytic([](Vec2) { return -4.0; }));
    SolverConfig ncfg = cfg;
    ncfg.rhs_mode = RhsMode::NodalDensity;
    std::vector<double> nodal(p.grid.node_count(), -4.0);
    const auto bn = assemble_load(p.mesh, p.table, ncfg, SourceSpec::nodal(nodal));
    CHECK((ba - bn).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  cfg.epsilon = 2;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.epsilon = 1;
  cfg.sigma0 = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.sigma0 = 0.0;  // allowed only with epsilon = +1
  CHECK_NOTHROW(validate_config(cfg));
  cfg.epsilon = -1;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.epsilon = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SolverConfig{};
  cfg.linear_tol = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg.linear_tol = 1.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = SolverConfig{};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
}

TEST_CASE("solve handles a hand-built diagonal system") {
  SparseSystem sys;
  sys.A.resize(3, 3);
  sys.A.insert(0, 0) = 2.0;
  sys.A.insert(1, 1) = 3.0;
  sys.A.insert(2, 2) = 4.0;
  sys.A.makeCompressed();
  sys.b.resize(3);
  sys.b << 2.0, 3.0, 4.0;
  sys.free_of_global = {0, 1, 2};
  sys.global_of_free = {0, 1, 2};
  sys.boundary_value = {0.0, 0.0, 0.0};

  SolverConfig cfg;
  cfg.scheme = Scheme::Galerkin;  // conjugate-gradient path
  const FieldSolution sol = solve(sys, cfg);
  REQUIRE(sol.phi.size() == 3);
  CHECK(sol.phi[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.phi[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.phi[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.residual <= cfg.linear_tol);
}

TEST_CASE("iteration starvation is reported, not hidden") {
  const Problem p = make_problem(20, bench_circle(), 1.0, 10.0);
  SolverConfig cfg;
  cfg.scheme = Scheme::Galerkin;
  cfg.max_iterations = 1;
  const ExactSolution exact;
  bool threw = false;
  try {
    solve_field(p.mesh, p.table, cfg, SourceSpec::analytic([&](Vec2 q) { return exact.source(q); }),
                [&](Vec2 q) { return exact.boundary(q); });
  } catch (const Error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("patch test: globally linear solutions are reproduced") {
  const auto u = [](Vec2 q) { return 1.0 + 2.0 * q.x - 3.0 * q.y; };
  struct Case {
    Scheme scheme;
    int epsilon;
    InterfaceGeometry geom;
  };
  const Case cases[] = {
      {Scheme::Galerkin, 1, InterfaceGeometry::none()},
      {Scheme::Galerkin, 1, bench_circle()},
      {Scheme::Ppife, 1, bench_circle()},
      {Scheme::Ppife, -1, bench_circle()},
      {Scheme::Ppife, 0, bench_circle()},
  };
  for (const Case& c : cases) {
    // beta continuous: the interface is immaterial and u is in the space.
    const Problem p = make_problem(16, c.geom, 1.0, 1.0);
    SolverConfig cfg;
    cfg.scheme = c.scheme;
    cfg.epsilon = c.epsilon;
    const FieldSolution sol =
        solve_field(p.mesh, p.table, cfg, SourceSpec::analytic([](Vec2) { return 0.0; }), u);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.phi.size(); ++i) {
      const Vec2 q = p.mesh.node_pos(static_cast<int>(i));
      worst = std::max(worst, std::abs(sol.phi[i] - u(q)));
    }
    CHECK(worst < 1e-9);
    // Dirichlet rows carry g exactly.
    CHECK(sol.phi[p.grid.node_id(0, 0)] == u(p.grid.node_pos(0, 0)));
  }
}

TEST_CASE("manufactured no-interface problem converges at second order") {
  const auto u = [](Vec2 q) { return q.x * q.x + q.y * q.y; };
  SolverConfig cfg;
  cfg.scheme = Scheme::Galerkin;
  double e10 = 0.0, e20 = 0.0;
  for (const int n : {10, 20}) {
    const Problem p = make_problem(n, InterfaceGeometry::none(), 1.0, 1.0);
    const FieldSolution sol =
        solve_field(p.mesh, p.table, cfg, SourceSpec::analytic([](Vec2) { return -4.0; }), u);
    const double e = compute_l2_error(sol.phi, u, p.mesh, p.table);
    (n == 10 ? e10 : e20) = e;
  }
  CHECK(e10 / e20 > 3.5);
  CHECK(e10 / e20 < 4.5);
}

TEST_CASE("benchmark interface problem: error magnitudes per scheme") {
  const ExactSolution exact;
  exact.self_check();
  const auto src = [&](Vec2 q) { return exact.source(q); };
  const auto bnd = [&](Vec2 q) { return exact.boundary(q); };
  const Problem p = make_problem(40, bench_circle(), 1.0, 10.0);

  // With an analytic source (no deposit noise) the classical scheme lands
  // around 4e-4 here; the pipeline gap in the tables comes from the deposit.
  SolverConfig galerkin;
  galerkin.scheme = Scheme::Galerkin;
  const FieldSolution sg = solve_field(p.mesh, p.table, galerkin, SourceSpec::analytic(src), bnd);
  const double eg = compute_l2_error(sg.phi, exact, p.mesh, p.table);
  CHECK(eg > 2.0e-4);
  CHECK(eg < 8.0e-4);

  SolverConfig ppife;  // defaults: Ppife, epsilon=+1, sigma0=10
  const FieldSolution sp = solve_field(p.mesh, p.table, ppife, SourceSpec::analytic(src), bnd);
  const double ep = compute_l2_error(sp.phi, exact, p.mesh, p.table);
  CHECK(ep > 2.7e-4);
  CHECK(ep < 1.08e-3);

  SolverConfig sym = ppife;
  sym.epsilon = -1;  // conjugate-gradient path on the penalized system
  const FieldSolution ss = solve_field(p.mesh, p.table, sym, SourceSpec::analytic(src), bnd);
  const double es = compute_l2_error(ss.phi, exact, p.mesh, p.table);
  CHECK(es < 1.5e-3);
  CHECK(ss.residual <= sym.linear_tol);
}

TEST_CASE("matrix dump is a parsable coordinate listing") {
  Eigen::SparseMatrix<double> A(2, 2);
  A.insert(0, 0) = 0.1;
  A.insert(1, 0) = -2.5;
  A.insert(1, 1) = 1.0 / 3.0;
  A.makeCompressed();
  const std::string path = "dump_test.txt";
  dump_matrix(A, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  int rows = 0;
  bool found_third = false;
  std::string line;
  int r, c;
  double v;
  std::ifstream again(path);
  while (std::getline(again, line)) {
    if (line.empty()) continue;
    ++rows;
    REQUIRE(std::sscanf(line.c_str(), "%d %d %lf", &r, &c, &v) == 3);
    if (r == 1 && c == 1) {
      found_third = true;
      CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
  }
  CHECK(rows == static_cast<int>(A.nonZeros()));
  CHECK(found_third);
  std::remove(path.c_str());
}

}  // TEST_SUITE
