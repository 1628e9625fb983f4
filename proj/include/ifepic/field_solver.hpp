#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <string>
#include <vector>

#include "ifepic/ife_basis.hpp"
#include "ifepic/mesh.hpp"

namespace ifepic {

enum class Scheme { Galerkin, Ppife };
enum class RhsMode { Analytic, NodalDensity };

struct SolverConfig {
  Scheme scheme = Scheme::Ppife;
  int epsilon = 1;        // -1 symmetric, 0 incomplete, +1 nonsymmetric
  double sigma0 = 10.0;   // penalty scale; sigma_e = sigma0 * max(beta-, beta+)
  double linear_tol = 1e-10;
  int max_iterations = 20000;
  RhsMode rhs_mode = RhsMode::Analytic;
};

// Throws on invalid combinations (epsilon outside {-1,0,1}, sigma0 < 0,
// sigma0 = 0 with epsilon in {-1,0}, linear_tol outside (0,1)).
void validate_config(const SolverConfig& cfg);

struct SourceSpec {
  std::function<double(Vec2)> f;      // used when rhs_mode = Analytic
  std::vector<double> nodal_values;   // used when rhs_mode = NodalDensity
  static SourceSpec analytic(std::function<double(Vec2)> f);
  static SourceSpec nodal(std::vector<double> values);
};

// Stiffness part sum_T int_T beta grad(u).grad(v); exact since gradients are
// piecewise constant. Full node set, no boundary treatment.
Eigen::SparseMatrix<double> assemble_volume(const TriangulatedMesh& mesh,
                                            const BasisTable& table);

// Interface-edge terms of the penalized scheme:
//   -int_e {beta grad(u).n}[v] + epsilon int_e {beta grad(v).n}[u]
//   + (sigma_e/|e|) int_e [u][v]
// Jumps vanish identically on noninterface edges, so only interface edges
// are visited.
Eigen::SparseMatrix<double> assemble_penalty(const TriangulatedMesh& mesh,
                                             const BasisTable& table,
                                             const SolverConfig& cfg);

// The stabilization term alone: (sigma_e/|e|) int_e [u][v].
Eigen::SparseMatrix<double> assemble_stabilization(const TriangulatedMesh& mesh,
                                                   const BasisTable& table, double sigma0);

// Load vector int f v. Analytic: quadrature per sub-region. NodalDensity: f
// replaced by the continuous piecewise-linear interpolant of the nodal
// values, integrated exactly.
Eigen::VectorXd assemble_load(const TriangulatedMesh& mesh, const BasisTable& table,
                              const SolverConfig& cfg, const SourceSpec& source);

// System over free (non-boundary) nodes after Dirichlet elimination.
struct SparseSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<int> free_of_global;     // -1 at boundary nodes
  std::vector<int> global_of_free;
  std::vector<double> boundary_value;  // per global node, 0 at free nodes
};

SparseSystem reduce_dirichlet(const TriangulatedMesh& mesh,
                              const Eigen::SparseMatrix<double>& A,
                              const Eigen::VectorXd& load,
                              const std::function<double(Vec2)>& g);

struct FieldSolution {
  std::vector<double> phi;   // all nodes; boundary nodes carry g exactly
  double residual = 0.0;     // achieved |Ax-b|/|b| on the free system
  int iterations = 0;        // 0 for the direct path
};

// Conjugate gradient for the symmetric schemes (Galerkin, epsilon=-1),
// sparse LU otherwise; always verifies the residual bound explicitly.
FieldSolution solve(const SparseSystem& system, const SolverConfig& cfg);

// Assemble + reduce + solve.
FieldSolution solve_field(const TriangulatedMesh& mesh, const BasisTable& table,
                          const SolverConfig& cfg, const SourceSpec& source,
                          const std::function<double(Vec2)>& g);

// Coordinate text dump, one "row col value" line per entry, 0-based.
void dump_matrix(const Eigen::SparseMatrix<double>& A, const std::string& path);

}  // namespace ifepic
