#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ifepic/ife_basis.hpp"
#include "ifepic/mesh.hpp"

namespace ifepic {

struct ParticleSet {
  std::vector<Vec2> pos, vel;
  std::vector<double> charge, mass;
  std::vector<std::uint8_t> active;
  std::size_t size() const { return pos.size(); }
  int active_count() const;
  double active_charge() const;
};

// Deterministic uniform loadings: PerCell places a cell-centered k x k
// sub-lattice in every cell; Global places an m x m lattice spanning the
// domain interior with spacing (side length)/(m+1).
struct LoadPattern {
  enum class Kind { PerCell, Global };
  Kind kind = Kind::PerCell;
  int count = 1;
  static LoadPattern per_cell(int k) { return {Kind::PerCell, k}; }
  static LoadPattern global(int m) { return {Kind::Global, m}; }
};

// Loads the pattern, removes particles inside the conductor, and sets the
// per-particle charge so that a full uniform cloud reproduces the target
// density rho at interior nodes.
ParticleSet load_uniform(const CartesianGrid& grid, const InterfaceGeometry& geom,
                         const LoadPattern& pattern, double rho, double mass = 1.0);

enum class DepositMode { Standard, Improved };

// Inside-corner weight shares moved to the outside corners in proportion to
// their weights (equal split when those weights vanish); inside entries come
// back zero, the total is preserved. One formula covering every mixed-corner
// case. Errors when all four corners are inside.
std::array<double, 4> redistribute_weights(const std::array<double, 4>& w,
                                           const std::array<bool, 4>& inside);

struct DepositResult {
  std::vector<double> charge;   // nodal charge, all (nx+1)(ny+1) nodes
  std::vector<double> density;  // filled by charge_to_density
  DepositMode mode = DepositMode::Standard;
  double lost_charge = 0.0;     // standard mode: charge landing on conductor nodes
};

// Area-weight deposit to the particle's cell corners. Charge landing on
// conductor nodes stays recorded but is tallied as lost.
DepositResult deposit_standard(const ParticleSet& particles, const CartesianGrid& grid,
                               const InterfaceGeometry& geom);

// Standard deposit followed, in cells with conductor corners, by moving each
// particle's inside-corner share to the outside corners in proportion to
// their weights; conserves the particle's charge exactly.
DepositResult deposit_improved(const ParticleSet& particles, const CartesianGrid& grid,
                               const InterfaceGeometry& geom);

// Nodal density q/V with the control volume clipped by the domain boundary
// only: hx*hy interior, half on boundary edges, quarter at corners.
const std::vector<double>& charge_to_density(DepositResult& dep, const CartesianGrid& grid);

struct FieldAtNodes {
  std::vector<double> ex, ey;
};

// E = -grad(phi) by central differences, second-order one-sided stencils on
// the domain boundary.
FieldAtNodes nodal_field_fd(const std::vector<double>& phi, const CartesianGrid& grid);

// Bilinear interpolation of the nodal field to a position.
Vec2 gather_fd(const FieldAtNodes& field, const CartesianGrid& grid, Vec2 p);
Vec2 gather_fd(const std::vector<double>& phi, const CartesianGrid& grid, Vec2 p);

// E from the gradient of the located triangle's shape functions on the
// particle's side. Errors if the position lies inside the conductor.
Vec2 gather_ife(const std::vector<double>& phi, const TriangulatedMesh& mesh,
                const BasisTable& table, Vec2 p);

// Boris step with a static out-of-plane magnetic field Bz: half electric
// kick, rotation, half kick, drift. Particles leaving the domain or entering
// the conductor are deactivated.
void push_boris(ParticleSet& particles, const std::vector<Vec2>& E_at_particles, double Bz,
                double dt, const CartesianGrid& grid, const InterfaceGeometry& geom);

}  // namespace ifepic
