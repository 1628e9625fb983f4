#include "ifepic/driver.hpp"

#include <cmath>
#include <string>

#include "ifepic/quadrature.hpp"

namespace ifepic {

double ExactSolution::value(Vec2 p) const {
  const Vec2 d = p - center;
  const double r2 = dot(d, d);
  if (std::sqrt(r2) <= r0)
    return r2 / beta_minus + (1.0 / beta_plus - 1.0 / beta_minus) * r0 * r0;
  return r2 / beta_plus;
}

Vec2 ExactSolution::gradient(Vec2 p) const {
  const Vec2 d = p - center;
  const double beta = norm(d) <= r0 ? beta_minus : beta_plus;
  return (2.0 / beta) * d;
}

double ExactSolution::source(Vec2) const { return -4.0; }

void ExactSolution::self_check(int samples) const {
  if (beta_minus <= 0.0 || beta_plus <= 0.0)
    throw Error("exact solution: conductivities must be positive");
  if (r0 <= 0.0) return;  // no interface to check
  const double val_in = r0 * r0 / beta_minus + (1.0 / beta_plus - 1.0 / beta_minus) * r0 * r0;
  const double val_out = r0 * r0 / beta_plus;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * kPi * k / samples;
    const Vec2 n{std::cos(th), std::sin(th)};
    const Vec2 p = center + r0 * n;
    if (std::abs(val_in - val_out) > 1e-12)
      throw Error("exact solution: value jump on the interface");
    const Vec2 gi = (2.0 / beta_minus) * (p - center);
    const Vec2 go = (2.0 / beta_plus) * (p - center);
    if (std::abs(beta_minus * dot(gi, n) - beta_plus * dot(go, n)) > 1e-12)
      throw Error("exact solution: flux jump on the interface");
  }
}

DensityMetrics compute_density_metrics(const DepositResult& dep, const TriangulatedMesh& mesh,
                                       double rho) {
  const CartesianGrid& grid = mesh.grid;
  if (static_cast<int>(dep.density.size()) != grid.node_count())
    throw Error("compute_density_metrics: density missing; run charge_to_density first");
  if (rho == 0.0) throw Error("compute_density_metrics: target density must be nonzero");

  std::vector<std::uint8_t> candidate(grid.node_count(), 0);
  bool any_mixed = false;
  for (int cj = 0; cj < grid.ny; ++cj)
    for (int ci = 0; ci < grid.nx; ++ci) {
      if (!mesh.cell_mixed(ci, cj)) continue;
      any_mixed = true;
      const int ids[4] = {grid.node_id(ci, cj), grid.node_id(ci + 1, cj),
                          grid.node_id(ci + 1, cj + 1), grid.node_id(ci, cj + 1)};
      for (int id : ids)
        if (!mesh.is_node_minus(id)) candidate[id] = 1;
    }
  if (!any_mixed) throw Error("compute_density_metrics: mesh has no interface cells");

  double sum_dev = 0.0, sum_all = 0.0;
  int n_dev = 0, n_all = 0;
  const double tol = 1e-9 * std::abs(rho);
  for (int id = 0; id < grid.node_count(); ++id) {
    if (!candidate[id]) continue;
    ++n_all;
    sum_all += dep.density[id];
    if (std::abs(dep.density[id] - rho) > tol) {
      ++n_dev;
      sum_dev += dep.density[id];
    }
  }
  if (n_all == 0) throw Error("compute_density_metrics: interface-node set is empty");

  DensityMetrics m;
  if (n_dev > 0) {
    m.rho_bar = sum_dev / n_dev;
    m.node_count = n_dev;
  } else {
    // Deposit exact on every interface node; the mean is the target itself.
    m.rho_bar = sum_all / n_all;
    m.node_count = n_all;
  }
  m.err = std::abs(rho - m.rho_bar) / std::abs(rho);
  return m;
}

double compute_l2_error(const std::vector<double>& phi, const std::function<double(Vec2)>& u,
                        const TriangulatedMesh& mesh, const BasisTable& table) {
  if (static_cast<int>(phi.size()) != mesh.grid.node_count())
    throw Error("compute_l2_error: solution array does not match node count");
  double acc = 0.0;
  for (const Triangle& t : mesh.triangles) {
    const auto v = mesh.tri_coords(t);
    if (t.cls != TriClass::Interface) {
      const auto b = p1_basis(v);
      const PhysQuad q = triangle_quadrature(v[0], v[1], v[2]);
      for (std::size_t qi = 0; qi < q.pts.size(); ++qi) {
        double uh = 0.0;
        for (int k = 0; k < 3; ++k) uh += phi[t.n[k]] * b[k].eval(q.pts[qi]);
        const double d = u(q.pts[qi]) - uh;
        acc += q.w[qi] * d * d;
      }
    } else {
      const InterfaceCut& cut = mesh.cuts[t.cut];
      const IFELocalBasis& ib = table.by_cut[t.cut];
      for (int side = 0; side < 2; ++side) {
        const bool minus = side == 0;
        const PhysQuad q = polygon_quadrature(minus ? cut.poly_minus : cut.poly_plus);
        for (std::size_t qi = 0; qi < q.pts.size(); ++qi) {
          double uh = 0.0;
          for (int k = 0; k < 3; ++k) uh += phi[t.n[k]] * eval(ib, k, q.pts[qi], minus);
          const double d = u(q.pts[qi]) - uh;
          acc += q.w[qi] * d * d;
        }
      }
    }
  }
  return std::sqrt(acc);
}

double compute_l2_error(const std::vector<double>& phi, const ExactSolution& exact,
                        const TriangulatedMesh& mesh, const BasisTable& table) {
  return compute_l2_error(
      phi, [&exact](Vec2 p) { return exact.value(p); }, mesh, table);
}

std::vector<double> density_source(const std::vector<double>& density,
                                   const TriangulatedMesh& mesh, double rho) {
  if (density.size() != mesh.node_minus.size())
    throw Error("density_source: array does not match node count");
  std::vector<double> out = density;
  for (std::size_t id = 0; id < out.size(); ++id)
    if (mesh.is_node_minus(static_cast<int>(id))) out[id] = rho;
  return out;
}

double least_squares_rate(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  if (n != err.size() || n < 2)
    throw Error("least_squares_rate: need two or more matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (h[i] <= 0.0 || err[i] <= 0.0)
      throw Error("least_squares_rate: mesh sizes and errors must be positive");
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err[i]) - my);
  }
  if (sxx == 0.0) throw Error("least_squares_rate: all mesh sizes equal");
  return sxy / sxx;
}

namespace {

int per_cell_side(int n) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (k <= 0 || k * k != n)
    throw Error("per-cell particle count " + std::to_string(n) +
                " is not a positive perfect square");
  return k;
}

void check_conservation(const DepositResult& dep, const ParticleSet& ps) {
  double total = 0.0;
  for (double q : dep.charge) total += q;
  const double ref = ps.active_charge();
  if (std::abs(total - ref) > 1e-12 * std::max(1.0, std::abs(ref)))
    throw Error("improved deposit failed charge conservation: deposited " +
                std::to_string(total) + " vs particles " + std::to_string(ref));
}

}  // namespace

std::vector<Table1Row> run_table1(const BenchmarkSpec& spec) {
  const CartesianGrid grid = CartesianGrid::square(spec.mesh);
  const InterfaceGeometry geom = InterfaceGeometry::circle(spec.center, spec.radius);
  const TriangulatedMesh mesh = build_mesh(grid, geom);
  std::vector<Table1Row> rows;
  for (int n : spec.particle_counts) {
    const int k = per_cell_side(n);
    const ParticleSet ps = load_uniform(grid, geom, LoadPattern::per_cell(k), spec.rho);
    DepositResult ds = deposit_standard(ps, grid, geom);
    charge_to_density(ds, grid);
    const DensityMetrics ms = compute_density_metrics(ds, mesh, spec.rho);
    DepositResult di = deposit_improved(ps, grid, geom);
    check_conservation(di, ps);
    charge_to_density(di, grid);
    const DensityMetrics mi = compute_density_metrics(di, mesh, spec.rho);
    rows.push_back({n, ms.rho_bar, ms.err, mi.rho_bar, mi.err});
  }
  return rows;
}

namespace {

struct PipelinePair {
  double err_trad = 0.0, err_imp = 0.0;
};

// Shared by tables 2 and 3: deposit with both modes, solve the
// density-driven system (classical scheme for the traditional pipeline, the
// penalized scheme for the improved one), measure the L2 potential error.
PipelinePair run_pipelines(const TriangulatedMesh& mesh, const BasisTable& table,
                           const BenchmarkSpec& spec, const ExactSolution& exact,
                           const ParticleSet& ps) {
  const CartesianGrid& grid = mesh.grid;
  const InterfaceGeometry& geom = mesh.geom;
  auto g = [&exact](Vec2 p) { return exact.boundary(p); };
  PipelinePair out;

  DepositResult ds = deposit_standard(ps, grid, geom);
  charge_to_density(ds, grid);
  SolverConfig trad = spec.solver;
  trad.scheme = Scheme::Galerkin;
  trad.rhs_mode = RhsMode::NodalDensity;
  const FieldSolution fs = solve_field(
      mesh, table, trad, SourceSpec::nodal(density_source(ds.density, mesh, spec.rho)), g);
  out.err_trad = compute_l2_error(fs.phi, exact, mesh, table);

  DepositResult di = deposit_improved(ps, grid, geom);
  check_conservation(di, ps);
  charge_to_density(di, grid);
  SolverConfig imp = spec.solver;
  imp.scheme = Scheme::Ppife;
  imp.rhs_mode = RhsMode::NodalDensity;
  const FieldSolution fi = solve_field(
      mesh, table, imp, SourceSpec::nodal(density_source(di.density, mesh, spec.rho)), g);
  out.err_imp = compute_l2_error(fi.phi, exact, mesh, table);
  return out;
}

}  // namespace

std::vector<Table2Row> run_table2(const BenchmarkSpec& spec) {
  const ExactSolution exact{spec.beta_minus, spec.beta_plus, spec.center, spec.radius};
  exact.self_check();
  const CartesianGrid grid = CartesianGrid::square(spec.mesh);
  const InterfaceGeometry geom = InterfaceGeometry::circle(spec.center, spec.radius);
  TriangulatedMesh mesh = build_mesh(grid, geom);
  const BasisTable table = build_basis_table(mesh, spec.beta_minus, spec.beta_plus);
  std::vector<Table2Row> rows;
  for (int n : spec.particle_counts) {
    const int k = per_cell_side(n);
    const ParticleSet ps = load_uniform(grid, geom, LoadPattern::per_cell(k), spec.rho);
    const PipelinePair pair = run_pipelines(mesh, table, spec, exact, ps);
    rows.push_back({n, pair.err_trad, pair.err_imp});
  }
  return rows;
}

Table3Result run_table3(const BenchmarkSpec& spec) {
  const ExactSolution exact{spec.beta_minus, spec.beta_plus, spec.center, spec.radius};
  exact.self_check();
  if (spec.global_m <= 0) throw Error("run_table3: global particle lattice must be positive");
  Table3Result res;
  std::vector<double> hs;
  for (int n : spec.mesh_sizes) {
    const CartesianGrid grid = CartesianGrid::square(n);
    const InterfaceGeometry geom = InterfaceGeometry::circle(spec.center, spec.radius);
    TriangulatedMesh mesh = build_mesh(grid, geom);
    const BasisTable table = build_basis_table(mesh, spec.beta_minus, spec.beta_plus);
    const ParticleSet ps = load_uniform(grid, geom, LoadPattern::global(spec.global_m), spec.rho);
    const PipelinePair pair = run_pipelines(mesh, table, spec, exact, ps);
    res.meshes.push_back(n);
    res.err_trad.push_back(pair.err_trad);
    res.err_imp.push_back(pair.err_imp);
    hs.push_back(grid.hx());
  }
  res.rate_trad = least_squares_rate(hs, res.err_trad);
  res.rate_imp = least_squares_rate(hs, res.err_imp);
  return res;
}

CycleResult run_cycle(const CycleConfig& cfg) {
  validate_config(cfg.solver);
  if (cfg.steps < 0) throw Error("run_cycle: step count must be nonnegative");
  const CartesianGrid grid = CartesianGrid::square(cfg.mesh);
  const InterfaceGeometry geom = cfg.radius > 0.0
                                     ? InterfaceGeometry::circle(cfg.center, cfg.radius)
                                     : InterfaceGeometry::none();
  TriangulatedMesh mesh = build_mesh(grid, geom);
  const BasisTable table = build_basis_table(mesh, cfg.beta_minus, cfg.beta_plus);
  const ExactSolution exact{cfg.beta_minus, cfg.beta_plus, cfg.center,
                            cfg.radius > 0.0 ? cfg.radius : 0.0};
  auto g = [&exact](Vec2 p) { return exact.boundary(p); };

  ParticleSet ps = load_uniform(grid, geom, cfg.pattern, cfg.rho, cfg.mass);

  auto do_deposit = [&]() {
    DepositResult dep = cfg.deposit == DepositMode::Improved
                            ? deposit_improved(ps, grid, geom)
                            : deposit_standard(ps, grid, geom);
    if (cfg.deposit == DepositMode::Improved) check_conservation(dep, ps);
    charge_to_density(dep, grid);
    return dep;
  };
  auto do_solve = [&](const DepositResult& dep) {
    SolverConfig sc = cfg.solver;
    sc.rhs_mode = RhsMode::NodalDensity;
    return solve_field(mesh, table, sc, SourceSpec::nodal(dep.density), g);
  };

  CycleResult out;
  for (int step = 1; step <= cfg.steps; ++step) {
    const DepositResult dep = do_deposit();
    FieldSolution field;
    try {
      field = do_solve(dep);
    } catch (const Error& e) {
      throw Error("cycle step " + std::to_string(step) + ": " + e.what());
    }
    std::vector<Vec2> E(ps.size(), Vec2{});
    if (cfg.gather == GatherMode::Fd) {
      const FieldAtNodes f = nodal_field_fd(field.phi, grid);
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps.active[i]) E[i] = gather_fd(f, grid, ps.pos[i]);
    } else {
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps.active[i]) E[i] = gather_ife(field.phi, mesh, table, ps.pos[i]);
    }
    push_boris(ps, E, cfg.bz, cfg.dt, grid, geom);
    double deposited = 0.0;
    for (double q : dep.charge) deposited += q;
    out.stats.push_back({step, ps.active_count(), deposited, field.residual});
  }

  DepositResult dep = do_deposit();
  out.field = do_solve(dep);
  out.density = dep.density;
  out.particles = std::move(ps);
  return out;
}

}  // namespace ifepic
