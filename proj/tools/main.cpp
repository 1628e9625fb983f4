#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ifepic/io.hpp"

namespace {

using namespace ifepic;

struct Options {
  int mesh = 40;
  double beta_minus = 1.0;
  double beta_plus = 10.0;
  int epsilon = 1;
  double sigma = 10.0;
  std::string deposit = "improved";
  std::string gather = "ife";
  std::string scheme = "ppife";
  int particles_per_cell = 1;
  int global_count = 0;  // > 0 switches to the global lattice loading
  double dt = 0.01;
  int steps = 1;
  std::string out = ".";
  std::string config_file;
  std::string dump_path;
  long seed = 0;  // reserved; the loaders are deterministic
};

DepositMode to_deposit(const std::string& s) {
  if (s == "standard") return DepositMode::Standard;
  if (s == "improved") return DepositMode::Improved;
  throw Error("deposit mode must be standard or improved, got " + s);
}

GatherMode to_gather(const std::string& s) {
  if (s == "fd") return GatherMode::Fd;
  if (s == "ife") return GatherMode::Ife;
  throw Error("gather mode must be fd or ife, got " + s);
}

Scheme to_scheme(const std::string& s) {
  if (s == "galerkin") return Scheme::Galerkin;
  if (s == "ppife") return Scheme::Ppife;
  throw Error("scheme must be galerkin or ppife, got " + s);
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  int r = 0;
  try {
    r = std::stoi(v, &used);
  } catch (const std::exception&) {
    throw Error("config: bad integer for " + key + ": " + v);
  }
  if (used != v.size()) throw Error("config: bad integer for " + key + ": " + v);
  return r;
}

double parse_num(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double r = 0.0;
  try {
    r = std::stod(v, &used);
  } catch (const std::exception&) {
    throw Error("config: bad number for " + key + ": " + v);
  }
  if (used != v.size()) throw Error("config: bad number for " + key + ": " + v);
  return r;
}

void apply_config(Options& o, const std::map<std::string, CLI::Option*>& flags) {
  std::map<std::string, std::function<void(const std::string&)>> set = {
      {"mesh", [&](const std::string& v) { o.mesh = parse_int("mesh", v); }},
      {"beta-minus", [&](const std::string& v) { o.beta_minus = parse_num("beta-minus", v); }},
      {"beta-plus", [&](const std::string& v) { o.beta_plus = parse_num("beta-plus", v); }},
      {"epsilon", [&](const std::string& v) { o.epsilon = parse_int("epsilon", v); }},
      {"sigma", [&](const std::string& v) { o.sigma = parse_num("sigma", v); }},
      {"deposit", [&](const std::string& v) { o.deposit = v; }},
      {"gather", [&](const std::string& v) { o.gather = v; }},
      {"scheme", [&](const std::string& v) { o.scheme = v; }},
      {"particles-per-cell",
       [&](const std::string& v) { o.particles_per_cell = parse_int("particles-per-cell", v); }},
      {"global-count", [&](const std::string& v) { o.global_count = parse_int("global-count", v); }},
      {"dt", [&](const std::string& v) { o.dt = parse_num("dt", v); }},
      {"steps", [&](const std::string& v) { o.steps = parse_int("steps", v); }},
      {"out", [&](const std::string& v) { o.out = v; }},
      {"seed", [&](const std::string& v) { o.seed = parse_int("seed", v); }},
  };
  for (const auto& [key, value] : read_config_file(o.config_file)) {
    auto it = set.find(key);
    if (it == set.end()) throw Error("config: unknown key " + key);
    if (flags.at(key)->count() > 0) continue;  // explicit flag wins
    it->second(value);
  }
}

void validate_options(const Options& o) {
  if (o.mesh < 2) throw Error("mesh must have at least 2 cells per side");
  if (o.beta_minus <= 0.0 || o.beta_plus <= 0.0) throw Error("conductivities must be positive");
  if (o.particles_per_cell < 1) throw Error("particles per cell must be positive");
  if (o.global_count < 0) throw Error("global particle count must be nonnegative");
  if (o.dt < 0.0) throw Error("dt must be nonnegative");
  if (o.steps < 0) throw Error("steps must be nonnegative");
  to_deposit(o.deposit);
  to_gather(o.gather);
  to_scheme(o.scheme);
}

SolverConfig solver_from(const Options& o) {
  SolverConfig sc;
  sc.scheme = to_scheme(o.scheme);
  sc.epsilon = o.epsilon;
  sc.sigma0 = o.sigma;
  validate_config(sc);
  return sc;
}

std::string out_path(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  return (std::filesystem::path(o.out) / name).string();
}

LoadPattern pattern_from(const Options& o) {
  return o.global_count > 0 ? LoadPattern::global(o.global_count)
                            : LoadPattern::per_cell(o.particles_per_cell);
}

void run_solve(const Options& o) {
  const CartesianGrid grid = CartesianGrid::square(o.mesh);
  const InterfaceGeometry geom = InterfaceGeometry::circle({0.0, 0.0}, kPi / 12.0);
  TriangulatedMesh mesh = build_mesh(grid, geom);
  const BasisTable table = build_basis_table(mesh, o.beta_minus, o.beta_plus);
  const ExactSolution exact{o.beta_minus, o.beta_plus, {0.0, 0.0}, kPi / 12.0};
  exact.self_check();
  SolverConfig sc = solver_from(o);
  sc.rhs_mode = RhsMode::Analytic;
  const SourceSpec src = SourceSpec::analytic([exact](Vec2 p) { return exact.source(p); });
  auto g = [&exact](Vec2 p) { return exact.boundary(p); };
  const FieldSolution f = solve_field(mesh, table, sc, src, g);
  if (!o.dump_path.empty()) {
    Eigen::SparseMatrix<double> A = assemble_volume(mesh, table);
    if (sc.scheme == Scheme::Ppife) {
      const Eigen::SparseMatrix<double> P = assemble_penalty(mesh, table, sc);
      A = A + P;
    }
    const SparseSystem sys = reduce_dirichlet(mesh, A, assemble_load(mesh, table, sc, src), g);
    dump_matrix(sys.A, o.dump_path);
  }
  export_nodal_field(f.phi, grid, out_path(o, "phi.csv"));
  std::vector<double> err(f.phi.size());
  for (int id = 0; id < grid.node_count(); ++id)
    err[id] = std::abs(f.phi[id] - exact.value(mesh.node_pos(id)));
  export_nodal_field(err, grid, out_path(o, "phi_error.csv"));
  std::printf("solve: mesh %dx%d scheme %s residual %.3e iterations %d\n", o.mesh, o.mesh,
              o.scheme.c_str(), f.residual, f.iterations);
  std::printf("solve: L2 error vs closed form %.6e\n",
              compute_l2_error(f.phi, exact, mesh, table));
}

void run_deposit(const Options& o) {
  const double rho = -4.0;
  const CartesianGrid grid = CartesianGrid::square(o.mesh);
  const InterfaceGeometry geom = InterfaceGeometry::circle({0.0, 0.0}, kPi / 12.0);
  const TriangulatedMesh mesh = build_mesh(grid, geom);
  const ParticleSet ps = load_uniform(grid, geom, pattern_from(o), rho);
  DepositResult dep = to_deposit(o.deposit) == DepositMode::Improved
                          ? deposit_improved(ps, grid, geom)
                          : deposit_standard(ps, grid, geom);
  double total = 0.0;
  for (double q : dep.charge) total += q;
  const double ref = ps.active_charge();
  if (dep.mode == DepositMode::Improved &&
      std::abs(total - ref) > 1e-12 * std::max(1.0, std::abs(ref)))
    throw Error("improved deposit failed charge conservation");
  charge_to_density(dep, grid);
  const DensityMetrics m = compute_density_metrics(dep, mesh, rho);
  export_nodal_field(dep.density, grid, out_path(o, "density.csv"));
  std::printf("deposit: mesh %dx%d, %d particles, cloud charge %.15g, deposited %.15g\n",
              o.mesh, o.mesh, ps.active_count(), ref, total);
  if (dep.mode == DepositMode::Standard)
    std::printf("deposit: charge on conductor nodes %.15g\n", dep.lost_charge);
  std::printf("deposit: interface-node mean density %.6f, error %.2f%% over %d nodes\n",
              m.rho_bar, 100.0 * m.err, m.node_count);
}

void run_cycle_cmd(const Options& o) {
  CycleConfig cfg;
  cfg.mesh = o.mesh;
  cfg.beta_minus = o.beta_minus;
  cfg.beta_plus = o.beta_plus;
  cfg.pattern = pattern_from(o);
  cfg.deposit = to_deposit(o.deposit);
  cfg.gather = to_gather(o.gather);
  cfg.solver = solver_from(o);
  cfg.dt = o.dt;
  cfg.steps = o.steps;
  const CycleResult res = run_cycle(cfg);
  const CartesianGrid grid = CartesianGrid::square(o.mesh);
  export_nodal_field(res.field.phi, grid, out_path(o, "phi.csv"));
  export_nodal_field(res.density, grid, out_path(o, "density.csv"));
  export_particles(res.particles, out_path(o, "particles.csv"));
  export_step_stats(res.stats, out_path(o, "steps.csv"));
  for (const StepStats& s : res.stats)
    std::printf("step %d: active %d charge %.15g residual %.3e\n", s.step, s.active,
                s.total_charge, s.residual);
  std::printf("cycle: %d steps, %d active particles remain\n", o.steps,
              res.particles.active_count());
}

void run_bench(const Options& o, const std::string& which) {
  BenchmarkSpec spec;
  spec.mesh = o.mesh;
  spec.beta_minus = o.beta_minus;
  spec.beta_plus = o.beta_plus;
  spec.solver = solver_from(o);
  if (o.global_count > 0) spec.global_m = o.global_count;
  if (which == "table1") {
    const std::vector<Table1Row> rows = run_table1(spec);
    export_table1(rows, out_path(o, "table1.csv"));
    std::printf("%6s %14s %9s %14s %9s\n", "N", "rho_bar_std", "err_std", "rho_bar_imp",
                "err_imp");
    for (const Table1Row& r : rows)
      std::printf("%6d %14.6f %8.2f%% %14.6f %8.2f%%\n", r.n, r.rho_std, 100.0 * r.err_std,
                  r.rho_imp, 100.0 * r.err_imp);
  } else if (which == "table2") {
    const std::vector<Table2Row> rows = run_table2(spec);
    export_table2(rows, out_path(o, "table2.csv"));
    std::printf("%6s %14s %14s\n", "N", "err_trad", "err_imp");
    for (const Table2Row& r : rows)
      std::printf("%6d %14.6e %14.6e\n", r.n, r.err_trad, r.err_imp);
  } else {
    const Table3Result res = run_table3(spec);
    export_table3(res, out_path(o, "table3.csv"));
    std::printf("%6s %14s %14s\n", "mesh", "err_trad", "err_imp");
    for (std::size_t i = 0; i < res.meshes.size(); ++i)
      std::printf("%6d %14.6e %14.6e\n", res.meshes[i], res.err_trad[i], res.err_imp[i]);
    std::printf("%6s %14.6f %14.6f\n", "rate", res.rate_trad, res.rate_imp);
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Immersed finite element particle-in-cell benchmark tool"};
  app.fallthrough();
  app.require_subcommand(1);

  std::map<std::string, CLI::Option*> flags;
  flags["mesh"] = app.add_option("--mesh", o.mesh, "Cells per side of the square mesh");
  flags["beta-minus"] =
      app.add_option("--beta-minus", o.beta_minus, "Conductivity inside the conductor");
  flags["beta-plus"] =
      app.add_option("--beta-plus", o.beta_plus, "Conductivity outside the conductor");
  flags["epsilon"] = app.add_option("--epsilon", o.epsilon, "Penalized scheme symmetry: -1, 0, 1");
  flags["sigma"] = app.add_option("--sigma", o.sigma, "Penalty scale");
  flags["deposit"] = app.add_option("--deposit", o.deposit, "standard or improved");
  flags["gather"] = app.add_option("--gather", o.gather, "fd or ife");
  flags["scheme"] = app.add_option("--scheme", o.scheme, "galerkin or ppife");
  flags["particles-per-cell"] =
      app.add_option("--particles-per-cell", o.particles_per_cell, "k*k particles in each cell");
  flags["global-count"] = app.add_option("--global-count", o.global_count,
                                         "Load an m x m domain-wide lattice instead");
  flags["dt"] = app.add_option("--dt", o.dt, "Time step");
  flags["steps"] = app.add_option("--steps", o.steps, "Cycle count");
  flags["out"] = app.add_option("--out", o.out, "Output directory");
  flags["seed"] = app.add_option("--seed", o.seed, "Reserved; loaders are deterministic");
  app.add_option("--config", o.config_file, "File of key = value defaults; flags win");

  CLI::App* cmd_solve = app.add_subcommand("solve", "Field solve with the analytic source");
  cmd_solve->add_option("--dump-matrix", o.dump_path, "Write the reduced matrix, row col value");
  CLI::App* cmd_deposit =
      app.add_subcommand("deposit", "Deposit a uniform cloud and export the density");
  CLI::App* cmd_cycle = app.add_subcommand("cycle", "Run deposit-solve-gather-push cycles");
  CLI::App* cmd_bench = app.add_subcommand("bench", "Reproduce a benchmark table");
  std::string table;
  cmd_bench->add_option("table", table, "table1, table2, or table3")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "table3"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!o.config_file.empty()) apply_config(o, flags);
    validate_options(o);
    if (cmd_solve->parsed()) run_solve(o);
    if (cmd_deposit->parsed()) run_deposit(o);
    if (cmd_cycle->parsed()) run_cycle_cmd(o);
    if (cmd_bench->parsed()) run_bench(o, table);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
