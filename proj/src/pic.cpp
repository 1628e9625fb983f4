#include "ifepic/pic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace ifepic {

int ParticleSet::active_count() const {
  int n = 0;
  for (std::uint8_t a : active) n += a ? 1 : 0;
  return n;
}

double ParticleSet::active_charge() const {
  double q = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (active[i]) q += charge[i];
  return q;
}

ParticleSet load_uniform(const CartesianGrid& grid, const InterfaceGeometry& geom,
                         const LoadPattern& pattern, double rho, double mass) {
  if (pattern.count <= 0) throw Error("load_uniform: pattern count must be positive");
  const double hx = grid.hx(), hy = grid.hy();
  ParticleSet ps;
  auto add = [&](Vec2 p, double q) {
    if (geom(p) < 0.0) return;  // inside the conductor
    ps.pos.push_back(p);
    ps.vel.push_back({0.0, 0.0});
    ps.charge.push_back(q);
    ps.mass.push_back(mass);
    ps.active.push_back(1);
  };
  if (pattern.kind == LoadPattern::Kind::PerCell) {
    const int k = pattern.count;
    const double q = rho * hx * hy / (static_cast<double>(k) * k);
    for (int cj = 0; cj < grid.ny; ++cj)
      for (int ci = 0; ci < grid.nx; ++ci)
        for (int b = 0; b < k; ++b)
          for (int a = 0; a < k; ++a)
            add({grid.xmin + (ci + (a + 0.5) / k) * hx, grid.ymin + (cj + (b + 0.5) / k) * hy},
                q);
  } else {
    const int m = pattern.count;
    const double sx = (grid.xmax - grid.xmin) / (m + 1);
    const double sy = (grid.ymax - grid.ymin) / (m + 1);
    const double q = rho * sx * sy;  // a full interior cell holds hx*hy/(sx*sy) particles
    for (int j = 1; j <= m; ++j)
      for (int i = 1; i <= m; ++i) add({grid.xmin + i * sx, grid.ymin + j * sy}, q);
  }
  return ps;
}

namespace {

struct CellCoords {
  int ci, cj;
  double fx, fy;  // local coordinates in [0, 1]
};

// Same gridline convention as locate: a position exactly on an interior
// gridline belongs to the lower-index cell.
CellCoords cell_coords(const CartesianGrid& g, Vec2 p) {
  if (!g.contains(p)) throw Error("deposit: particle outside domain");
  auto axis = [](double coord, double lo, double h, int n) {
    const double u = (coord - lo) / h;
    int i = static_cast<int>(std::floor(u));
    if (i >= 1 && u == static_cast<double>(i)) --i;
    return std::clamp(i, 0, n - 1);
  };
  CellCoords c{};
  c.ci = axis(p.x, g.xmin, g.hx(), g.nx);
  c.cj = axis(p.y, g.ymin, g.hy(), g.ny);
  c.fx = (p.x - (g.xmin + c.ci * g.hx())) / g.hx();
  c.fy = (p.y - (g.ymin + c.cj * g.hy())) / g.hy();
  return c;
}

int thread_count_from_env(std::size_t work_items) {
  const char* env = std::getenv("IFEPIC_THREADS");
  if (!env) return 1;
  const long req = std::strtol(env, nullptr, 10);
  if (req <= 1) return 1;
  const long cap = static_cast<long>(std::min<std::size_t>(work_items, 64));
  return static_cast<int>(std::min(req, std::max(1L, cap)));
}

void deposit_range(const ParticleSet& particles, const CartesianGrid& grid,
                   const InterfaceGeometry& geom, DepositMode mode, std::size_t begin,
                   std::size_t end, std::vector<double>& charge) {
  const double hx = grid.hx(), hy = grid.hy();
  for (std::size_t pi = begin; pi < end; ++pi) {
    if (!particles.active[pi]) continue;
    const CellCoords c = cell_coords(grid, particles.pos[pi]);
    const int ids[4] = {grid.node_id(c.ci, c.cj), grid.node_id(c.ci + 1, c.cj),
                        grid.node_id(c.ci + 1, c.cj + 1), grid.node_id(c.ci, c.cj + 1)};
    double w[4] = {(1.0 - c.fx) * (1.0 - c.fy), c.fx * (1.0 - c.fy), c.fx * c.fy,
                   (1.0 - c.fx) * c.fy};
    if (mode == DepositMode::Improved) {
      std::array<bool, 4> in;
      int n_in = 0;
      const Vec2 corners[4] = {
          grid.node_pos(c.ci, c.cj), grid.node_pos(c.ci + 1, c.cj),
          grid.node_pos(c.ci + 1, c.cj + 1), grid.node_pos(c.ci, c.cj + 1)};
      for (int k = 0; k < 4; ++k) {
        in[k] = node_inside(geom, corners[k], hx, hy);
        n_in += in[k] ? 1 : 0;
      }
      if (n_in == 4)
        throw Error("deposit: active particle in a cell fully inside the conductor");
      if (n_in > 0) {
        const std::array<double, 4> r = redistribute_weights({w[0], w[1], w[2], w[3]}, in);
        for (int k = 0; k < 4; ++k) w[k] = r[k];
      }
    }
    for (int k = 0; k < 4; ++k) charge[ids[k]] += particles.charge[pi] * w[k];
  }
}

DepositResult deposit(const ParticleSet& particles, const CartesianGrid& grid,
                      const InterfaceGeometry& geom, DepositMode mode) {
  DepositResult dep;
  dep.mode = mode;
  dep.charge.assign(grid.node_count(), 0.0);

  const std::size_t n = particles.size();
  const int workers = thread_count_from_env(n);
  if (workers <= 1) {
    deposit_range(particles, grid, geom, mode, 0, n, dep.charge);
  } else {
    std::vector<std::vector<double>> partial(workers,
                                             std::vector<double>(grid.node_count(), 0.0));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
      pool.emplace_back([&, w, b, e] {
        deposit_range(particles, grid, geom, mode, b, e, partial[w]);
      });
    }
    for (auto& t : pool) t.join();
    // Merge in worker order so the result is independent of scheduling.
    for (int w = 0; w < workers; ++w)
      for (int k = 0; k < grid.node_count(); ++k) dep.charge[k] += partial[w][k];
  }

  if (mode == DepositMode::Standard) {
    const double hx = grid.hx(), hy = grid.hy();
    for (int j = 0; j <= grid.ny; ++j)
      for (int i = 0; i <= grid.nx; ++i)
        if (node_inside(geom, grid.node_pos(i, j), hx, hy))
          dep.lost_charge += dep.charge[grid.node_id(i, j)];
  }
  return dep;
}

}  // namespace

std::array<double, 4> redistribute_weights(const std::array<double, 4>& w,
                                           const std::array<bool, 4>& inside) {
  int n_in = 0;
  for (bool b : inside) n_in += b ? 1 : 0;
  if (n_in == 4) throw Error("redistribute_weights: no outside corner to receive charge");
  std::array<double, 4> r = w;
  if (n_in == 0) return r;
  double w_in = 0.0, w_out = 0.0;
  for (int k = 0; k < 4; ++k) (inside[k] ? w_in : w_out) += w[k];
  for (int k = 0; k < 4; ++k) {
    if (inside[k])
      r[k] = 0.0;
    else if (w_out > 0.0)
      r[k] = w[k] + (w[k] / w_out) * w_in;
    else
      r[k] = w_in / (4 - n_in);
  }
  return r;
}

DepositResult deposit_standard(const ParticleSet& particles, const CartesianGrid& grid,
                               const InterfaceGeometry& geom) {
  return deposit(particles, grid, geom, DepositMode::Standard);
}

DepositResult deposit_improved(const ParticleSet& particles, const CartesianGrid& grid,
                               const InterfaceGeometry& geom) {
  return deposit(particles, grid, geom, DepositMode::Improved);
}

const std::vector<double>& charge_to_density(DepositResult& dep, const CartesianGrid& grid) {
  if (static_cast<int>(dep.charge.size()) != grid.node_count())
    throw Error("charge_to_density: charge array does not match node count");
  dep.density.assign(dep.charge.size(), 0.0);
  const double v0 = grid.hx() * grid.hy();
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      double v = v0;
      if (i == 0 || i == grid.nx) v *= 0.5;
      if (j == 0 || j == grid.ny) v *= 0.5;
      const int id = grid.node_id(i, j);
      dep.density[id] = dep.charge[id] / v;
    }
  return dep.density;
}

FieldAtNodes nodal_field_fd(const std::vector<double>& phi, const CartesianGrid& grid) {
  if (static_cast<int>(phi.size()) != grid.node_count())
    throw Error("nodal_field_fd: potential array does not match node count");
  const double hx = grid.hx(), hy = grid.hy();
  FieldAtNodes f;
  f.ex.assign(phi.size(), 0.0);
  f.ey.assign(phi.size(), 0.0);
  auto at = [&](int i, int j) { return phi[grid.node_id(i, j)]; };
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      const int id = grid.node_id(i, j);
      if (i == 0)
        f.ex[id] = (3.0 * at(0, j) - 4.0 * at(1, j) + at(2, j)) / (2.0 * hx);
      else if (i == grid.nx)
        f.ex[id] = (-3.0 * at(i, j) + 4.0 * at(i - 1, j) - at(i - 2, j)) / (2.0 * hx);
      else
        f.ex[id] = (at(i - 1, j) - at(i + 1, j)) / (2.0 * hx);
      if (j == 0)
        f.ey[id] = (3.0 * at(i, 0) - 4.0 * at(i, 1) + at(i, 2)) / (2.0 * hy);
      else if (j == grid.ny)
        f.ey[id] = (-3.0 * at(i, j) + 4.0 * at(i, j - 1) - at(i, j - 2)) / (2.0 * hy);
      else
        f.ey[id] = (at(i, j - 1) - at(i, j + 1)) / (2.0 * hy);
    }
  return f;
}

Vec2 gather_fd(const FieldAtNodes& field, const CartesianGrid& grid, Vec2 p) {
  const CellCoords c = cell_coords(grid, p);
  const int ids[4] = {grid.node_id(c.ci, c.cj), grid.node_id(c.ci + 1, c.cj),
                      grid.node_id(c.ci + 1, c.cj + 1), grid.node_id(c.ci, c.cj + 1)};
  const double w[4] = {(1.0 - c.fx) * (1.0 - c.fy), c.fx * (1.0 - c.fy), c.fx * c.fy,
                       (1.0 - c.fx) * c.fy};
  Vec2 e{0.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    e.x += w[k] * field.ex[ids[k]];
    e.y += w[k] * field.ey[ids[k]];
  }
  return e;
}

Vec2 gather_fd(const std::vector<double>& phi, const CartesianGrid& grid, Vec2 p) {
  return gather_fd(nodal_field_fd(phi, grid), grid, p);
}

Vec2 gather_ife(const std::vector<double>& phi, const TriangulatedMesh& mesh,
                const BasisTable& table, Vec2 p) {
  if (static_cast<int>(phi.size()) != mesh.grid.node_count())
    throw Error("gather_ife: potential array does not match node count");
  const Location loc = locate(mesh, p);
  if (loc.minus) throw Error("gather_ife: position inside the conductor");
  const Triangle& t = mesh.triangles[loc.tri];
  const auto b = local_basis(mesh, table, loc.tri, loc.minus);
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < 3; ++i) g = g + phi[t.n[i]] * b[i].grad();
  return -1.0 * g;
}

void push_boris(ParticleSet& particles, const std::vector<Vec2>& E_at_particles, double Bz,
                double dt, const CartesianGrid& grid, const InterfaceGeometry& geom) {
  if (dt < 0.0) throw Error("push_boris: dt must be nonnegative");
  if (E_at_particles.size() != particles.size())
    throw Error("push_boris: field array does not match particle count");
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (!particles.active[i]) continue;
    const double qmdt2 = particles.charge[i] / particles.mass[i] * 0.5 * dt;
    const Vec2 E = E_at_particles[i];
    Vec2 v = particles.vel[i];
    v = v + qmdt2 * E;
    const double t = qmdt2 * Bz;
    const double s = 2.0 * t / (1.0 + t * t);
    const Vec2 vp{v.x + v.y * t, v.y - v.x * t};
    v = {v.x + vp.y * s, v.y - vp.x * s};
    v = v + qmdt2 * E;
    particles.vel[i] = v;
    particles.pos[i] = particles.pos[i] + dt * v;
    if (!grid.contains(particles.pos[i]) || geom(particles.pos[i]) < 0.0)
      particles.active[i] = 0;
  }
}

}  // namespace ifepic
