#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace ifepic {

// Library-level error: contract violations, solver failures, bad input.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// Uniform rectangular grid. Node (i,j) sits at (xmin+i*hx, ymin+j*hy),
// 0 <= i <= nx, 0 <= j <= ny. Node ids are row-major with i fastest.
struct CartesianGrid {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  int nx = 1, ny = 1;

  CartesianGrid() = default;
  CartesianGrid(double x0, double x1, double y0, double y1, int nx_, int ny_)
      : xmin(x0), xmax(x1), ymin(y0), ymax(y1), nx(nx_), ny(ny_) {
    if (nx < 2 || ny < 2) throw Error("grid: nx and ny must be >= 2");
    if (!(xmax > xmin) || !(ymax > ymin)) throw Error("grid: empty box");
  }
  static CartesianGrid square(int n) { return CartesianGrid(-1, 1, -1, 1, n, n); }

  double hx() const { return (xmax - xmin) / nx; }
  double hy() const { return (ymax - ymin) / ny; }
  int nnx() const { return nx + 1; }
  int nny() const { return ny + 1; }
  int node_count() const { return nnx() * nny(); }
  int cell_count() const { return nx * ny; }
  int node_id(int i, int j) const { return j * nnx() + i; }
  Vec2 node_pos(int i, int j) const { return {xmin + i * hx(), ymin + j * hy()}; }
  bool boundary_node(int i, int j) const {
    return i == 0 || j == 0 || i == nx || j == ny;
  }
  bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

// Signed level set: negative inside the conductor, positive in the plasma.
struct InterfaceGeometry {
  std::function<double(double, double)> level_set;

  double operator()(double x, double y) const { return level_set(x, y); }
  double operator()(Vec2 p) const { return level_set(p.x, p.y); }

  static InterfaceGeometry circle(Vec2 center, double radius) {
    return {[=](double x, double y) {
      double dx = x - center.x, dy = y - center.y;
      return dx * dx + dy * dy - radius * radius;
    }};
  }
  // Uniform-sign geometry (no interface anywhere in the domain).
  static InterfaceGeometry none() {
    return {[](double, double) { return 1.0; }};
  }
};

// Node classification: values within 1e-12*h^2 of zero count as inside, so
// classification is deterministic when the interface grazes a node.
inline bool node_inside(const InterfaceGeometry& geom, Vec2 p, double hx, double hy) {
  return geom(p) < 1e-12 * hx * hy;
}

}  // namespace ifepic
