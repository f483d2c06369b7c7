#pragma once

#include <cstddef>
#include <mutex>
#include <vector>

#include "pg/common.hpp"

namespace pg {

// FFTW planning is not thread-safe; every planner call takes this lock.
std::mutex& fftw_planner_mutex();

// Truncated log-cylinder [-X, X] x [0, 2pi). Nx counts x-intervals, so the
// x-nodes are i = 0..Nx; rows 0 and Nx carry boundary data.
struct CylinderGrid {
  double X = 0.0;
  int Nx = 0;
  int Ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  int rows() const { return Nx + 1; }
  std::size_t size() const { return static_cast<std::size_t>(rows()) * Ny; }
  double x(int i) const { return -X + i * dx; }
  double y(int j) const { return j * dy; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * Ny + j; }
  int wrap(int j) const { return ((j % Ny) + Ny) % Ny; }
  bool same_as(const CylinderGrid& o) const { return X == o.X && Nx == o.Nx && Ny == o.Ny; }
};

CylinderGrid build_grid(double X, int Nx, int Ny);
void require_same_grid(const CylinderGrid& a, const CylinderGrid& b);

struct ScalarField {
  CylinderGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const CylinderGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  double max_abs() const;
};

enum class PresetKind { FubiniStudy, LoftinType, CustomTable };

struct ConformalPreset {
  PresetKind kind = PresetKind::FubiniStudy;
  double q = 0.0;                     // loftin-type decay exponent
  std::vector<double> table_x;        // custom-table abscissae, increasing
  std::vector<double> table_values;   // custom-table density values

  double eval(double x) const;
  // Integral of E over |x| > X times the circle length; zero for tables.
  double tail_volume(double X) const;
  void validate() const;
};

const char* preset_name(PresetKind k);

// The conformal density depends on x only.
ScalarField conformal_factor(const ConformalPreset& preset, const CylinderGrid& grid);

// Quadrature weight of node (i, j): trapezoid in x, rectangle rule in y.
double quadrature_weight(const CylinderGrid& grid, int i);

enum class TailMode { None, Analytic };
double volume(const ScalarField& E, TailMode tail = TailMode::None, const ConformalPreset* preset = nullptr);

ScalarField laplacian_apply(const ScalarField& f);

enum class PoissonBC { DirichletZero, MeanZero };
// Solves the 5-point Laplacian on rows 1..Nx-1. DirichletZero pins rows 0 and
// Nx to zero; MeanZero uses mirror ghosts (u_0 = u_1, u_Nx = u_{Nx-1}) and a
// zero-average constraint. Only interior rows of rhs are read.
ScalarField poisson_solve(const ScalarField& rhs, PoissonBC bc, double rel_tol = 1e-8);

// Discrete 5-point Laplacian with the same boundary conventions as poisson_solve.
ScalarField laplacian5(const ScalarField& f, PoissonBC bc);

enum class DensityWeight { Volume, Invariant };
double integrate_density(const ScalarField& f, const ScalarField* E, DensityWeight weight);

// Sum over interior rows only with weight dx*dy (finite-volume convention).
double integrate_interior(const ScalarField& f);

}  // namespace pg
