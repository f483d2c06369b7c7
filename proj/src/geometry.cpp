#include "pg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

namespace pg {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

double sech2(double x) {
  double c = std::cosh(x);
  return 1.0 / (c * c);
}

// Solve a tridiagonal system with constant off-diagonals `off` and diagonal
// `diag` (modified in place) for complex rhs `b` (overwritten by the solution).
void thomas(std::vector<double>& diag, double off, std::vector<std::complex<double>>& b) {
  const size_t m = diag.size();
  for (size_t r = 1; r < m; ++r) {
    double w = off / diag[r - 1];
    diag[r] -= w * off;
    b[r] -= w * b[r - 1];
  }
  b[m - 1] /= diag[m - 1];
  for (size_t r = m - 1; r-- > 0;) b[r] = (b[r] - off * b[r + 1]) / diag[r];
}

}  // namespace

CylinderGrid build_grid(double X, int Nx, int Ny) {
  if (!(X > 1.0) || !std::isfinite(X)) fail(ErrorKind::BadDimensions, fmt::format("X must exceed 1, got {}", X));
  if (Nx < 8) fail(ErrorKind::BadDimensions, fmt::format("Nx must be at least 8, got {}", Nx));
  if (Ny < 8 || Ny % 2 != 0) fail(ErrorKind::BadDimensions, fmt::format("Ny must be even and at least 8, got {}", Ny));
  CylinderGrid g;
  g.X = X;
  g.Nx = Nx;
  g.Ny = Ny;
  g.dx = 2.0 * X / Nx;
  g.dy = 2.0 * M_PI / Ny;
  return g;
}

void require_same_grid(const CylinderGrid& a, const CylinderGrid& b) {
  if (!a.same_as(b))
    fail(ErrorKind::MismatchedGrid,
         fmt::format("grids differ: (X={}, Nx={}, Ny={}) vs (X={}, Nx={}, Ny={})", a.X, a.Nx, a.Ny, b.X, b.Nx, b.Ny));
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

const char* preset_name(PresetKind k) {
  switch (k) {
    case PresetKind::FubiniStudy: return "fubini-study";
    case PresetKind::LoftinType: return "loftin-type";
    case PresetKind::CustomTable: return "custom-table";
  }
  return "unknown";
}

void ConformalPreset::validate() const {
  if (kind == PresetKind::LoftinType && !(q >= 0.0)) fail(ErrorKind::InvalidArgument, "loftin-type needs q >= 0");
  if (kind == PresetKind::CustomTable) {
    if (table_x.size() < 2 || table_x.size() != table_values.size())
      fail(ErrorKind::InvalidArgument, "custom-table needs at least two (x, value) pairs of equal length");
    for (size_t k = 1; k < table_x.size(); ++k)
      if (!(table_x[k] > table_x[k - 1])) fail(ErrorKind::InvalidArgument, "custom-table x must be increasing");
    for (double v : table_values)
      if (!(v > 0.0)) fail(ErrorKind::NonPositive, fmt::format("custom-table value {} is not positive", v));
  }
}

double ConformalPreset::eval(double x) const {
  switch (kind) {
    case PresetKind::FubiniStudy: return sech2(x);
    case PresetKind::LoftinType: return sech2(x) * std::pow(1.0 + x * x, -0.5 * q);
    case PresetKind::CustomTable: {
      if (x <= table_x.front()) return table_values.front();
      if (x >= table_x.back()) return table_values.back();
      auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
      size_t k = static_cast<size_t>(it - table_x.begin());
      double s = (x - table_x[k - 1]) / (table_x[k] - table_x[k - 1]);
      return (1.0 - s) * table_values[k - 1] + s * table_values[k];
    }
  }
  return 0.0;
}

double ConformalPreset::tail_volume(double X) const {
  switch (kind) {
    case PresetKind::FubiniStudy: return 2.0 * M_PI * 2.0 * (1.0 - std::tanh(X));
    case PresetKind::LoftinType: {
      // Composite Simpson on [X, X + 40]; the integrand decays like e^{-2x}.
      const int m = 8000;
      const double h = 40.0 / m;
      double s = eval(X) + eval(X + 40.0);
      for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * eval(X + k * h);
      return 2.0 * M_PI * 2.0 * s * h / 3.0;
    }
    case PresetKind::CustomTable: return 0.0;
  }
  return 0.0;
}

ScalarField conformal_factor(const ConformalPreset& preset, const CylinderGrid& grid) {
  preset.validate();
  ScalarField E(grid);
  for (int i = 0; i < grid.rows(); ++i) {
    double v = preset.eval(grid.x(i));
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorKind::NonPositive, fmt::format("conformal density {} at x = {}", v, grid.x(i)));
    for (int j = 0; j < grid.Ny; ++j) E(i, j) = v;
  }
  return E;
}

double quadrature_weight(const CylinderGrid& grid, int i) {
  double w = grid.dx * grid.dy;
  return (i == 0 || i == grid.Nx) ? 0.5 * w : w;
}

double volume(const ScalarField& E, TailMode tail, const ConformalPreset* preset) {
  for (double v : E.values)
    if (!(v > 0.0)) fail(ErrorKind::NonPositive, "conformal density must be positive");
  double s = integrate_density(E, nullptr, DensityWeight::Invariant);
  if (tail == TailMode::Analytic) {
    if (!preset) fail(ErrorKind::InvalidArgument, "analytic tail needs the conformal preset");
    s += preset->tail_volume(E.grid.X);
  }
  return s;
}

ScalarField laplacian_apply(const ScalarField& f) {
  const CylinderGrid& g = f.grid;
  ScalarField out(g);
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
  for (int i = 0; i <= g.Nx; ++i) {
    for (int j = 0; j < g.Ny; ++j) {
      double fyy = (f(i, g.wrap(j + 1)) - 2.0 * f(i, j) + f(i, g.wrap(j - 1))) * iy2;
      double fxx;
      if (i == 0)
        fxx = (2.0 * f(0, j) - 5.0 * f(1, j) + 4.0 * f(2, j) - f(3, j)) * ix2;
      else if (i == g.Nx)
        fxx = (2.0 * f(i, j) - 5.0 * f(i - 1, j) + 4.0 * f(i - 2, j) - f(i - 3, j)) * ix2;
      else
        fxx = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * ix2;
      out(i, j) = fxx + fyy;
    }
  }
  return out;
}

ScalarField laplacian5(const ScalarField& f, PoissonBC) {
  const CylinderGrid& g = f.grid;
  ScalarField out(g);
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j)
      out(i, j) = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * ix2 +
                  (f(i, g.wrap(j + 1)) - 2.0 * f(i, j) + f(i, g.wrap(j - 1))) * iy2;
  return out;
}

ScalarField poisson_solve(const ScalarField& rhs_in, PoissonBC bc, double rel_tol) {
  const CylinderGrid& g = rhs_in.grid;
  const int m = g.Nx - 1;  // unknown rows 1..Nx-1
  const int Ny = g.Ny;
  const int Nk = Ny / 2 + 1;

  std::vector<double> rhs(static_cast<size_t>(m) * Ny);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < Ny; ++j) rhs[static_cast<size_t>(r) * Ny + j] = rhs_in(r + 1, j);

  if (bc == PoissonBC::MeanZero) {
    double s = 0.0, a = 0.0;
    for (double v : rhs) {
      s += v;
      a += std::abs(v);
    }
    if (std::abs(s) > rel_tol * a)
      fail(ErrorKind::NotSolvable,
           fmt::format("mean-zero problem has integral {:.6g} (relative {:.3g})", s * g.dx * g.dy, std::abs(s) / a));
    double mean = s / rhs.size();
    for (double& v : rhs) v -= mean;
  }

  double* in = static_cast<double*>(fftw_malloc(sizeof(double) * m * Ny));
  fftw_complex* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m * Nk));
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    int n[1] = {Ny};
    fwd = fftw_plan_many_dft_r2c(1, n, m, in, nullptr, 1, Ny, spec, nullptr, 1, Nk, FFTW_ESTIMATE);
    bwd = fftw_plan_many_dft_c2r(1, n, m, spec, nullptr, 1, Nk, in, nullptr, 1, Ny, FFTW_ESTIMATE);
  }
  std::copy(rhs.begin(), rhs.end(), in);
  fftw_execute(fwd);

  const double ix2 = 1.0 / (g.dx * g.dx);
  std::vector<double> diag(m);
  std::vector<std::complex<double>> b(m);
  for (int k = 0; k < Nk; ++k) {
    double s = std::sin(M_PI * k / Ny);
    double mu = -4.0 * s * s / (g.dy * g.dy);
    for (int r = 0; r < m; ++r) {
      diag[r] = -2.0 * ix2 + mu;
      b[r] = std::complex<double>(spec[r * Nk + k][0], spec[r * Nk + k][1]);
    }
    if (bc == PoissonBC::MeanZero) {
      diag[0] += ix2;
      diag[m - 1] += ix2;
    }
    if (bc == PoissonBC::MeanZero && k == 0) {
      // Singular mode: pin the first row to zero and drop its equation.
      std::vector<double> d2(diag.begin() + 1, diag.end());
      std::vector<std::complex<double>> b2(b.begin() + 1, b.end());
      thomas(d2, ix2, b2);
      b[0] = 0.0;
      for (int r = 1; r < m; ++r) b[r] = b2[r - 1];
    } else {
      thomas(diag, ix2, b);
    }
    for (int r = 0; r < m; ++r) {
      spec[r * Nk + k][0] = b[r].real();
      spec[r * Nk + k][1] = b[r].imag();
    }
  }
  fftw_execute(bwd);

  ScalarField u(g);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < Ny; ++j) u(r + 1, j) = in[r * Ny + j] / Ny;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(in);
  fftw_free(spec);

  if (bc == PoissonBC::MeanZero) {
    for (int j = 0; j < Ny; ++j) {
      u(0, j) = u(1, j);
      u(g.Nx, j) = u(g.Nx - 1, j);
    }
    double s = 0.0, w = 0.0;
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < Ny; ++j) {
        s += quadrature_weight(g, i) * u(i, j);
        w += quadrature_weight(g, i);
      }
    for (double& v : u.values) v -= s / w;
  }
  return u;
}

double integrate_density(const ScalarField& f, const ScalarField* E, DensityWeight weight) {
  if (weight == DensityWeight::Volume) {
    if (!E) fail(ErrorKind::InvalidArgument, "volume-weighted integral needs the conformal density");
    require_same_grid(f.grid, E->grid);
  }
  const CylinderGrid& g = f.grid;
  double s = 0.0;
  for (int i = 0; i <= g.Nx; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.Ny; ++j) row += (weight == DensityWeight::Volume) ? f(i, j) * (*E)(i, j) : f(i, j);
    s += quadrature_weight(g, i) * row;
  }
  return s;
}

double integrate_interior(const ScalarField& f) {
  const CylinderGrid& g = f.grid;
  double s = 0.0;
  for (int i = 1; i < g.Nx; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.Ny; ++j) row += f(i, j);
    s += row;
  }
  return s * g.dx * g.dy;
}

}  // namespace pg
