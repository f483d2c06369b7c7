#include "pg/reference.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace pg {

ScalarField rank1_linear_oracle(const ModelMetric& model) {
  if (model.n != 1) fail(ErrorKind::InvalidArgument, "the linear oracle needs a rank-1 bundle");
  const CylinderGrid& g = model.grid;
  const int rows = g.Nx - 1;
  const int N = rows * g.Ny;
  auto id = [&](int i, int j) { return (i - 1) * g.Ny + g.wrap(j); };
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(N);
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      int p = id(i, j);
      const Transports& tr = model.unitary;
      double gx = std::log(std::norm(tr.x_plus[i](0, 0))) + std::log(std::norm(tr.x_minus(i)(0, 0)));
      double gy = std::log(std::norm(tr.y_plus[i](0, 0))) + std::log(std::norm(tr.y_minus[i](0, 0)));
      // sum (f_q - f_p)/spacing^2 = -4 E c - (transport terms)
      rhs(p) = -4.0 * model.E(i, j) * model.c - gx * ix2 - gy * iy2;
      trip.emplace_back(p, p, -2.0 * ix2 - 2.0 * iy2);
      if (i + 1 < g.Nx) trip.emplace_back(p, id(i + 1, j), ix2);
      if (i - 1 > 0) trip.emplace_back(p, id(i - 1, j), ix2);
      trip.emplace_back(p, id(i, j + 1), iy2);
      trip.emplace_back(p, id(i, j - 1), iy2);
    }
  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) fail(ErrorKind::NonConvergence, "sparse LU factorization failed");
  Eigen::VectorXd f = lu.solve(rhs);
  ScalarField out(g, 0.0);
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) out(i, j) = f(id(i, j));
  return out;
}

namespace {

struct OdeState {
  double L, dL;
};

OdeState rk4_step(OdeState s, double h) {
  auto f = [](const OdeState& v) { return OdeState{v.dL, std::exp(2.0 * v.L)}; };
  OdeState k1 = f(s);
  OdeState k2 = f({s.L + 0.5 * h * k1.L, s.dL + 0.5 * h * k1.dL});
  OdeState k3 = f({s.L + 0.5 * h * k2.L, s.dL + 0.5 * h * k2.dL});
  OdeState k4 = f({s.L + h * k3.L, s.dL + h * k3.dL});
  return {s.L + h / 6.0 * (k1.L + 2 * k2.L + 2 * k3.L + k4.L), s.dL + h / 6.0 * (k1.dL + 2 * k2.dL + 2 * k3.dL + k4.dL)};
}

// Integrates from x = 0 with L(0) = L0, L'(0) = 0 to X; samples at |xs| by cubic Hermite interpolation.
double shoot(double L0, double X, int steps, const std::vector<double>* xs, std::vector<double>* out) {
  double h = X / steps;
  std::vector<OdeState> path(steps + 1);
  path[0] = {L0, 0.0};
  for (int k = 0; k < steps; ++k) {
    path[k + 1] = rk4_step(path[k], h);
    if (!std::isfinite(path[k + 1].L) || path[k + 1].L > 700.0) return 1e300;
  }
  if (xs && out) {
    out->clear();
    for (double xv : *xs) {
      double ax = std::min(std::abs(xv), X);
      int k = std::min(static_cast<int>(ax / h), steps - 1);
      double s = (ax - k * h) / h;
      const OdeState &a = path[k], &b = path[k + 1];
      double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
      double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
      out->push_back(h00 * a.L + h10 * h * a.dL + h01 * b.L + h11 * h * b.dL);
    }
  }
  return path[steps].L;
}

}  // namespace

RadialSolution jordan_radial_bvp(double X, const std::vector<double>& xs, int steps_per_unit) {
  if (!(X > 0.0)) fail(ErrorKind::InvalidArgument, "half-length must be positive");
  const int steps = std::max(100, static_cast<int>(std::ceil(steps_per_unit * X)));
  const double target = -std::log(X);
  double lo = target - 30.0, hi = target;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (shoot(mid, X, steps, nullptr, nullptr) > target)
      hi = mid;
    else
      lo = mid;
  }
  RadialSolution sol;
  sol.L0 = 0.5 * (lo + hi);
  sol.x = xs;
  shoot(sol.L0, X, steps, &xs, &sol.L);
  // cos(aX) = aX by fixed-point iteration on z = cos z
  double z = 0.7;
  for (int it = 0; it < 200; ++it) z = std::cos(z);
  sol.closed_form_scale = z / X;
  return sol;
}

double radial_model_ivp_deviation(double X, double x_end, int steps) {
  if (!(x_end > 0.0 && x_end < X)) fail(ErrorKind::InvalidArgument, "need 0 < x_end < X");
  double h = -(X - x_end) / steps;
  OdeState s{-std::log(X), -1.0 / X};
  double dev = 0.0, x = X;
  for (int k = 0; k < steps; ++k) {
    s = rk4_step(s, h);
    x += h;
    dev = std::max(dev, std::abs(s.L + std::log(x)));
  }
  return dev;
}

EndomorphismField radial_oracle_metric(const ModelMetric& model, const RadialSolution& sol) {
  const FlatBundleSpec& b = model.bundle;
  if (b.rank != 2 || b.block_count() != 1 || b.block_dim(0) != 2)
    fail(ErrorKind::InvalidArgument, "radial oracle needs a single rank-2 Jordan block");
  if (b.weight_zero(0) != 0.0 || b.weight_infinity(0) != 0.0)
    fail(ErrorKind::InvalidArgument, "radial oracle needs zero weights");
  if (model.u.max_abs() != 0.0) fail(ErrorKind::InvalidArgument, "radial oracle needs the conformal twist off");
  const CylinderGrid& g = model.grid;
  if (static_cast<int>(sol.L.size()) != g.rows())
    fail(ErrorKind::MismatchedGrid, "radial solution must be sampled at the grid rows");
  EndomorphismField h(g, 2, Frame::Unitary);
  for (int i = 0; i <= g.Nx; ++i) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = std::exp(sol.L[i]) / model.lam(i, 0);
    m(1, 1) = std::exp(-sol.L[i]) / model.lam(i, 1);
    for (int j = 0; j < g.Ny; ++j) h.set(i, j, m);
  }
  return h;
}

std::vector<ManufacturedRow> manufactured_poisson_table(double X, int Ny, const std::vector<int>& Nxs) {
  std::vector<ManufacturedRow> rows;
  for (int Nx : Nxs) {
    // y is refined together with x so both spacings shrink at the same rate
    int ny = 2 * ((Ny * Nx / Nxs.front() + 1) / 2);
    CylinderGrid g = build_grid(X, Nx, ny);
    auto exact = [&](double x, double y) {
      double s = M_PI * (x + X) / (2.0 * X);
      return std::sin(s) * std::cos(y) + 0.5 * std::sin(2.0 * s) * std::sin(2.0 * y);
    };
    auto lap = [&](double x, double y) {
      double k1 = M_PI / (2.0 * X), k2 = M_PI / X;
      double s = M_PI * (x + X) / (2.0 * X);
      return -(k1 * k1 + 1.0) * std::sin(s) * std::cos(y) - 0.5 * (k2 * k2 + 4.0) * std::sin(2.0 * s) * std::sin(2.0 * y);
    };
    ScalarField rhs(g);
    for (int i = 1; i < g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) rhs(i, j) = lap(g.x(i), g.y(j));
    ScalarField u = poisson_solve(rhs, PoissonBC::DirichletZero);
    ManufacturedRow r;
    r.Nx = Nx;
    r.dx = g.dx;
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) r.error = std::max(r.error, std::abs(u(i, j) - exact(g.x(i), g.y(j))));
    r.ratio = rows.empty() ? 0.0 : rows.back().error / r.error;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pg
