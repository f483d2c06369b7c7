// Matrix-free Newton-Krylov solve of K(h) = cI with h = I on the boundary rows.
// Unknowns are eta = log h at interior nodes; the preconditioner inverts the
// leading-order linearization -(1/4) Lap eta componentwise.

#include <cmath>

#include <Eigen/Core>
#include <unsupported/Eigen/IterativeSolvers>
#include <fmt/format.h>

#include "pg/flow.hpp"
#include "pg/linalg.hpp"

namespace pg {

namespace {

using Vector = Eigen::VectorXd;

struct Layout {
  CylinderGrid grid;
  int n = 0;
  int nodes = 0;  // interior nodes
  int comps = 0;  // n^2 reals per node
  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes) * comps; }
  int node(int i, int j) const { return (i - 1) * grid.Ny + j; }
};

// Hermitian matrix <-> n^2 reals: diagonal, then (Re, Im) of the strict upper triangle.
void pack(const Layout& L, const Mat& a, int node, Vector& v) {
  int c = 0;
  for (int k = 0; k < L.n; ++k) v[static_cast<Eigen::Index>(c++) * L.nodes + node] = a(k, k).real();
  for (int r = 0; r < L.n; ++r)
    for (int s = r + 1; s < L.n; ++s) {
      v[static_cast<Eigen::Index>(c++) * L.nodes + node] = a(r, s).real();
      v[static_cast<Eigen::Index>(c++) * L.nodes + node] = a(r, s).imag();
    }
}

Mat unpack(const Layout& L, const Vector& v, int node) {
  Mat a = Mat::Zero(L.n, L.n);
  int c = 0;
  for (int k = 0; k < L.n; ++k) a(k, k) = v[static_cast<Eigen::Index>(c++) * L.nodes + node];
  for (int r = 0; r < L.n; ++r)
    for (int s = r + 1; s < L.n; ++s) {
      double re = v[static_cast<Eigen::Index>(c++) * L.nodes + node];
      double im = v[static_cast<Eigen::Index>(c++) * L.nodes + node];
      a(r, s) = cd(re, im);
      a(s, r) = cd(re, -im);
    }
  return a;
}

struct Problem {
  const ModelMetric& model;
  Layout L;
  double floor;

  EndomorphismField metric(const Vector& eta) const {
    EndomorphismField h = EndomorphismField::identity(L.grid, L.n, Frame::Unitary);
    for (int i = 1; i < L.grid.Nx; ++i)
      for (int j = 0; j < L.grid.Ny; ++j) h.set(i, j, herm_exp(unpack(L, eta, L.node(i, j))));
    return h;
  }

  // Residual E h^{1/2} (K - c) h^{-1/2}. Reports sup E|K - cI| (the stopping
  // measure: 1/E amplifies rounding near the ends) and sup |K - cI|.
  Vector residual(const Vector& eta, double* sup = nullptr, double* plain = nullptr) const {
    EndomorphismField h = metric(eta);
    EndomorphismField K = curvature_K(model, h, floor);
    Vector F(L.size());
    const Mat I = Mat::Identity(L.n, L.n);
    double s = 0.0, p = 0.0;
    for (int i = 1; i < L.grid.Nx; ++i)
      for (int j = 0; j < L.grid.Ny; ++j) {
        Mat A = K.at(i, j) - model.c * I;
        double a = std::sqrt(frob2(A));
        p = std::max(p, a);
        s = std::max(s, model.E(i, j) * a);
        Mat half = unpack(L, eta, L.node(i, j)) * 0.5;
        Mat S = hermitize(herm_exp(half) * A * herm_exp(-half));
        pack(L, model.E(i, j) * S, L.node(i, j), F);
      }
    if (sup) *sup = s;
    if (plain) *plain = p;
    return F;
  }
};

struct JacobianOperator {
  const Problem* problem;
  const Vector* eta;
  const Vector* F0;
  double eta_norm;
  mutable int evaluations = 0;

  Eigen::Index rows() const { return problem->L.size(); }
  Eigen::Index cols() const { return problem->L.size(); }

  Vector operator*(const Vector& v) const {
    double vn = v.norm();
    if (vn == 0.0) return Vector::Zero(v.size());
    double eps = 1.4901161193847656e-08 * (1.0 + eta_norm) / vn;
    Vector shifted = *eta + eps * v;
    ++evaluations;
    return (problem->residual(shifted) - *F0) / eps;
  }
};

struct PoissonPreconditioner {
  const Layout* L;
  Vector solve(const Vector& r) const {
    Vector z(r.size());
    for (int c = 0; c < L->comps; ++c) {
      ScalarField rhs(L->grid);
      for (int i = 1; i < L->grid.Nx; ++i)
        for (int j = 0; j < L->grid.Ny; ++j)
          rhs(i, j) = -4.0 * r[static_cast<Eigen::Index>(c) * L->nodes + L->node(i, j)];
      ScalarField s = poisson_solve(rhs, PoissonBC::DirichletZero);
      for (int i = 1; i < L->grid.Nx; ++i)
        for (int j = 0; j < L->grid.Ny; ++j) z[static_cast<Eigen::Index>(c) * L->nodes + L->node(i, j)] = s(i, j);
    }
    return z;
  }
};

}  // namespace

SteadyResult solve_steady_state(const ModelMetric& model, const EndomorphismField& h0, const FlowOptions& opt) {
  require_same_grid(model.grid, h0.grid);
  Problem P{model, Layout{model.grid, model.n, (model.grid.Nx - 1) * model.grid.Ny, model.n * model.n},
            opt.positivity_floor};
  const Layout& L = P.L;

  Vector eta(L.size());
  for (int i = 1; i < L.grid.Nx; ++i)
    for (int j = 0; j < L.grid.Ny; ++j) {
      Mat a = h0.at(i, j);
      double mn = L.n == 1 ? a(0, 0).real() : herm_min_eig(a);
      if (!(mn > opt.positivity_floor))
        fail(ErrorKind::SingularH, fmt::format("initial metric not positive at node ({}, {})", i, j));
      pack(L, herm_log(a), L.node(i, j), eta);
    }

  SteadyResult out;
  double sup = 0.0, plain = 0.0;
  Vector F = P.residual(eta, &sup, &plain);
  double fnorm = F.norm(), prev_fnorm = fnorm;
  PoissonPreconditioner pre{&L};
  int it = 0;
  for (; it < opt.newton_max_iter; ++it) {
    if (sup < opt.tol) break;
    double forcing = it == 0 ? 0.1 : std::clamp(0.9 * std::pow(fnorm / prev_fnorm, 2.0), 1e-6, 0.1);
    JacobianOperator J{&P, &eta, &F, eta.norm()};
    Vector delta = Vector::Zero(L.size());
    Vector rhs = -F;
    Eigen::Index iters = opt.gmres_max_iter;
    double err = forcing;
    Eigen::internal::gmres(J, rhs, delta, pre, iters, static_cast<Eigen::Index>(opt.gmres_restart), err);

    // backtracking on the residual norm
    double alpha = 1.0;
    bool accepted = false;
    Vector trial, Ft;
    double sup_t = 0.0, plain_t = 0.0;
    for (int ls = 0; ls < 12; ++ls) {
      trial = eta + alpha * delta;
      try {
        Ft = P.residual(trial, &sup_t, &plain_t);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularH) throw;
        alpha *= 0.5;
        continue;
      }
      if (Ft.norm() < (1.0 - 1e-4 * alpha) * fnorm) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.diagnosis = fmt::format("line search stalled at Newton iteration {} with weighted residual {:.3e}", it, sup);
      break;
    }
    eta = trial;
    F = Ft;
    prev_fnorm = fnorm;
    fnorm = F.norm();
    sup = sup_t;
    plain = plain_t;
  }
  out.h = P.metric(eta);
  out.residual = plain;
  out.weighted_residual = sup;
  out.iterations = it;
  out.converged = sup < opt.tol;
  if (!out.converged && out.diagnosis.empty())
    out.diagnosis =
        fmt::format("Newton iteration budget {} exhausted with weighted residual {:.3e}", opt.newton_max_iter, sup);
  return out;
}

}  // namespace pg
