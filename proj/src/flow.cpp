#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "pg/flow.hpp"
#include "pg/linalg.hpp"

namespace pg {

double cfl_dt(const ModelMetric& model, double cfl) {
  double emin = *std::min_element(model.E.values.begin(), model.E.values.end());
  double h = std::min(model.grid.dx, model.grid.dy);
  return cfl * emin * h * h;
}

FlowState initial_state(const ModelMetric& model) {
  FlowState s;
  s.h = EndomorphismField::identity(model.grid, model.n, Frame::Unitary);
  return s;
}

EndomorphismField perturbed_initial(const ModelMetric& model, double amplitude, unsigned seed) {
  const CylinderGrid& g = model.grid;
  const int n = model.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  // three Fourier modes in y, each with a random Hermitian coefficient and x-profile frequency
  struct Mode {
    Mat coeff;
    int wave;
    double shift;
    double xfreq;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < 3; ++m) {
    Mat a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = cd(normal(rng), normal(rng));
    modes.push_back({hermitize(a) / std::sqrt(double(n)), m, phase(rng), 0.5 + 0.5 * m});
  }
  EndomorphismField h = EndomorphismField::identity(g, n, Frame::Unitary);
  for (int i = 1; i < g.Nx; ++i) {
    double x = g.x(i);
    double bump = std::sin(M_PI * (x + g.X) / (2.0 * g.X));
    for (int j = 0; j < g.Ny; ++j) {
      Mat A = Mat::Zero(n, n);
      for (auto& md : modes)
        A += md.coeff * std::cos(md.wave * g.y(j) + md.shift) * std::cos(md.xfreq * x * M_PI / g.X);
      h.set(i, j, herm_exp(amplitude * bump * A / 3.0));
    }
  }
  return h;
}

double energy_density_integral(const ModelMetric& model, const EndomorphismField& h, double min_abs_x) {
  // |D h|^2 with D the Chern connection of H0, i.e. the anti-Hermitian part of the unitary-frame connection
  const CylinderGrid& g = h.grid;
  ConnectionField omega = unitary_connection(model);
  double total = 0.0;
  for (int i = 1; i < g.Nx; ++i) {
    if (std::abs(g.x(i)) < min_abs_x) continue;
    double row = 0.0;
    for (int j = 0; j < g.Ny; ++j) {
      Mat ax = omega.dx.at(i, j), ay = omega.dy.at(i, j);
      ax = 0.5 * (ax - ax.adjoint()).eval();
      ay = 0.5 * (ay - ay.adjoint()).eval();
      Mat hp = h.at(i, j);
      Mat dx = (h.at(i + 1, j) - h.at(i - 1, j)) / (2.0 * g.dx) + ax * hp - hp * ax;
      Mat dy = (h.at(i, g.wrap(j + 1)) - h.at(i, g.wrap(j - 1))) / (2.0 * g.dy) + ay * hp - hp * ay;
      row += frob2(dx) + frob2(dy);
    }
    total += row;
  }
  return total * g.dx * g.dy;
}

FlowMonitors measure(const ModelMetric& model, const EndomorphismField& h, const EndomorphismField& K, double t,
                     double dt, bool energy) {
  FlowMonitors m;
  m.t = t;
  m.dt = dt;
  m.sup_residual = sup_residual(K, model.c);
  const CylinderGrid& g = h.grid;
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j)
      m.weighted_residual = std::max(
          m.weighted_residual, model.E(i, j) * std::sqrt(frob2(K.at(i, j) - model.c * Mat::Identity(h.n, h.n))));
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat a = h.at(i, j);
      m.sup_trace = std::max(m.sup_trace, a.trace().real());
      m.det_error = std::max(m.det_error, std::abs(a.determinant() - 1.0));
    }
  if (energy) m.energy = energy_density_integral(model, h);
  return m;
}

namespace {

// Tries one step of size dt from h given K; returns false if positivity fails.
bool try_step(const ModelMetric& model, const EndomorphismField& h, const EndomorphismField& K, double dt,
              const FlowOptions& opt, EndomorphismField& out) {
  const CylinderGrid& g = h.grid;
  const int n = h.n;
  out = EndomorphismField::identity(g, n, Frame::Unitary);
  const Mat I = Mat::Identity(n, n);
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat hp = h.at(i, j);
      Mat A = K.at(i, j) - model.c * I;
      Mat next;
      if (n == 1) {
        next = hp * std::exp(-dt * A(0, 0).real());
      } else if (opt.scheme == StepScheme::Exponential) {
        HermEig e = herm_eig(hp);
        Mat sq = e.vectors * e.values.cwiseSqrt().cast<cd>().asDiagonal() * e.vectors.adjoint();
        Mat isq = e.vectors * e.values.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() * e.vectors.adjoint();
        Mat S = hermitize(sq * A * isq);
        next = hermitize(sq * herm_exp(-dt * S) * sq);
      } else {
        next = hermitize(hp * (I - dt * A));
      }
      if (opt.det_renormalize) {
        double det = next.determinant().real();
        if (det > 0) next /= std::pow(det, 1.0 / n);
      }
      double mn = n == 1 ? next(0, 0).real() : herm_min_eig(next);
      if (!(mn >= opt.positivity_floor)) return false;
      out.set(i, j, next);
    }
  return true;
}

double fit_decay_rate(const std::vector<FlowMonitors>& series) {
  // least-squares slope of log(sup^2) against t over the second half of the series
  std::vector<std::pair<double, double>> pts;
  for (size_t k = series.size() / 2; k < series.size(); ++k)
    if (series[k].sup_residual > 0) pts.push_back({series[k].t, 2.0 * std::log(series[k].sup_residual)});
  if (pts.size() < 2) return 0.0;
  double mt = 0, my = 0;
  for (auto& p : pts) {
    mt += p.first;
    my += p.second;
  }
  mt /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto& p : pts) {
    sxy += (p.first - mt) * (p.second - my);
    sxx += (p.first - mt) * (p.first - mt);
  }
  return sxx > 0 ? -sxy / sxx : 0.0;
}

}  // namespace

FlowState flow_step(const FlowState& state, const ModelMetric& model, const FlowOptions& opt, int* rejected) {
  EndomorphismField K = curvature_K(model, state.h, opt.positivity_floor);
  double dmax = cfl_dt(model, opt.cfl);
  double dt = opt.dt ? std::min(*opt.dt, dmax) : dmax;
  if (state.dt > 0) dt = std::min(dt, state.dt * 2.0);
  FlowState next;
  while (true) {
    if (dt < opt.dt_min) fail(ErrorKind::StepCollapse, fmt::format("step size {:.3g} fell below dt_min", dt));
    if (try_step(model, state.h, K, dt, opt, next.h)) break;
    dt *= 0.5;
    if (rejected) ++*rejected;
  }
  next.t = state.t + dt;
  next.dt = dt;
  next.monitors = measure(model, state.h, K, state.t, dt, false);
  return next;
}

FlowReport run_flow(const ModelMetric& model, const EndomorphismField& h0, const FlowOptions& opt) {
  require_same_grid(model.grid, h0.grid);
  FlowReport rep;
  FlowState st;
  st.h = h0;
  double prev_sq = -1.0;
  int step = 0;
  for (; step < opt.max_flow_steps && st.t < opt.t_max; ++step) {
    EndomorphismField K = curvature_K(model, st.h, opt.positivity_floor);
    FlowMonitors m = measure(model, st.h, K, st.t, st.dt, opt.record_energy && step % opt.record_every == 0);
    double sq = m.sup_residual * m.sup_residual;
    if (prev_sq >= 0.0) {
      rep.max_increase = std::max(rep.max_increase, sq - prev_sq);
      if (sq - prev_sq > 1e-10) rep.monotone = false;
    }
    prev_sq = sq;
    if (step % opt.record_every == 0) rep.series.push_back(m);
    if (m.weighted_residual < opt.tol) break;
    double dmax = cfl_dt(model, opt.cfl);
    double dt = opt.dt ? std::min(*opt.dt, dmax) : dmax;
    EndomorphismField next;
    while (true) {
      if (dt < opt.dt_min) fail(ErrorKind::StepCollapse, fmt::format("step size {:.3g} fell below dt_min", dt));
      if (try_step(model, st.h, K, dt, opt, next)) break;
      dt *= 0.5;
      ++rep.rejected_steps;
    }
    st.h = std::move(next);
    st.t += dt;
    st.dt = dt;
  }
  rep.flow_steps = step;
  EndomorphismField K = curvature_K(model, st.h, opt.positivity_floor);
  FlowMonitors last = measure(model, st.h, K, st.t, st.dt, opt.record_energy);
  if (rep.series.empty() || rep.series.back().t != last.t) rep.series.push_back(last);
  rep.decay_rate = fit_decay_rate(rep.series);
  rep.final_residual = last.sup_residual;
  rep.final_weighted_residual = last.weighted_residual;
  rep.h = st.h;
  rep.converged = last.weighted_residual < opt.tol;

  if (!rep.converged && opt.steady_solver) {
    SteadyResult sr = solve_steady_state(model, st.h, opt);
    rep.h = sr.h;
    rep.final_residual = sr.residual;
    rep.final_weighted_residual = sr.weighted_residual;
    rep.converged = sr.converged;
    rep.newton_iterations = sr.iterations;
    rep.diagnosis = sr.diagnosis;
  } else if (!rep.converged) {
    rep.diagnosis = fmt::format("flow phase ended at t = {:.6g} with weighted residual {:.3e} above tol {:.1e}",
                                st.t, last.weighted_residual, opt.tol);
  }
  return rep;
}

}  // namespace pg
