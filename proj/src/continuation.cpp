#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pg/flow.hpp"
#include "pg/linalg.hpp"

namespace pg {

namespace {

inline Mat dual_pull(const Mat& U, const Mat& Aq) { return U.adjoint() * Aq * U.adjoint().inverse(); }

Mat prefix_projector(const FlatBundleSpec& b, const FlatSubbundleSpec& s) {
  Mat p = Mat::Zero(b.rank, b.rank);
  for (int l = 0; l < b.block_count(); ++l)
    for (int a = 0; a < s.prefix_zero[l]; ++a) p(b.block_offset(l) + a, b.block_offset(l) + a) = 1.0;
  return p;
}

}  // namespace

ContinuationResult rho_continuation(const FlatBundleSpec& bundle, const std::vector<double>& X_schedule, int Nx_max,
                                    int Ny, const ConformalPreset& preset, const FlowOptions& opt,
                                    double plateau_tol, const ModelOptions& mopt) {
  if (X_schedule.size() < 2) fail(ErrorKind::InvalidArgument, "continuation needs at least two X values");
  for (size_t k = 1; k < X_schedule.size(); ++k)
    if (!(X_schedule[k] > X_schedule[k - 1])) fail(ErrorKind::InvalidArgument, "X schedule must be increasing");
  const double X_max = X_schedule.back();
  CylinderGrid big = build_grid(X_max, Nx_max, Ny);
  ModelMetric big_model = build_model_metric(bundle, big, preset, mopt);

  ContinuationResult res;
  EndomorphismField prev;
  bool have_prev = false;
  for (double X : X_schedule) {
    ModelMetric m = restrict_model(big_model, X);
    EndomorphismField h0 = have_prev ? extend_by_identity(prev, m.grid)
                                     : EndomorphismField::identity(m.grid, m.n, Frame::Unitary);
    FlowReport rep = run_flow(m, h0, opt);
    ContinuationRow row;
    row.X = X;
    row.rho = std::exp(-X);
    row.converged = rep.converged;
    row.residual = rep.final_weighted_residual;
    for (int i = 0; i <= m.grid.Nx; ++i)
      for (int j = 0; j < m.grid.Ny; ++j) {
        double tr = rep.h.at(i, j).trace().real();
        if (tr > row.sup_trace) {
          row.sup_trace = tr;
          row.argmax_x = m.grid.x(i);
        }
      }
    res.rows.push_back(row);
    res.solutions.push_back(rep.h);
    res.models.push_back(m);
    if (!rep.converged) {
      res.verdict = "no-convergence";
      return res;
    }
    prev = rep.h;
    have_prev = true;
  }
  const size_t K = res.rows.size();
  // growth at rounding level is not growth
  res.strictly_increasing = true;
  for (size_t k = 1; k < K; ++k)
    if (!(res.rows[k].sup_trace > res.rows[k - 1].sup_trace * (1.0 + 1e-9))) res.strictly_increasing = false;
  res.final_relative_increase = (res.rows[K - 1].sup_trace - res.rows[K - 2].sup_trace) / res.rows[K - 2].sup_trace;
  res.verdict = res.final_relative_increase < plateau_tol ? "bounded" : "unbounded-trend";
  return res;
}

double projection_idempotency(const EndomorphismField& pi) {
  double s = 0.0;
  for (int i = 0; i <= pi.grid.Nx; ++i)
    for (int j = 0; j < pi.grid.Ny; ++j) {
      Mat p = pi.at(i, j);
      s = std::max(s, std::sqrt(frob2(p * p - p)));
    }
  return s;
}

double projection_flatness(const ModelMetric& model, const EndomorphismField& pi) {
  const CylinderGrid& g = pi.grid;
  const Transports& tr = model.unitary;
  const Mat I = Mat::Identity(pi.n, pi.n);
  double total = 0.0;
  for (int i = 1; i < g.Nx; ++i) {
    Mat up = tr.x_plus[i], um = tr.x_minus(i);
    for (int j = 0; j < g.Ny; ++j) {
      Mat p = pi.at(i, j);
      Mat dx = (dual_pull(up, pi.at(i + 1, j)) - dual_pull(um, pi.at(i - 1, j))) / (2.0 * g.dx);
      Mat dy = (dual_pull(tr.y_plus[i], pi.at(i, g.wrap(j + 1))) -
                dual_pull(tr.y_minus[i], pi.at(i, g.wrap(j - 1)))) /
               (2.0 * g.dy);
      total += frob2(p * dx * (I - p)) + frob2(p * dy * (I - p));
    }
  }
  return total * g.dx * g.dy;
}

DestabilizerCandidate extract_destabilizer(const ModelMetric& model, const EndomorphismField& h,
                                           const std::vector<double>& sigma_schedule, double rounding_threshold,
                                           double min_gap) {
  require_same_grid(model.grid, h.grid);
  const CylinderGrid& g = h.grid;
  const int n = h.n;
  if (n < 2) fail(ErrorKind::NoCandidate, "a line bundle has no proper subbundles");
  if (sigma_schedule.empty()) fail(ErrorKind::InvalidArgument, "empty sigma schedule");
  for (size_t k = 0; k < sigma_schedule.size(); ++k) {
    double s = sigma_schedule[k];
    if (!(s > 0.0 && s <= 1.0) || (k > 0 && !(s < sigma_schedule[k - 1])))
      fail(ErrorKind::InvalidArgument, "sigma schedule must be decreasing within (0, 1]");
  }

  double m = 0.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) m = std::max(m, h.at(i, j).trace().real());

  std::vector<HermEig> eig(g.size());
  int probe_i = 0, probe_j = 0;
  double best_sep = 0.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      HermEig e = herm_eig(h.at(i, j) / m);
      double sep = e.values(n - 1) / std::max(e.values(0), 1e-300);
      if (sep > best_sep) {
        best_sep = sep;
        probe_i = i;
        probe_j = j;
      }
      eig[g.index(i, j)] = std::move(e);
    }

  DestabilizerCandidate out;
  out.probe_x = g.x(probe_i);
  const HermEig& pe = eig[g.index(probe_i, probe_j)];
  for (double sigma : sigma_schedule) {
    SigmaRow row;
    row.sigma = sigma;
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = 1.0 - std::pow(std::max(pe.values(k), 0.0), sigma);
    double vmax = *std::max_element(v.begin(), v.end());
    double lo = 1.0, hi = 0.0;
    for (int k = 0; k < n; ++k) {
      v[k] = vmax > 0 ? v[k] / vmax : 0.0;
      if (v[k] >= rounding_threshold) {
        ++row.rank;
        lo = std::min(lo, v[k]);
      } else {
        hi = std::max(hi, v[k]);
      }
    }
    row.spectrum = v;
    row.gap = (row.rank > 0 && row.rank < n) ? lo - hi : 0.0;
    out.sigma_table.push_back(row);
  }
  const SigmaRow& last = out.sigma_table.back();
  if (last.rank < 1 || last.rank >= n || last.gap < min_gap)
    fail(ErrorKind::NoCandidate,
         fmt::format("eigenvalues do not separate (rank {}, gap {:.3g} < {:.3g})", last.rank, last.gap, min_gap));
  out.rank = last.rank;

  // Projector onto the eigenspace of the smallest eigenvalues of h~.
  const int r = out.rank;
  std::vector<char> degenerate(g.size(), 0);
  out.projection = EndomorphismField(g, n, Frame::Unitary);
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      const HermEig& e = eig[g.index(i, j)];
      double split = e.values(r) - e.values(r - 1);
      if (split <= 1e-8 * std::max(e.values(n - 1), 1e-300)) {
        degenerate[g.index(i, j)] = 1;
        continue;
      }
      Mat V = e.vectors.leftCols(r);
      out.projection.set(i, j, V * V.adjoint());
    }
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      if (!degenerate[g.index(i, j)]) continue;
      bool found = false;
      for (int d = 1; d <= g.Nx && !found; ++d)
        for (int s : {-1, 1}) {
          int q = i + s * d;
          if (q < 0 || q > g.Nx || degenerate[g.index(q, j)]) continue;
          out.projection.set(i, j, out.projection.at(q, j));
          found = true;
          break;
        }
      if (!found) fail(ErrorKind::NoCandidate, "no node separates the eigenvalues");
    }

  out.idempotency = projection_idempotency(out.projection);
  out.flatness = projection_flatness(model, out.projection);

  SubbundleFamily fam = enumerate_flat_subbundles(model.bundle);
  double best = 1e300;
  bool any_same_rank = false;
  for (auto& s : fam.members)
    if (s.rank() == r) any_same_rank = true;
  for (auto& s : fam.members) {
    if (any_same_rank && s.rank() != r) continue;
    Mat ps = prefix_projector(model.bundle, s);
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= g.Nx; ++i) {
      double w = quadrature_weight(g, i);
      for (int j = 0; j < g.Ny; ++j) {
        num += w * frob2(out.projection.at(i, j) - ps);
        den += w;
      }
    }
    double d = num / den;
    if (d < best) {
      best = d;
      out.matched = s;
    }
  }
  if (fam.members.empty()) fail(ErrorKind::NoCandidate, "bundle has no proper flat subbundles");
  out.matched_distance = best;
  out.slope = slope(model.bundle, &out.matched);
  out.mu = slope(model.bundle);
  return out;
}

}  // namespace pg
