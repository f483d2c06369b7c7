#include "pg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fftw3.h>
#include <fmt/format.h>

#include "pg/flow.hpp"
#include "pg/linalg.hpp"

namespace pg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// d/dx of a field at row i: central inside, second-order one-sided on the boundary rows.
Mat ddx(const MatrixField& f, int i, int j) {
  const CylinderGrid& g = f.grid;
  if (i == 0) return (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * g.dx);
  if (i == g.Nx) return (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * g.dx);
  return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.dx);
}

Mat ddy(const MatrixField& f, int i, int j) {
  const CylinderGrid& g = f.grid;
  return (f.at(i, g.wrap(j + 1)) - f.at(i, g.wrap(j - 1))) / (2.0 * g.dy);
}

std::vector<int> prefix_components(const FlatBundleSpec& b, const FlatSubbundleSpec& s) {
  std::vector<int> comps;
  for (int l = 0; l < b.block_count(); ++l)
    for (int a = 0; a < s.prefix_zero[l]; ++a) comps.push_back(b.block_offset(l) + a);
  return comps;
}

Mat columns(int n, const std::vector<int>& comps) {
  Mat V = Mat::Zero(n, static_cast<int>(comps.size()));
  for (size_t c = 0; c < comps.size(); ++c) V(comps[c], static_cast<int>(c)) = 1.0;
  return V;
}

// Tr(h^{-1} b^* h b) for an endomorphism-valued component b.
double h_norm2(const Mat& h, const Mat& b) {
  Eigen::LLT<Mat> llt(h);
  return llt.solve(b.adjoint() * h * b).trace().real();
}

FlatSubbundleSpec full_subbundle(const FlatBundleSpec& b) {
  std::vector<int> dims;
  for (int l = 0; l < b.block_count(); ++l) dims.push_back(b.block_dim(l));
  return make_subbundle(b, dims);
}

// Missing part of int Tr K(H_S) dnu beyond the edges at +xp and -xm for the
// model: each nilpotent prefix of size s in a block of size d loses s(d - s)/edge.
double model_tail(const FlatBundleSpec& b, const FlatSubbundleSpec& sub, double xp, double xm) {
  double acc = 0.0;
  for (int l = 0; l < b.block_count(); ++l) {
    int s = sub.prefix_zero[l], d = b.block_dim(l);
    acc += s * (d - s);
  }
  return -0.5 * M_PI * acc * (1.0 / xp + 1.0 / xm);
}

struct CwSums {
  double curvature = 0.0;  // sum E Tr(pi K pi) dx dy
  double beta = 0.0;       // sum 1/4 |beta|^2 dx dy
  double edge_plus = 0.0, edge_minus = 0.0;
};

CwSums cw_sums(const ModelMetric& model, const EndomorphismField& h, const EndomorphismField& K,
               const FlatSubbundleSpec& sub, const OneFormField* beta, double cut) {
  const CylinderGrid& g = h.grid;
  CwSums s;
  double xmax = -1e300, xmin = 1e300;
  for (int i = 1; i < g.Nx; ++i) {
    double x = g.x(i);
    if (std::abs(x) > cut + 1e-12) continue;
    xmax = std::max(xmax, x);
    xmin = std::min(xmin, x);
    double rc = 0.0, rb = 0.0;
    for (int j = 0; j < g.Ny; ++j) {
      Mat hp = h.at(i, j);
      Mat pi = subbundle_projector(model.bundle, sub, hp);
      rc += model.E(i, j) * (pi * K.at(i, j) * pi).trace().real();
      if (beta) rb += h_norm2(hp, beta->dx.at(i, j)) + h_norm2(hp, beta->dy.at(i, j));
    }
    s.curvature += rc;
    s.beta += 0.25 * rb;
  }
  s.curvature *= g.dx * g.dy;
  s.beta *= g.dx * g.dy;
  s.edge_plus = xmax + 0.5 * g.dx;
  s.edge_minus = -(xmin - 0.5 * g.dx);
  return s;
}

bool is_full(const FlatBundleSpec& b, const FlatSubbundleSpec& sub) {
  for (int l = 0; l < b.block_count(); ++l)
    if (sub.prefix_zero[l] != b.block_dim(l)) return false;
  return true;
}

}  // namespace

OneFormField psi_field(const ModelMetric& model, const EndomorphismField& h) {
  require_same_grid(model.grid, h.grid);
  if (h.frame != Frame::Unitary) fail(ErrorKind::InvalidArgument, "psi_field expects a unitary-frame h");
  const CylinderGrid& g = h.grid;
  ConnectionField omega = unitary_connection(model);
  OneFormField psi{MatrixField(g, h.n, Frame::Unitary), MatrixField(g, h.n, Frame::Unitary)};
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat hp = h.at(i, j);
      Eigen::LLT<Mat> llt(hp);
      if (llt.info() != Eigen::Success)
        fail(ErrorKind::SingularH, fmt::format("h is not positive definite at node ({}, {})", i, j));
      Mat ox = omega.dx.at(i, j), oy = omega.dy.at(i, j);
      psi.dx.set(i, j, 0.5 * (llt.solve(ddx(h, i, j) - ox.adjoint() * hp) - ox));
      psi.dy.set(i, j, 0.5 * (llt.solve(ddy(h, i, j) - oy.adjoint() * hp) - oy));
    }
  return psi;
}

Mat subbundle_projector(const FlatBundleSpec& bundle, const FlatSubbundleSpec& sub, const Mat& h) {
  auto comps = prefix_components(bundle, sub);
  const int n = bundle.rank;
  if (comps.empty()) return Mat::Zero(n, n);
  if (static_cast<int>(comps.size()) == n) return Mat::Identity(n, n);
  Mat V = columns(n, comps);
  Mat G = V.adjoint() * h * V;
  return V * G.llt().solve(V.adjoint() * h);
}

OneFormField second_fundamental_form(const ModelMetric& model, const EndomorphismField& h,
                                     const FlatSubbundleSpec& sub) {
  require_same_grid(model.grid, h.grid);
  validate_subbundle(model.bundle, sub);
  const CylinderGrid& g = h.grid;
  const int n = h.n;
  ConnectionField omega = unitary_connection(model);
  OneFormField psi = psi_field(model, h);
  EndomorphismField pi(g, n, Frame::Unitary);
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) pi.set(i, j, subbundle_projector(model.bundle, sub, h.at(i, j)));
  const Mat I = Mat::Identity(n, n);
  OneFormField beta{MatrixField(g, n, Frame::Unitary), MatrixField(g, n, Frame::Unitary)};
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat p = pi.at(i, j);
      // dual connection form: Omega + 2 Psi
      Mat cx = omega.dx.at(i, j) + 2.0 * psi.dx.at(i, j);
      Mat cy = omega.dy.at(i, j) + 2.0 * psi.dy.at(i, j);
      Mat dpx = ddx(pi, i, j) + cx * p - p * cx;
      Mat dpy = ddy(pi, i, j) + cy * p - p * cy;
      beta.dx.set(i, j, (I - p) * dpx * p);
      beta.dy.set(i, j, (I - p) * dpy * p);
    }
  return beta;
}

DegreeEstimate chern_weil_degree(const ModelMetric& model, const EndomorphismField& h, const FlatSubbundleSpec& sub,
                                 TailMode tail) {
  require_same_grid(model.grid, h.grid);
  validate_subbundle(model.bundle, sub);
  EndomorphismField K = curvature_K(model, h);
  OneFormField beta;
  const bool full = is_full(model.bundle, sub);
  if (!full) beta = second_fundamental_form(model, h, sub);
  const OneFormField* bp = full ? nullptr : &beta;

  auto evaluate = [&](double cut, double& truncated, double& tail_value) {
    CwSums s = cw_sums(model, h, K, sub, bp, cut);
    truncated = (s.curvature - s.beta) / M_PI;
    tail_value = tail == TailMode::Analytic ? model_tail(model.bundle, sub, s.edge_plus, s.edge_minus) / M_PI : 0.0;
  };
  DegreeEstimate out;
  evaluate(model.grid.X, out.truncated, out.tail);
  out.value = out.truncated + out.tail;
  double t2 = 0.0, tail2 = 0.0;
  evaluate(model.grid.X - 1.0, t2, tail2);
  out.sensitivity = std::abs(out.value - (t2 + tail2));
  return out;
}

DegreeEstimate degree_via_curvature(const ModelMetric& model, const EndomorphismField& h, TailMode tail) {
  return chern_weil_degree(model, h, full_subbundle(model.bundle), tail);
}

double trace_identity_defect(const ModelMetric& model, const EndomorphismField& h, const FlatSubbundleSpec& sub) {
  require_same_grid(model.grid, h.grid);
  validate_subbundle(model.bundle, sub);
  const CylinderGrid& g = h.grid;
  auto comps = prefix_components(model.bundle, sub);
  const int r = static_cast<int>(comps.size());
  Mat V = columns(h.n, comps);
  // induced metric and transports on the invariant subspace
  Transports ts;
  ts.frame = Frame::Unitary;
  for (const Mat& U : model.unitary.x_plus) ts.x_plus.push_back(V.adjoint() * U * V);
  for (const Mat& U : model.unitary.y_plus) ts.y_plus.push_back(V.adjoint() * U * V);
  for (const Mat& U : model.unitary.y_minus) ts.y_minus.push_back(V.adjoint() * U * V);
  MatrixField hs(g, r, Frame::Unitary);
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) hs.set(i, j, V.adjoint() * h.at(i, j) * V);
  EndomorphismField Ks = curvature_field(ts, hs, model.E);
  EndomorphismField K = curvature_K(model, h);
  OneFormField beta = second_fundamental_form(model, h, sub);
  double defect = 0.0;
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat hp = h.at(i, j);
      Mat pi = subbundle_projector(model.bundle, sub, hp);
      double b2 = (h_norm2(hp, beta.dx.at(i, j)) + h_norm2(hp, beta.dy.at(i, j))) / model.E(i, j);
      double rhs = (pi * K.at(i, j) * pi).trace().real() - 0.25 * b2;
      defect = std::max(defect, std::abs(Ks.at(i, j).trace().real() - rhs));
    }
  return defect;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const size_t m = x.size();
  f.points = static_cast<int>(m);
  if (m < 2) return f;
  double mx = 0, my = 0;
  for (size_t k = 0; k < m; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (size_t k = 0; k < m; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  if (m > 2 && sxx > 0) {
    double ss = 0;
    for (size_t k = 0; k < m; ++k) {
      double r = y[k] - f.intercept - f.slope * x[k];
      ss += r * r;
    }
    double s2 = ss / (m - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / m + mx * mx / sxx));
  }
  return f;
}

namespace {

// Decay exponent of |values| ~ t^{-p}: returns (p, 1.96 se); +inf when all values are at rounding level.
std::pair<double, double> decay_exponent(const std::vector<double>& t, const std::vector<double>& values, double floor) {
  std::vector<double> lx, ly;
  for (size_t k = 0; k < t.size(); ++k)
    if (std::abs(values[k]) > floor) {
      lx.push_back(std::log(t[k]));
      ly.push_back(std::log(std::abs(values[k])));
    }
  if (lx.size() < 5) return {kInf, 0.0};
  LineFit f = fit_line(lx, ly);
  return {-f.slope, 1.96 * f.slope_se};
}

// Least squares z = c0 + c1 t + c2 log t; returns coefficients and the standard error of c2.
void fit_section_norm(const std::vector<double>& t, const std::vector<double>& z, double coef[3], double& se2) {
  const int m = static_cast<int>(t.size());
  Eigen::MatrixXd A(m, 3);
  Eigen::VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = t[k];
    A(k, 2) = std::log(t[k]);
    b(k) = z[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::VectorXd c = qr.solve(b);
  for (int q = 0; q < 3; ++q) coef[q] = c(q);
  double ss = (A * c - b).squaredNorm();
  Eigen::MatrixXd cov = (A.transpose() * A).inverse() * (m > 3 ? ss / (m - 3) : 0.0);
  se2 = std::sqrt(std::max(cov(2, 2), 0.0));
}

}  // namespace

TamenessReport tameness_report(const ModelMetric& model, const EndomorphismField& h, const TamenessOptions& opt) {
  require_same_grid(model.grid, h.grid);
  const CylinderGrid& g = h.grid;
  const FlatBundleSpec& b = model.bundle;
  const int n = h.n;
  const double t_lo = 0.5 * g.X, t_hi = g.X - 1.0;

  EndomorphismField K = curvature_K(model, h);
  OneFormField psi = psi_field(model, h);
  ConnectionField omega = unitary_connection(model);
  std::vector<double> us = twist_slope(model);

  TamenessReport rep;
  rep.pass = true;
  for (int side : {+1, -1}) {
    EndTameness end;
    end.puncture = side > 0 ? "zero" : "infinity";
    end.t_lo = t_lo;
    end.t_hi = t_hi;
    std::vector<int> rows;
    for (int i = 1; i < g.Nx; ++i) {
      double t = side * g.x(i);
      if (t >= t_lo - 1e-12 && t <= t_hi + 1e-12) rows.push_back(i);
    }
    std::sort(rows.begin(), rows.end(), [&](int a, int c) { return side * g.x(a) < side * g.x(c); });
    end.window_nodes = static_cast<int>(rows.size());
    if (end.window_nodes < opt.min_window_nodes)
      fail(ErrorKind::InsufficientRange, fmt::format("fit window t in [{}, {}] holds {} nodes, need {}", t_lo, t_hi,
                                                     end.window_nodes, opt.min_window_nodes));
    std::vector<double> ts;
    for (int i : rows) ts.push_back(side * g.x(i));

    // (A) integral of |K| dnu beyond t on this end
    {
      std::vector<double> row_mass(g.rows(), 0.0);
      for (int i = 1; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) row_mass[i] += model.E(i, j) * std::sqrt(frob2(K.at(i, j))) * g.dx * g.dy;
      for (int i : rows) {
        double acc = 0.0;
        for (int q = 1; q < g.Nx; ++q)
          if (side * g.x(q) >= side * g.x(i)) acc += row_mass[q];
        end.curvature_tail.push_back({side * g.x(i), acc});
      }
      double first = end.curvature_tail.front().second, last = end.curvature_tail.back().second;
      end.pass_a = first < 1e-12 || last <= 0.5 * first;
    }

    // (B) trace of Psi on each block, along d/dt = side d/dx
    end.pass_b = true;
    for (int l = 0; l < b.block_count(); ++l) {
      const int off = b.block_offset(l), d = b.block_dim(l);
      std::vector<double> inv_t, y;
      for (int i : rows) {
        double acc = 0.0;
        for (int j = 0; j < g.Ny; ++j) {
          auto logdet = [&](int q) {
            Mat hs = h.at(q, j).block(off, off, d, d);
            return std::log(hs.determinant().real());
          };
          double tr = 0.5 * (logdet(i + 1) - logdet(i - 1)) / (2.0 * g.dx) - 0.5 * d * us[i];
          for (int k = off; k < off + d; ++k) tr -= omega.dx.at(i, j)(k, k).real();
          acc += tr;
        }
        inv_t.push_back(1.0 / (side * g.x(i)));
        y.push_back(side * acc / g.Ny);
      }
      LineFit f = fit_line(inv_t, y);
      BlockWeightFit bw;
      bw.block = l;
      bw.configured = side > 0 ? b.weight_zero(l) : b.weight_infinity(l);
      bw.fitted = -f.intercept / d;
      bw.ci = 1.96 * f.intercept_se / d;
      bw.relative_error = std::abs(bw.fitted - bw.configured) / std::max(std::abs(bw.configured), opt.weight_floor);
      std::vector<double> rem;
      for (double v : y) rem.push_back(v - f.intercept);
      auto [eps, eps_ci] = decay_exponent(ts, rem, 1e-10 * std::max(1.0, std::abs(f.intercept)));
      bw.epsilon = eps;
      bw.epsilon_ci = eps_ci;
      bw.pass = bw.relative_error < opt.weight_rel_tol && eps - eps_ci > 0.0;
      if (bw.relative_error >= opt.weight_rel_tol) rep.weight_mismatch = true;
      end.pass_b = end.pass_b && bw.pass;
      end.blocks.push_back(bw);
    }

    // (C) norms of the temporal (flat) frame vectors along the ray y = 0
    end.pass_c = true;
    {
      std::vector<Mat> gauges;
      for (int i : rows) gauges.push_back(frame_gauge(model, i, Frame::Unitary, Frame::Temporal));
      for (int k = 0; k < n; ++k) {
        const int l = model.comp_block[k], d = b.block_dim(l), alpha = model.comp_alpha[k];
        std::vector<double> z;
        for (size_t r = 0; r < rows.size(); ++r) {
          int i = rows[r];
          double gk = std::abs(gauges[r](k, k));
          z.push_back(0.5 * (std::log(gk * gk * h.at(i, 0)(k, k).real()) - model.row_u(i)));
        }
        double coef[3], se2;
        fit_section_norm(ts, z, coef, se2);
        SectionNormFit sf;
        sf.component = k;
        sf.block = l;
        sf.configured_weight = side > 0 ? b.weight_zero(l) : b.weight_infinity(l);
        sf.fitted_weight = -coef[1];
        sf.configured_half_tau = 0.5 * nilpotent_weights(d)[alpha - 1];
        sf.fitted_half_tau = coef[2];
        sf.half_tau_ci = 1.96 * se2;
        double werr =
            std::abs(sf.fitted_weight - sf.configured_weight) / std::max(std::abs(sf.configured_weight), opt.weight_floor);
        double terr = std::abs(sf.fitted_half_tau - sf.configured_half_tau) /
                      std::max(std::abs(sf.configured_half_tau), 0.5);
        sf.pass = werr < opt.weight_rel_tol && terr < opt.half_tau_rel_tol;
        end.pass_c = end.pass_c && sf.pass;
        end.sections.push_back(sf);
      }
    }

    // (D) Psi minus its diagonal limit in a block-compatible frame
    {
      Mat W = Mat::Zero(n, n), R = Mat::Zero(n, n);
      for (int k = 0; k < n; ++k) {
        int l = model.comp_block[k];
        W(k, k) = side > 0 ? b.weight_zero(l) : b.weight_infinity(l);
        R(k, k) = b.block_kappa(l).real();
      }
      std::vector<double> dev;
      for (int i : rows) {
        double worst = 0.0;
        for (int j = 0; j < g.Ny; ++j) {
          Mat pt = side * (psi.dx.at(i, j) - 0.5 * us[i] * Mat::Identity(n, n));
          double v = std::sqrt(frob2(pt + W)) + std::sqrt(frob2(psi.dy.at(i, j) + R));
          worst = std::max(worst, v);
        }
        dev.push_back(worst);
      }
      auto [p, ci] = decay_exponent(ts, dev, 1e-12);
      end.offdiag_exponent = p;
      end.offdiag_ci = ci;
      end.pass_d = p - ci > 0.0;
    }
    rep.pass = rep.pass && end.pass_a && end.pass_b && end.pass_c && end.pass_d;
    rep.ends.push_back(std::move(end));
  }
  return rep;
}

DecayProfile gradient_decay_profile(const ModelMetric& model, const EndomorphismField& h,
                                    std::vector<double> cutoffs) {
  require_same_grid(model.grid, h.grid);
  const CylinderGrid& g = h.grid;
  if (cutoffs.empty())
    for (double c = 1.0; c <= g.X - 1.0 + 1e-12; c += 0.5) cutoffs.push_back(c);
  DecayProfile out;
  std::vector<double> lx, ly;
  for (double c : cutoffs) {
    double v = energy_density_integral(model, h, c);
    out.table.push_back({c, v});
    out.constant = std::max(out.constant, c * v);
    if (v > 1e-300) {
      lx.push_back(std::log(c));
      ly.push_back(std::log(v));
    }
  }
  out.exponent = lx.size() >= 2 ? -fit_line(lx, ly).slope : 0.0;
  double sup_tr = 0.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) sup_tr = std::max(sup_tr, h.at(i, j).trace().real());
  out.bound = 100.0 * M_PI * sup_tr * sup_tr;
  out.exceeds_bound = out.constant > out.bound;
  return out;
}

FourierGap fourier_gap(const std::vector<cd>& samples, double lambda, double tol) {
  const int N = static_cast<int>(samples.size());
  if (N < 8) fail(ErrorKind::InvalidArgument, fmt::format("need at least 8 circle samples, got {}", N));
  fftw_complex* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * N));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int k = 0; k < N; ++k) {
    buf[k][0] = samples[k].real();
    buf[k][1] = samples[k].imag();
  }
  fftw_execute(plan);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < N; ++k) {
    int mode = k < N / 2 ? k : k - N;
    double p = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    num += (mode + lambda) * (mode + lambda) * p;
    den += p;
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  if (den == 0.0) fail(ErrorKind::ZeroInput, "circle samples vanish identically");
  FourierGap out;
  out.ratio = num / den;
  double frac = lambda - std::round(lambda);
  out.gap = frac * frac;
  out.holds = out.ratio >= out.gap - tol;
  return out;
}

UniquenessComparison uniqueness_compare(const MatrixField& H1, const MatrixField& H2) {
  require_same_grid(H1.grid, H2.grid);
  if (H1.frame != H2.frame || H1.n != H2.n)
    fail(H1.frame != H2.frame ? ErrorKind::FrameMismatch : ErrorKind::RankMismatch, "metrics must share frame and rank");
  const CylinderGrid& g = H1.grid;
  std::vector<Mat> ratio;
  double log_sum = 0.0;
  long count = 0;
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat a = H1.at(i, j), b = H2.at(i, j);
      Eigen::LLT<Mat> llt(a);
      if (llt.info() != Eigen::Success) fail(ErrorKind::SingularH, "first metric is not positive definite");
      Mat L = llt.matrixL();
      Mat Li = L.inverse();
      RVec ev = herm_eig(hermitize(Li * b * Li.adjoint())).values;
      for (int k = 0; k < ev.size(); ++k) {
        if (!(ev(k) > 0.0)) fail(ErrorKind::SingularH, "second metric is not positive definite");
        log_sum += std::log(ev(k));
        ++count;
      }
      ratio.push_back(llt.solve(b));
    }
  UniquenessComparison out;
  out.scale = std::exp(log_sum / count);
  for (const Mat& r : ratio)
    out.deviation = std::max(out.deviation, std::sqrt(frob2(r - out.scale * Mat::Identity(r.rows(), r.cols()))));
  return out;
}

}  // namespace pg
