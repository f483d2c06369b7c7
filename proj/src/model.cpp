#include "pg/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pg/curvature.hpp"
#include "pg/linalg.hpp"

namespace pg {

namespace {

// C-infinity step on [0, 1] built from exp(-1/s).
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  double da = a / (s * s), db = -b / ((1.0 - s) * (1.0 - s));
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double potential(const FlatBundleSpec& b, int block, double x) {
  double w0 = b.weight_zero(block), wi = b.weight_infinity(block);
  return -wi + (w0 + wi) * weight_step(x);
}

double potential_integral(const FlatBundleSpec& b, int block, double x0, double x1) {
  // composite over unit-length pieces keeps the quadrature accurate across the step
  int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(x1 - x0))));
  double h = (x1 - x0) / pieces, s = 0.0;
  for (int p = 0; p < pieces; ++p) {
    double a = x0 + p * h, mid = a + 0.5 * h;
    for (int k = 0; k < 8; ++k) s += kGLw[k] * potential(b, block, mid + 0.5 * h * kGLx[k]);
  }
  return 0.5 * h * s;
}

// Derivative of u along x per row (u is y-independent).
std::vector<double> du_dx(const ModelMetric& m) {
  const CylinderGrid& g = m.grid;
  std::vector<double> d(g.rows());
  for (int i = 0; i <= g.Nx; ++i) {
    if (i == 0)
      d[i] = (-3.0 * m.row_u(0) + 4.0 * m.row_u(1) - m.row_u(2)) / (2.0 * g.dx);
    else if (i == g.Nx)
      d[i] = (3.0 * m.row_u(i) - 4.0 * m.row_u(i - 1) + m.row_u(i - 2)) / (2.0 * g.dx);
    else
      d[i] = (m.row_u(i + 1) - m.row_u(i - 1)) / (2.0 * g.dx);
  }
  return d;
}

// Exponent of the parabolic-to-temporal factor per row: phi(x) = int_0^x potential.
std::vector<double> cumulative_phase(const ModelMetric& m) {
  const CylinderGrid& g = m.grid;
  std::vector<double> phi(static_cast<size_t>(g.rows()) * m.n);
  for (int k = 0; k < m.n; ++k) {
    double origin = potential_integral(m.bundle, m.comp_block[k], -g.X, 0.0);
    double acc = 0.0;
    for (int i = 0; i <= g.Nx; ++i) {
      phi[static_cast<size_t>(i) * m.n + k] = acc - origin;
      if (i < g.Nx) acc += m.phase_step[static_cast<size_t>(i) * m.n + k];
    }
  }
  return phi;
}

// log of the diagonal gauge from `frame` components to temporal components.
RVec log_gauge_to_temporal(const ModelMetric& m, const std::vector<double>& phi, int i, Frame f) {
  RVec v = RVec::Zero(m.n);
  if (f == Frame::Temporal) return v;
  for (int k = 0; k < m.n; ++k) {
    v(k) = phi[static_cast<size_t>(i) * m.n + k];
    if (f == Frame::Unitary) v(k) -= 0.5 * (m.row_u(i) + std::log(m.lam(i, k)));
  }
  return v;
}

RVec dlog_gauge_to_temporal(const ModelMetric& m, const std::vector<double>& du, int i, Frame f) {
  RVec v = RVec::Zero(m.n);
  if (f == Frame::Temporal) return v;
  for (int k = 0; k < m.n; ++k) {
    v(k) = m.weight_potential[static_cast<size_t>(i) * m.n + k];
    if (f == Frame::Unitary) {
      int d = m.bundle.block_dim(m.comp_block[k]);
      int tau = 2 * m.comp_alpha[k] - (d + 1);
      v(k) -= 0.5 * (du[i] + tau * m.dt_dx[i] / m.t[i]);
    }
  }
  return v;
}

Mat residue_exp(const ModelMetric& m, double s) {
  // exp(s B) with B = direct sum of kappa I + N
  Mat out = Mat::Zero(m.n, m.n);
  for (int l = 0; l < m.bundle.block_count(); ++l) {
    int off = m.bundle.block_offset(l), d = m.bundle.block_dim(l);
    cd e = std::exp(s * m.bundle.block_kappa(l));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) out(off + a, off + b) = e * std::pow(s, b - a) / factorial(b - a);
  }
  return out;
}

Mat residue(const ModelMetric& m) {
  Mat B = Mat::Zero(m.n, m.n);
  for (int l = 0; l < m.bundle.block_count(); ++l) {
    int off = m.bundle.block_offset(l), d = m.bundle.block_dim(l);
    for (int a = 0; a < d; ++a) {
      B(off + a, off + a) = m.bundle.block_kappa(l);
      if (a + 1 < d) B(off + a, off + a + 1) = 1.0;
    }
  }
  return B;
}

void fill_geometry(ModelMetric& m) {
  const CylinderGrid& g = m.grid;
  const int n = m.n;
  m.comp_block.clear();
  m.comp_alpha.clear();
  for (int l = 0; l < m.bundle.block_count(); ++l)
    for (int a = 1; a <= m.bundle.block_dim(l); ++a) {
      m.comp_block.push_back(l);
      m.comp_alpha.push_back(a);
    }
  m.t.resize(g.rows());
  m.dt_dx.resize(g.rows());
  m.lambda.resize(static_cast<size_t>(g.rows()) * n);
  m.weight_potential.resize(static_cast<size_t>(g.rows()) * n);
  m.phase_step.assign(static_cast<size_t>(g.Nx) * n, 0.0);
  for (int i = 0; i <= g.Nx; ++i) {
    double x = g.x(i);
    m.t[i] = blended_argument(x, m.options);
    m.dt_dx[i] = blended_argument_derivative(x, m.options);
    for (int l = 0; l < m.bundle.block_count(); ++l) {
      auto lam = block_model_lambdas(m.bundle.block_dim(l), m.t[i]);
      int off = m.bundle.block_offset(l);
      for (int a = 0; a < m.bundle.block_dim(l); ++a) {
        m.lambda[static_cast<size_t>(i) * n + off + a] = lam[a];
        m.weight_potential[static_cast<size_t>(i) * n + off + a] = potential(m.bundle, l, x);
      }
    }
    if (i < g.Nx)
      for (int k = 0; k < n; ++k)
        m.phase_step[static_cast<size_t>(i) * n + k] = potential_integral(m.bundle, m.comp_block[k], x, g.x(i + 1));
  }
}

void fill_transports(ModelMetric& m) {
  const CylinderGrid& g = m.grid;
  const int n = m.n;
  Transports& tr = m.unitary;
  tr.frame = Frame::Unitary;
  tr.x_plus.assign(g.Nx, Mat());
  tr.y_plus.assign(g.rows(), Mat());
  tr.y_minus.assign(g.rows(), Mat());
  Mat ep = residue_exp(m, -g.dy), em = residue_exp(m, g.dy);
  for (int i = 0; i <= g.Nx; ++i) {
    if (i < g.Nx) {
      Mat U = Mat::Zero(n, n);
      for (int k = 0; k < n; ++k) {
        double ratio = std::exp(m.row_u(i + 1) - m.row_u(i)) * m.lam(i + 1, k) / m.lam(i, k);
        U(k, k) = std::sqrt(ratio) * std::exp(-m.phase_step[static_cast<size_t>(i) * n + k]);
      }
      tr.x_plus[i] = U;
    }
    // g^{-1} M g with g = diag(lambda^{-1/2}); u cancels
    Mat yp = ep, ym = em;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double f = std::sqrt(m.lam(i, a) / m.lam(i, b));
        yp(a, b) *= f;
        ym(a, b) *= f;
      }
    tr.y_plus[i] = yp;
    tr.y_minus[i] = ym;
  }
}

}  // namespace

const char* frame_name(Frame f) {
  switch (f) {
    case Frame::Temporal: return "temporal";
    case Frame::Parabolic: return "parabolic";
    case Frame::Unitary: return "unitary";
  }
  return "unknown";
}

MatrixField::MatrixField(const CylinderGrid& g, int n_, Frame f)
    : grid(g), frame(f), n(n_), data(g.size() * n_ * n_, cd(0.0, 0.0)) {}

MatrixField MatrixField::identity(const CylinderGrid& g, int n_, Frame f) {
  MatrixField m(g, n_, f);
  for (size_t p = 0; p < g.size(); ++p)
    for (int k = 0; k < n_; ++k) m.data[p * n_ * n_ + k * n_ + k] = 1.0;
  return m;
}

Mat MatrixField::at(int i, int j) const {
  Mat m(n, n);
  const cd* p = node(i, j);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) m(r, c) = p[c * n + r];
  return m;
}

void MatrixField::set(int i, int j, const Mat& m) {
  cd* p = node(i, j);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) p[c * n + r] = m(r, c);
}

Mat Transports::x_minus(int i) const { return x_plus[i - 1].inverse(); }

double weight_step(double x) { return smooth_step((x + 2.0) / 4.0); }

double blended_argument(double x, const ModelOptions& opt) {
  double ax = std::abs(x);
  double b = smooth_step((ax - opt.blend_inner) / (opt.blend_outer - opt.blend_inner));
  return b * ax + (1.0 - b) * std::sqrt(x * x + opt.shift * opt.shift);
}

double blended_argument_derivative(double x, const ModelOptions& opt) {
  double ax = std::abs(x);
  double width = opt.blend_outer - opt.blend_inner;
  double s = (ax - opt.blend_inner) / width;
  double b = smooth_step(s), db = smooth_step_derivative(s) / width;
  double root = std::sqrt(x * x + opt.shift * opt.shift);
  double sign = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  return sign * db * (ax - root) + b * sign + (1.0 - b) * x / root;
}

std::vector<double> block_model_lambdas(int d, double t) {
  if (d < 1) fail(ErrorKind::InvalidArgument, "block size must be positive");
  if (!(t > 1.0)) fail(ErrorKind::DomainError, fmt::format("model argument must exceed 1, got {}", t));
  std::vector<double> lam(d);
  for (int i = 1; i <= d; ++i) lam[i - 1] = factorial(d - i) / factorial(i - 1) * std::pow(t, 2 * i - (d + 1));
  return lam;
}

double model_ode_residual(const std::vector<std::vector<double>>& lambdas, double h) {
  double worst = 0.0;
  for (size_t k = 1; k + 1 < lambdas.size(); ++k) {
    const auto& l = lambdas[k];
    const size_t d = l.size();
    for (size_t i = 0; i < d; ++i) {
      double second = (std::log(lambdas[k + 1][i]) - 2.0 * std::log(l[i]) + std::log(lambdas[k - 1][i])) / (h * h);
      double rhs = (i + 1 < d ? l[i] / l[i + 1] : 0.0) - (i > 0 ? l[i - 1] / l[i] : 0.0);
      worst = std::max(worst, std::abs(second - rhs));
    }
  }
  return worst;
}

double poisson_constant(const FlatBundleSpec& bundle, double vol) {
  if (!(vol > 0.0)) fail(ErrorKind::InvalidArgument, "volume must be positive");
  return 2.0 * M_PI * parabolic_degree(bundle) / (bundle.rank * vol);
}

std::vector<double> untwisted_trace_curvature(const FlatBundleSpec& bundle, const CylinderGrid& grid,
                                              const ScalarField& E, const ModelOptions& opt) {
  ModelMetric m;
  m.bundle = bundle;
  m.grid = grid;
  m.options = opt;
  m.n = bundle.rank;
  fill_geometry(m);
  // Tr K = (1/2E) sum_k (dphi_k(i) - dphi_k(i-1)) / dx^2; the lambda and y terms cancel in the trace.
  std::vector<double> tr(grid.rows(), 0.0);
  for (int i = 1; i < grid.Nx; ++i) {
    double s = 0.0;
    for (int k = 0; k < m.n; ++k)
      s += m.phase_step[static_cast<size_t>(i) * m.n + k] - m.phase_step[static_cast<size_t>(i - 1) * m.n + k];
    tr[i] = 0.5 * s / (E(i, 0) * grid.dx * grid.dx);
  }
  return tr;
}

ScalarField solve_conformal_factor(const FlatBundleSpec& bundle, const CylinderGrid& grid, const ScalarField& E,
                                   double c, const ModelOptions& opt) {
  require_same_grid(grid, E.grid);
  auto tr = untwisted_trace_curvature(bundle, grid, E, opt);
  ScalarField rhs(grid);
  for (int i = 1; i < grid.Nx; ++i)
    for (int j = 0; j < grid.Ny; ++j) rhs(i, j) = 4.0 * E(i, j) * (tr[i] / bundle.rank - c);
  // Tr K(e^u Hhat) = Tr K(Hhat) - (n/4E) Lap u = n c
  return poisson_solve(rhs, PoissonBC::MeanZero);
}

ModelMetric build_model_metric(const FlatBundleSpec& bundle, const CylinderGrid& grid, const ConformalPreset& preset,
                               const ModelOptions& opt, std::optional<double> c) {
  if (grid.X < opt.blend_outer)
    fail(ErrorKind::DomainError, fmt::format("grid half-length {} does not fit the blend band (needs >= {})", grid.X,
                                             opt.blend_outer));
  ModelMetric m;
  m.bundle = bundle;
  m.grid = grid;
  m.options = opt;
  m.preset = preset;
  m.n = bundle.rank;
  m.E = conformal_factor(preset, grid);
  m.volume = volume(m.E, preset.kind == PresetKind::CustomTable ? TailMode::None : TailMode::Analytic, &preset);
  m.c_closed_form = poisson_constant(bundle, m.volume);

  auto tr = untwisted_trace_curvature(bundle, grid, m.E, opt);
  double num = 0.0, den = 0.0;
  for (int i = 1; i < grid.Nx; ++i) {
    num += m.E(i, 0) * tr[i];
    den += m.E(i, 0);
  }
  m.c = c ? *c : num / (m.n * den);
  m.u = opt.conformal_twist ? solve_conformal_factor(bundle, grid, m.E, m.c, opt) : ScalarField(grid, 0.0);
  fill_geometry(m);
  fill_transports(m);
  return m;
}

Mat frame_gauge(const ModelMetric& model, int i, Frame from, Frame to) {
  auto phi = cumulative_phase(model);
  RVec a = log_gauge_to_temporal(model, phi, i, from), b = log_gauge_to_temporal(model, phi, i, to);
  Mat g = Mat::Zero(model.n, model.n);
  for (int k = 0; k < model.n; ++k) g(k, k) = std::exp(b(k) - a(k));
  return g;
}

namespace {

// Diagonal gauges per row, from -> to.
std::vector<RVec> row_gauges(const ModelMetric& model, Frame from, Frame to) {
  auto phi = cumulative_phase(model);
  std::vector<RVec> out(model.grid.rows());
  for (int i = 0; i <= model.grid.Nx; ++i)
    out[i] = (log_gauge_to_temporal(model, phi, i, to) - log_gauge_to_temporal(model, phi, i, from)).array().exp();
  return out;
}

}  // namespace

MetricField model_metric_field(const ModelMetric& model, Frame frame) {
  MetricField I = MetricField::identity(model.grid, model.n, Frame::Unitary);
  return gauge_transform_metric(model, I, frame);
}

ConnectionField model_connection(const ModelMetric& model, Frame frame) {
  const CylinderGrid& g = model.grid;
  ConnectionField A{MatrixField(g, model.n, Frame::Temporal), MatrixField(g, model.n, Frame::Temporal)};
  Mat B = residue(model);
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) A.dy.set(i, j, B);
  return gauge_transform_connection(model, A, frame);
}

std::vector<double> twist_slope(const ModelMetric& model) { return du_dx(model); }

ConnectionField unitary_connection(const ModelMetric& model) { return model_connection(model, Frame::Unitary); }

MetricField gauge_transform_metric(const ModelMetric& model, const MetricField& H, Frame to) {
  require_same_grid(model.grid, H.grid);
  if (H.n != model.n) fail(ErrorKind::InvalidArgument, "field rank differs from bundle rank");
  auto gs = row_gauges(model, H.frame, to);
  MetricField out(H.grid, H.n, to);
  for (int i = 0; i <= H.grid.Nx; ++i) {
    Mat gm = gs[i].cast<cd>().asDiagonal();
    for (int j = 0; j < H.grid.Ny; ++j) out.set(i, j, gm.adjoint() * H.at(i, j) * gm);
  }
  return out;
}

EndomorphismField gauge_transform_endomorphism(const ModelMetric& model, const EndomorphismField& A, Frame to) {
  require_same_grid(model.grid, A.grid);
  if (A.n != model.n) fail(ErrorKind::InvalidArgument, "field rank differs from bundle rank");
  auto gs = row_gauges(model, A.frame, to);
  EndomorphismField out(A.grid, A.n, to);
  for (int i = 0; i <= A.grid.Nx; ++i) {
    Mat gm = gs[i].cast<cd>().asDiagonal();
    Mat gi = gs[i].cwiseInverse().cast<cd>().asDiagonal();
    for (int j = 0; j < A.grid.Ny; ++j) out.set(i, j, gi * A.at(i, j) * gm);
  }
  return out;
}

ConnectionField gauge_transform_connection(const ModelMetric& model, const ConnectionField& A, Frame to) {
  require_same_grid(model.grid, A.dx.grid);
  if (A.dx.frame != A.dy.frame) fail(ErrorKind::FrameMismatch, "connection components carry different frames");
  Frame from = A.dx.frame;
  ConnectionField out{gauge_transform_endomorphism(model, A.dx, to), gauge_transform_endomorphism(model, A.dy, to)};
  auto du = du_dx(model);
  for (int i = 0; i <= model.grid.Nx; ++i) {
    RVec shift = dlog_gauge_to_temporal(model, du, i, to) - dlog_gauge_to_temporal(model, du, i, from);
    for (int j = 0; j < model.grid.Ny; ++j) {
      Mat m = out.dx.at(i, j);
      for (int k = 0; k < model.n; ++k) m(k, k) += shift(k);
      out.dx.set(i, j, m);
    }
  }
  return out;
}

Transports transports_in_frame(const ModelMetric& model, Frame frame) {
  if (frame == Frame::Unitary) return model.unitary;
  auto gs = row_gauges(model, frame, Frame::Unitary);  // v_frame = diag(gs) v_unitary
  Transports tr;
  tr.frame = frame;
  const CylinderGrid& g = model.grid;
  tr.x_plus.resize(g.Nx);
  tr.y_plus.resize(g.rows());
  tr.y_minus.resize(g.rows());
  for (int i = 0; i <= g.Nx; ++i) {
    Mat to_frame = gs[i].cast<cd>().asDiagonal();
    Mat to_unitary = gs[i].cwiseInverse().cast<cd>().asDiagonal();
    if (i < g.Nx) {
      Mat next = gs[i + 1].cast<cd>().asDiagonal();
      tr.x_plus[i] = next * model.unitary.x_plus[i] * to_unitary;
    }
    tr.y_plus[i] = to_frame * model.unitary.y_plus[i] * to_unitary;
    tr.y_minus[i] = to_frame * model.unitary.y_minus[i] * to_unitary;
  }
  return tr;
}

EndomorphismField conjugated_model(const ModelMetric& model, const Mat& sigma) {
  const CylinderGrid& g = model.grid;
  EndomorphismField h(g, model.n, Frame::Unitary);
  for (int i = 0; i <= g.Nx; ++i) {
    // parabolic H0 = diag(e^u lambda); unitary h = D^{1/2} (H0^{-1} sigma^* H0 sigma) D^{-1/2}, D = H0
    RVec d(model.n);
    for (int k = 0; k < model.n; ++k) d(k) = std::exp(model.row_u(i)) * model.lam(i, k);
    Mat H0 = d.cast<cd>().asDiagonal();
    Mat hp = H0.inverse() * sigma.adjoint() * H0 * sigma;
    Mat s = d.cwiseSqrt().cast<cd>().asDiagonal();
    Mat si = d.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal();
    Mat hu = s * hp * si;
    for (int j = 0; j < g.Ny; ++j) h.set(i, j, hu);
  }
  return h;
}

ScalarField model_residual(const ModelMetric& model) {
  EndomorphismField I = EndomorphismField::identity(model.grid, model.n, Frame::Unitary);
  return residual_field(curvature_K(model, I), model.c);
}

ModelMetric restrict_model(const ModelMetric& model, double X) {
  const CylinderGrid& big = model.grid;
  double steps = 2.0 * X / big.dx;
  int Nx = static_cast<int>(std::lround(steps));
  if (std::abs(steps - Nx) > 1e-9 || (big.Nx - Nx) % 2 != 0 || Nx > big.Nx)
    fail(ErrorKind::BadDimensions, fmt::format("half-length {} is not a centred sub-grid of the model grid", X));
  CylinderGrid sub = build_grid(X, Nx, big.Ny);
  sub.dx = big.dx;
  const int off = (big.Nx - Nx) / 2;
  const int n = model.n;
  ModelMetric m = model;
  m.grid = sub;
  m.E = ScalarField(sub);
  m.u = ScalarField(sub);
  for (int i = 0; i <= Nx; ++i)
    for (int j = 0; j < sub.Ny; ++j) {
      m.E(i, j) = model.E(i + off, j);
      m.u(i, j) = model.u(i + off, j);
    }
  auto slice = [&](const std::vector<double>& v, int count, int per) {
    return std::vector<double>(v.begin() + static_cast<long>(off) * per, v.begin() + static_cast<long>(off + count) * per);
  };
  m.t = slice(model.t, Nx + 1, 1);
  m.dt_dx = slice(model.dt_dx, Nx + 1, 1);
  m.lambda = slice(model.lambda, Nx + 1, n);
  m.weight_potential = slice(model.weight_potential, Nx + 1, n);
  m.phase_step = slice(model.phase_step, Nx, n);
  m.unitary.x_plus.assign(model.unitary.x_plus.begin() + off, model.unitary.x_plus.begin() + off + Nx);
  m.unitary.y_plus.assign(model.unitary.y_plus.begin() + off, model.unitary.y_plus.begin() + off + Nx + 1);
  m.unitary.y_minus.assign(model.unitary.y_minus.begin() + off, model.unitary.y_minus.begin() + off + Nx + 1);
  return m;
}

MatrixField restrict_field(const MatrixField& f, const CylinderGrid& sub) {
  int off = (f.grid.Nx - sub.Nx) / 2;
  if (sub.Ny != f.grid.Ny || off < 0 || (f.grid.Nx - sub.Nx) % 2 != 0)
    fail(ErrorKind::MismatchedGrid, "sub-grid is not centred in the field grid");
  MatrixField out(sub, f.n, f.frame);
  for (int i = 0; i <= sub.Nx; ++i)
    for (int j = 0; j < sub.Ny; ++j) out.set(i, j, f.at(i + off, j));
  return out;
}

MatrixField extend_by_identity(const MatrixField& f, const CylinderGrid& big) {
  int off = (big.Nx - f.grid.Nx) / 2;
  if (big.Ny != f.grid.Ny || off < 0 || (big.Nx - f.grid.Nx) % 2 != 0)
    fail(ErrorKind::MismatchedGrid, "field grid is not centred in the target grid");
  MatrixField out = MatrixField::identity(big, f.n, f.frame);
  for (int i = 0; i <= f.grid.Nx; ++i)
    for (int j = 0; j < big.Ny; ++j) out.set(i + off, j, f.at(i, j));
  return out;
}

}  // namespace pg
