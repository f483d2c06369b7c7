#include <doctest.h>

#include <random>

#include "pg/reference.hpp"
#include "support.hpp"

using namespace pg;
using namespace pgtest;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

ModelOptions untwisted_options() {
  ModelOptions o;
  o.conformal_twist = false;
  return o;
}

ConformalPreset flat_preset(double X) {
  ConformalPreset p;
  p.kind = PresetKind::CustomTable;
  p.table_x = {-X - 1.0, X + 1.0};
  p.table_values = {1.0, 1.0};
  return p;
}

double boundary_deviation(const EndomorphismField& h) {
  double worst = 0.0;
  for (int i : {0, h.grid.Nx})
    for (int j = 0; j < h.grid.Ny; ++j) worst = std::max(worst, (h.at(i, j) - Mat::Identity(h.n, h.n)).norm());
  return worst;
}

double max_offdiag(const EndomorphismField& h) {
  double worst = 0.0;
  for (int i = 0; i <= h.grid.Nx; ++i)
    for (int j = 0; j < h.grid.Ny; ++j) {
      Mat m = h.at(i, j);
      for (int r = 0; r < h.n; ++r)
        for (int c = 0; c < h.n; ++c)
          if (r != c) worst = std::max(worst, std::abs(m(r, c)));
    }
  return worst;
}

// Max difference of a coarse field against every other row and column of a fine one.
double coarse_fine_diff(const EndomorphismField& coarse, const EndomorphismField& fine) {
  double worst = 0.0;
  for (int i = 0; i <= coarse.grid.Nx; ++i)
    for (int j = 0; j < coarse.grid.Ny; ++j)
      worst = std::max(worst, (coarse.at(i, j) - fine.at(2 * i, 2 * j)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("curvature of the reference metric is the model curvature") {
  CylinderGrid g = build_grid(4.0, 40, 16);
  ModelMetric m = build_model_metric(jordan_bundle(2, 0.1, 0.2), g, ConformalPreset{});
  EndomorphismField K = curvature_K(m, EndomorphismField::identity(g, 2, Frame::Unitary));
  EndomorphismField K0 = curvature_field(m.unitary, MetricField::identity(g, 2, Frame::Unitary), m.E);
  CHECK(max_diff(K, K0) == 0.0);
  CHECK(boundary_deviation(K) == doctest::Approx(std::sqrt(2.0)));  // boundary rows hold zero
}

TEST_CASE("rank-1 curvature of h = e^f is the scalar Laplacian of f") {
  double prev = 0.0;
  for (int refine : {1, 2}) {
    CylinderGrid g = build_grid(5.0, 50 * refine, 16 * refine);
    ModelMetric m = build_model_metric(line_bundle(0.0, 0.0), g, flat_preset(5.0), untwisted_options());
    EndomorphismField h(g, 1, Frame::Unitary);
    ScalarField f(g);
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) {
        f(i, j) = std::exp(-g.x(i) * g.x(i)) * std::cos(g.y(j));
        Mat v(1, 1);
        v(0, 0) = std::exp(f(i, j));
        h.set(i, j, v);
      }
    EndomorphismField K = curvature_K(m, h);
    ScalarField lap5 = laplacian5(f, PoissonBC::DirichletZero);
    double discrete = 0.0, analytic = 0.0;
    for (int i = 1; i < g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) {
        double x = g.x(i), y = g.y(j);
        double exact = -0.25 * (4 * x * x - 3) * std::exp(-x * x) * std::cos(y);
        discrete = std::max(discrete, std::abs(K.at(i, j)(0, 0).real() + 0.25 * lap5(i, j)));
        analytic = std::max(analytic, std::abs(K.at(i, j)(0, 0).real() - exact));
      }
    CHECK(discrete < 1e-12);
    if (prev > 0) CHECK(prev / analytic == doctest::Approx(4.0).epsilon(0.05));
    prev = analytic;
  }
}

TEST_CASE("curvature rejects degenerate metrics") {
  CylinderGrid g = build_grid(4.0, 20, 8);
  ModelMetric m = build_model_metric(split_bundle(0, 0, 0, 0), g, ConformalPreset{});
  EndomorphismField h = EndomorphismField::identity(g, 2, Frame::Unitary);
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = 0.0;
  h.set(10, 3, bad);
  CHECK(kind_of([&] { curvature_K(m, h); }) == ErrorKind::SingularH);
}

TEST_CASE("curvature is frame covariant") {
  CylinderGrid g = build_grid(4.0, 40, 16);
  auto b = make_bundle(3, {{cd(0, 0.2), 2}, {cd(0, 0.6), 1}}, {0.1, -0.2}, {{cd(0, 0.8), 2}, {cd(0, 0.4), 1}},
                       {0.3, 0.0});
  ModelMetric m = build_model_metric(b, g, ConformalPreset{});
  EndomorphismField h = perturbed_initial(m, 0.3, 5);
  EndomorphismField K = curvature_K(m, h);
  for (Frame f : {Frame::Parabolic, Frame::Temporal}) {
    MetricField H = gauge_transform_metric(m, h, f);
    EndomorphismField Kf = curvature_field(transports_in_frame(m, f), H, m.E);
    EndomorphismField back = gauge_transform_endomorphism(m, Kf, Frame::Unitary);
    double scale = 0.0;
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) scale = std::max(scale, K.at(i, j).cwiseAbs().maxCoeff());
    CHECK(max_diff(back, K) < 1e-8 * scale);
  }
}

TEST_CASE("flat models are fixed points of the flow") {
  CylinderGrid g = build_grid(4.0, 20, 8);
  for (auto b : {line_bundle(0.0, 0.0, cd(0.0, 0.3)), split_bundle(0, 0, 0, 0)}) {
    ModelMetric m = build_model_metric(b, g, ConformalPreset{});
    FlowState s = initial_state(m);
    FlowOptions opt;
    for (int k = 0; k < 5; ++k) s = flow_step(s, m, opt);
    CHECK(max_diff(s.h, EndomorphismField::identity(g, b.rank, Frame::Unitary)) == 0.0);
    CHECK(s.t > 0.0);
  }
}

TEST_CASE("det h stays one and boundary rows stay the identity") {
  CylinderGrid g = build_grid(3.0, 15, 16);
  ModelMetric m = build_model_metric(jordan_bundle(2, 0.25, 0.25), g, ConformalPreset{});
  FlowOptions opt;
  FlowState s = initial_state(m);
  double det_err = 0.0, bdry = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = flow_step(s, m, opt);
    bdry = std::max(bdry, boundary_deviation(s.h));
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) det_err = std::max(det_err, std::abs(s.h.at(i, j).determinant() - 1.0));
  }
  CHECK(det_err < 1e-8);
  CHECK(bdry == 0.0);
  CHECK(sup_trace(s.h) > 2.0 + 1e-6);  // the flow did move
}

TEST_CASE("flow from a perturbation is monotone in the residual") {
  CylinderGrid g = build_grid(3.0, 15, 16);
  ModelMetric m = build_model_metric(split_bundle(0.25, 0.25, 0.25, 0.25), g, ConformalPreset{});
  FlowOptions opt;
  opt.max_flow_steps = 2000;
  opt.steady_solver = false;
  opt.tol = 0.0;
  FlowReport r = run_flow(m, perturbed_initial(m, 0.5, 3), opt);
  CHECK(r.monotone);
  CHECK(r.decay_rate > 0.0);
  for (size_t k = 1; k < r.series.size(); ++k) CHECK(r.series[k].sup_residual <= r.series[k - 1].sup_residual + 1e-10);
  CHECK(boundary_deviation(r.h) == 0.0);
}

TEST_CASE("rank-1 steady state matches the linear oracle") {
  CylinderGrid g = build_grid(5.0, 50, 16);
  ModelMetric m = build_model_metric(line_bundle(0.4, -0.1), g, ConformalPreset{}, untwisted_options());
  FlowOptions opt;
  opt.tol = 1e-12;
  opt.max_flow_steps = 20;
  FlowReport r = run_flow(m, EndomorphismField::identity(g, 1, Frame::Unitary), opt);
  CHECK(r.converged);
  ScalarField f = rank1_linear_oracle(m);
  double d = 0.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) d = std::max(d, std::abs(r.h.at(i, j)(0, 0).real() - std::exp(f(i, j))));
  CHECK(d < 1e-6);
}

TEST_CASE("polystable steady state is block diagonal") {
  CylinderGrid g = build_grid(4.0, 40, 16);
  ModelMetric m = build_model_metric(split_bundle(0.3, 0.1, 0.2, 0.4), g, ConformalPreset{});
  FlowOptions opt;
  opt.tol = 1e-11;
  opt.max_flow_steps = 100;
  FlowReport r = run_flow(m, perturbed_initial(m, 0.3, 9), opt);
  CHECK(r.converged);
  CHECK(max_offdiag(r.h) < 1e-8);
}

TEST_CASE("steady states converge at second order under refinement") {
  std::vector<EndomorphismField> sols;
  for (int refine : {1, 2, 4}) {
    CylinderGrid g = build_grid(4.0, 16 * refine, 8 * refine);
    ModelMetric m = build_model_metric(jordan_bundle(2, 0.1, 0.1), g, ConformalPreset{});
    FlowOptions opt;
    opt.tol = 1e-12;
    opt.max_flow_steps = 0;
    FlowReport r = run_flow(m, EndomorphismField::identity(g, 2, Frame::Unitary), opt);
    REQUIRE(r.converged);
    sols.push_back(r.h);
  }
  double e1 = coarse_fine_diff(sols[0], sols[1]), e2 = coarse_fine_diff(sols[1], sols[2]);
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("continuation of a line bundle plateaus") {
  FlowOptions opt;
  opt.tol = 1e-10;
  opt.max_flow_steps = 0;
  ContinuationResult res = rho_continuation(line_bundle(0.25, 0.25), {4.0, 5.0, 6.0}, 60, 8, ConformalPreset{}, opt);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.verdict == "bounded");
  for (auto& row : res.rows) {
    CHECK(row.converged);
    CHECK(row.rho == doctest::Approx(std::exp(-row.X)));
  }
  CHECK(res.final_relative_increase < 0.01);
}

TEST_CASE("destabilizer extraction on a synthetic gap") {
  CylinderGrid g = build_grid(4.0, 20, 8);
  FlatBundleSpec b = split_bundle(0.3, 0.0, 0.0, 0.0);
  ModelMetric m = build_model_metric(b, g, ConformalPreset{});
  EndomorphismField h(g, 2, Frame::Unitary);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1e40;
  d(1, 1) = 1.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) h.set(i, j, d);
  DestabilizerCandidate c = extract_destabilizer(m, h);
  CHECK(c.rank == 1);
  CHECK(c.idempotency < 1e-12);
  CHECK(c.flatness < 1e-12);
  CHECK(c.matched == make_subbundle(b, {0, 1}));
  CHECK(c.matched_distance < 1e-12);

  CHECK(kind_of([&] { extract_destabilizer(m, EndomorphismField::identity(g, 2, Frame::Unitary)); }) ==
        ErrorKind::NoCandidate);
}

TEST_CASE("projection residuals") {
  CylinderGrid g = build_grid(4.0, 20, 8);
  ModelMetric m = build_model_metric(jordan_bundle(2), g, ConformalPreset{});
  EndomorphismField pi(g, 2, Frame::Unitary);
  Mat p = Mat::Zero(2, 2);
  p(0, 0) = 1.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) pi.set(i, j, p);
  CHECK(projection_idempotency(pi) == 0.0);
  // the first chain vector spans the invariant line, so this projection is flat
  CHECK(projection_flatness(m, pi) < 1e-20);
  Mat q = Mat::Zero(2, 2);
  q(1, 1) = 1.0;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) pi.set(i, j, q);
  CHECK(projection_flatness(m, pi) > 1e-3);
  pi.set(3, 3, 0.5 * q);
  CHECK(projection_idempotency(pi) == doctest::Approx(0.25));
}
