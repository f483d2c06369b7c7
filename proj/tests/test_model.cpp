#include <doctest.h>

#include <random>

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

int row_of(const CylinderGrid& g, double x) { return static_cast<int>(std::lround((x + g.X) / g.dx)); }

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double mx = 0, my = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxy / sxx;
}

MatrixField random_field(const CylinderGrid& g, int n, Frame f, std::mt19937_64& rng, bool positive) {
  std::normal_distribution<double> normal;
  MatrixField out(g, n, f);
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat a(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = cd(normal(rng), normal(rng)) * 0.3;
      out.set(i, j, positive ? herm_exp(hermitize(a)) : a);
    }
  return out;
}

double relative_diff(const MatrixField& a, const MatrixField& b) {
  double worst = 0.0;
  for (int i = 0; i <= a.grid.Nx; ++i)
    for (int j = 0; j < a.grid.Ny; ++j) {
      Mat x = a.at(i, j), y = b.at(i, j);
      worst = std::max(worst, (x - y).norm() / std::max(1.0, y.norm()));
    }
  return worst;
}

}  // namespace

TEST_CASE("block model lambdas") {
  auto l1 = block_model_lambdas(1, 3.0);
  CHECK(l1 == std::vector<double>{1.0});
  auto l2 = block_model_lambdas(2, 5.0);
  CHECK(l2[0] == doctest::Approx(0.2));
  CHECK(l2[1] == doctest::Approx(5.0));
  auto l3 = block_model_lambdas(3, 4.0);
  CHECK(l3[0] == doctest::Approx(2.0 / 16.0));
  CHECK(l3[1] == doctest::Approx(1.0));
  CHECK(l3[2] == doctest::Approx(8.0));
  CHECK(kind_of([] { block_model_lambdas(2, 1.0); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { block_model_lambdas(2, 0.5); }) == ErrorKind::DomainError);
}

TEST_CASE("block model lambdas have unit product") {
  for (int d = 1; d <= 6; ++d)
    for (double t : {2.0, 5.0, 10.0, 50.0}) {
      auto l = block_model_lambdas(d, t);
      double prod = 1.0;
      for (double v : l) prod *= v;
      CHECK(prod == doctest::Approx(1.0).epsilon(1e-12));
      for (int i = 0; i < d; ++i) CHECK(l[i] * l[d - 1 - i] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("model_ode_residual examples") {
  const double h = 1e-3;
  auto samples = [&](int d, double scale_first) {
    std::vector<std::vector<double>> s;
    for (int k = 0; k <= 1000; ++k) {
      auto l = block_model_lambdas(d, 2.0 + k * h);
      l[0] *= scale_first;
      s.push_back(l);
    }
    return s;
  };
  CHECK(model_ode_residual(samples(2, 1.0), h) < 1e-5);
  CHECK(model_ode_residual(samples(3, 1.0), h) < 1e-5);
  CHECK(model_ode_residual(samples(1, 1.0), h) == 0.0);
  // the first-order change is 0.1 / t^2, largest at t = 2
  CHECK(model_ode_residual(samples(2, 1.1), h) == doctest::Approx(0.1 / 4.0).epsilon(1e-3));
}

TEST_CASE("conformal factor and Poisson constant") {
  CylinderGrid g = build_grid(6.0, 240, 16);
  ConformalPreset fs;

  ModelMetric zero_deg = build_model_metric(jordan_bundle(2), g, fs);
  CHECK(zero_deg.c == 0.0);
  CHECK(zero_deg.u.max_abs() < 1e-12);

  ModelMetric line = build_model_metric(line_bundle(0.25, 0.25), g, fs);
  CHECK(line.c_closed_form == doctest::Approx(0.25).epsilon(1e-6));
  // the solvable constant is half the closed form; the closed form itself is rejected
  CHECK(line.c == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(kind_of([&] { solve_conformal_factor(line_bundle(0.25, 0.25), g, line.E, line.c_closed_form); }) ==
        ErrorKind::NotSolvable);
  CHECK(line.u.max_abs() > 0.01);
  CHECK(poisson_constant(line_bundle(0.25, 0.25), 4 * M_PI) == doctest::Approx(0.25));

  CHECK(kind_of([&] { solve_conformal_factor(line_bundle(0.25, 0.25), g, line.E, 0.5); }) == ErrorKind::NotSolvable);
  CHECK(kind_of([&] { build_model_metric(jordan_bundle(2), build_grid(2.5, 20, 8), fs); }) == ErrorKind::DomainError);
}

TEST_CASE("model metric values in the parabolic frame") {
  CylinderGrid g = build_grid(6.0, 120, 8);
  ModelMetric m = build_model_metric(jordan_bundle(2), g, ConformalPreset{});
  MetricField H = model_metric_field(m, Frame::Parabolic);
  for (double x : {5.0, -5.0}) {
    int i = row_of(g, x);
    Mat h = H.at(i, 3);
    double eu = std::exp(m.row_u(i));
    CHECK(h(0, 0).real() == doctest::Approx(eu / 5.0).epsilon(1e-12));
    CHECK(h(1, 1).real() == doctest::Approx(eu * 5.0).epsilon(1e-12));
    CHECK(std::abs(h(0, 1)) < 1e-14);
  }

  ModelMetric line = build_model_metric(line_bundle(0.0, 0.0), g, ConformalPreset{});
  MetricField L = model_metric_field(line, Frame::Parabolic);
  for (int i = 0; i <= g.Nx; ++i) CHECK(L.at(i, 0)(0, 0).real() == doctest::Approx(std::exp(line.row_u(i))));

  auto b3 = make_bundle(3, {{cd(0, 0), 3}}, {0.2}, {{cd(0, 0), 3}}, {-0.1});
  ModelMetric m3 = build_model_metric(b3, g, ConformalPreset{});
  MetricField H3 = model_metric_field(m3, Frame::Parabolic);
  double mn = 1e300;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) mn = std::min(mn, herm_min_eig(H3.at(i, j)));
  CHECK(mn > 0.0);
}

TEST_CASE("flat section norms follow the nilpotent weights") {
  CylinderGrid g = build_grid(100.0, 400, 8);
  auto b3 = make_bundle(3, {{cd(0, 0), 3}}, {0.0}, {{cd(0, 0), 3}}, {0.0});
  ModelMetric m = build_model_metric(b3, g, ConformalPreset{});
  MetricField H = model_metric_field(m, Frame::Parabolic);
  auto tau = nilpotent_weights(3);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> lt, ln;
    for (int i = 0; i <= g.Nx; ++i) {
      double t = g.x(i);
      if (t < 10.0 || t > 100.0) continue;
      lt.push_back(std::log(t));
      ln.push_back(0.5 * (std::log(H.at(i, 0)(k, k).real()) - m.row_u(i)));
    }
    double fitted = least_squares_slope(lt, ln);
    if (tau[k] == 0)
      CHECK(std::abs(fitted) < 0.02);
    else
      CHECK(fitted == doctest::Approx(tau[k] / 2.0).epsilon(0.02));
  }
}

TEST_CASE("unitary connection coefficients") {
  CylinderGrid g = build_grid(12.0, 120, 8);
  cd kappa(0.0, 0.3);
  ModelMetric line = build_model_metric(line_bundle(0.0, 0.0, kappa), g, ConformalPreset{}, untwisted_options());
  ConnectionField A = unitary_connection(line);
  for (int i = 0; i <= g.Nx; i += 7) {
    CHECK(std::abs(A.dx.at(i, 2)(0, 0)) < 1e-14);
    CHECK(std::abs(A.dy.at(i, 2)(0, 0) - kappa) < 1e-14);
  }

  ModelMetric j2 = build_model_metric(jordan_bundle(2), g, ConformalPreset{}, untwisted_options());
  ConnectionField B = unitary_connection(j2);
  int i10 = row_of(g, 10.0);
  CHECK(B.dy.at(i10, 0)(0, 1).real() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(B.dy.at(i10, 0)(1, 0)) < 1e-14);
  // radial entries +-1/(2t), opposite for the two chain positions
  CHECK(std::abs(B.dx.at(i10, 0)(0, 0).real()) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(B.dx.at(i10, 0)(1, 1).real() == doctest::Approx(-B.dx.at(i10, 0)(0, 0).real()).epsilon(1e-12));

  auto b3 = make_bundle(3, {{cd(0, 0), 3}}, {0.0}, {{cd(0, 0), 3}}, {0.0});
  ModelMetric j3 = build_model_metric(b3, g, ConformalPreset{}, untwisted_options());
  ConnectionField C = unitary_connection(j3);
  Mat cy = C.dy.at(i10, 0);
  CHECK(cy(0, 1).real() == doctest::Approx(std::sqrt(2.0) / 10.0).epsilon(1e-12));
  CHECK(cy(1, 2).real() == doctest::Approx(std::sqrt(2.0) / 10.0).epsilon(1e-12));
}

TEST_CASE("unitary connection is block diagonal") {
  CylinderGrid g = build_grid(5.0, 50, 8);
  auto b = make_bundle(3, {{cd(0.1, 0.2), 2}, {cd(0.0, 0.6), 1}}, {0.1, -0.2}, {{cd(-0.1, 0.8), 2}, {cd(0.0, 0.4), 1}},
                       {0.3, 0.0});
  ModelMetric m = build_model_metric(b, g, ConformalPreset{});
  ConnectionField A = unitary_connection(m);
  for (int i = 0; i <= g.Nx; ++i) {
    Mat x = A.dx.at(i, 1), y = A.dy.at(i, 1);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (m.comp_block[r] != m.comp_block[c]) {
          CHECK(std::abs(x(r, c)) == 0.0);
          CHECK(std::abs(y(r, c)) == 0.0);
        }
  }
}

TEST_CASE("gauge transforms") {
  CylinderGrid g = build_grid(5.0, 50, 8);
  auto b = make_bundle(3, {{cd(0.0, 0.2), 2}, {cd(0.0, 0.6), 1}}, {0.1, -0.2}, {{cd(0.0, 0.8), 2}, {cd(0.0, 0.4), 1}},
                       {0.3, 0.0});
  ModelMetric m = build_model_metric(b, g, ConformalPreset{});
  std::mt19937_64 rng(12);

  MetricField H = random_field(g, 3, Frame::Parabolic, rng, true);
  CHECK(relative_diff(gauge_transform_metric(m, H, Frame::Parabolic), H) == 0.0);

  MetricField H0 = model_metric_field(m, Frame::Parabolic);
  MetricField Hu = gauge_transform_metric(m, H0, Frame::Unitary);
  CHECK(relative_diff(Hu, MetricField::identity(g, 3, Frame::Unitary)) < 1e-12);

  ModelMetric zero_w = build_model_metric(jordan_bundle(2), g, ConformalPreset{});
  MetricField T = random_field(g, 2, Frame::Temporal, rng, true);
  CHECK(relative_diff(gauge_transform_metric(zero_w, T, Frame::Parabolic), T) < 1e-14);

  const Frame frames[] = {Frame::Temporal, Frame::Parabolic, Frame::Unitary};
  for (Frame a : frames)
    for (Frame bf : frames) {
      MetricField h = random_field(g, 3, a, rng, true);
      CHECK(relative_diff(gauge_transform_metric(m, gauge_transform_metric(m, h, bf), a), h) < 1e-12);
      EndomorphismField e = random_field(g, 3, a, rng, false);
      CHECK(relative_diff(gauge_transform_endomorphism(m, gauge_transform_endomorphism(m, e, bf), a), e) < 1e-12);
      ConnectionField c{random_field(g, 3, a, rng, false), random_field(g, 3, a, rng, false)};
      ConnectionField back = gauge_transform_connection(m, gauge_transform_connection(m, c, bf), a);
      CHECK(relative_diff(back.dx, c.dx) < 1e-12);
      CHECK(relative_diff(back.dy, c.dy) < 1e-12);
    }

  ConnectionField mixed{random_field(g, 3, Frame::Unitary, rng, false), random_field(g, 3, Frame::Temporal, rng, false)};
  CHECK(kind_of([&] { gauge_transform_connection(m, mixed, Frame::Parabolic); }) == ErrorKind::FrameMismatch);
}

TEST_CASE("model residual on a flat window converges at second order") {
  double prev = 0.0;
  for (int refine : {1, 2}) {
    CylinderGrid g = build_grid(5.0, 100 * refine, 64 * refine);
    ModelMetric m = build_model_metric(jordan_bundle(2), g, flat_preset(5.0), ModelOptions{}, 0.0);
    ScalarField r = model_residual(m);
    double worst = 0.0;
    for (int i = 0; i <= g.Nx; ++i) {
      double ax = std::abs(g.x(i));
      if (ax < 3.5 || ax > 4.5) continue;
      for (int j = 0; j < g.Ny; ++j) worst = std::max(worst, r(i, j));
    }
    CHECK(worst < 1e-3);
    if (prev > 0) CHECK(prev / worst == doctest::Approx(4.0).epsilon(0.1));
    prev = worst;
  }
}

TEST_CASE("rank-1 model with the solved twist has a tiny residual everywhere") {
  CylinderGrid g = build_grid(5.0, 100, 16);
  ModelMetric m = build_model_metric(line_bundle(0.3, 0.1), g, ConformalPreset{});
  ScalarField r = model_residual(m);
  CHECK(r.max_abs() < 1e-6);
}

TEST_CASE("restriction and identity extension") {
  CylinderGrid g = build_grid(6.0, 120, 8);
  ModelMetric m = build_model_metric(split_bundle(0.1, 0.2, 0.0, 0.1), g, ConformalPreset{});
  ModelMetric r = restrict_model(m, 4.0);
  CHECK(r.grid.X == doctest::Approx(4.0));
  CHECK(r.grid.dx == doctest::Approx(g.dx));
  CHECK(r.grid.Ny == g.Ny);
  std::mt19937_64 rng(1);
  MatrixField f = random_field(r.grid, 2, Frame::Unitary, rng, true);
  MatrixField big = extend_by_identity(f, g);
  CHECK(relative_diff(restrict_field(big, r.grid), f) == 0.0);
  CHECK(relative_diff(restrict_field(big, build_grid(6.0, 120, 8)), big) == 0.0);
  Mat corner = big.at(0, 0);
  CHECK((corner - Mat::Identity(2, 2)).norm() == 0.0);
}
