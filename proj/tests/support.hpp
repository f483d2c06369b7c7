#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pg/analysis.hpp"
#include "pg/bundle.hpp"
#include "pg/curvature.hpp"
#include "pg/flow.hpp"
#include "pg/linalg.hpp"
#include "pg/model.hpp"

namespace pgtest {

using namespace pg;

inline FlatBundleSpec line_bundle(double w0, double winf, cd kappa = {0.0, 0.0}) {
  cd kinf(-kappa.real(), -kappa.imag());
  return make_bundle(1, {{kappa, 1}}, {w0}, {{kinf, 1}}, {winf});
}

// One Jordan block of size d with real residue eigenvalue 0.
inline FlatBundleSpec jordan_bundle(int d, double w0 = 0.0, double winf = 0.0) {
  return make_bundle(d, {{{0.0, 0.0}, d}}, {w0}, {{{0.0, 0.0}, d}}, {winf});
}

// Two rank-1 blocks with distinct purely imaginary residues.
inline FlatBundleSpec split_bundle(double w0a, double w0b, double winfa, double winfb, double im_a = 0.25,
                                   double im_b = 0.5) {
  return make_bundle(2, {{{0.0, im_a}, 1}, {{0.0, im_b}, 1}}, {w0a, w0b},
                     {{{0.0, 1.0 - im_a}, 1}, {{0.0, 1.0 - im_b}, 1}}, {winfa, winfb});
}

inline double sup_over_rows(const EndomorphismField& K, double lo, double hi, double shift = 0.0) {
  double worst = 0.0;
  for (int i = 1; i < K.grid.Nx; ++i) {
    double ax = std::abs(K.grid.x(i));
    if (ax < lo || ax > hi) continue;
    for (int j = 0; j < K.grid.Ny; ++j) {
      Mat m = K.at(i, j);
      for (int k = 0; k < m.rows(); ++k) m(k, k) -= shift;
      worst = std::max(worst, std::sqrt(frob2(m)));
    }
  }
  return worst;
}

inline double max_diff(const MatrixField& a, const MatrixField& b) {
  double worst = 0.0;
  for (int i = 0; i <= a.grid.Nx; ++i)
    for (int j = 0; j < a.grid.Ny; ++j) {
      Mat d = a.at(i, j) - b.at(i, j);
      for (int r = 0; r < d.rows(); ++r)
        for (int c = 0; c < d.cols(); ++c) worst = std::max(worst, std::abs(d(r, c)));
    }
  return worst;
}

inline double sup_trace(const EndomorphismField& h) {
  double m = 0.0;
  for (int i = 0; i <= h.grid.Nx; ++i)
    for (int j = 0; j < h.grid.Ny; ++j) m = std::max(m, h.at(i, j).trace().real());
  return m;
}

// Smooth Hermitian positive metric exp(A(x, y)) with a random trigonometric A.
struct RandomMetric {
  int n;
  std::vector<Mat> coeff;
  std::vector<double> fx, fy, phase;

  RandomMetric(int n_, std::mt19937_64& rng, double amplitude = 0.15) : n(n_) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    for (int m = 0; m < 3; ++m) {
      Mat a(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = cd(normal(rng), normal(rng));
      coeff.push_back(hermitize(a) * amplitude);
      fx.push_back(0.5 + m * 0.4);
      fy.push_back(m);
      phase.push_back(uni(rng));
    }
  }

  Mat operator()(double x, double y) const {
    Mat A = Mat::Zero(n, n);
    for (size_t m = 0; m < coeff.size(); ++m) A += coeff[m] * std::cos(fx[m] * x + fy[m] * y + phase[m]);
    return herm_exp(A);
  }
};

// g = I + C(x, y) with a small random trigonometric C; derivatives are exact.
struct RandomGauge {
  int n;
  std::vector<Mat> coeff;
  std::vector<double> fx, fy, phase;

  RandomGauge(int n_, std::mt19937_64& rng, double amplitude = 0.15) : n(n_) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    for (int m = 0; m < 2; ++m) {
      Mat a(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = cd(normal(rng), normal(rng)) * (amplitude / n);
      coeff.push_back(a);
      fx.push_back(0.7 + m * 0.5);
      fy.push_back(1 + m);
      phase.push_back(uni(rng));
    }
  }

  Mat value(double x, double y) const {
    Mat g = Mat::Identity(n, n);
    for (size_t m = 0; m < coeff.size(); ++m) g += coeff[m] * std::cos(fx[m] * x + fy[m] * y + phase[m]);
    return g;
  }
  Mat derivative(double x, double y, int k) const {
    Mat d = Mat::Zero(n, n);
    for (size_t m = 0; m < coeff.size(); ++m)
      d -= coeff[m] * (k == 0 ? fx[m] : fy[m]) * std::sin(fx[m] * x + fy[m] * y + phase[m]);
    return d;
  }
};

// Gauge transform g^{-1} d g + g^{-1} Gamma g of a connection given by callables.
inline void gauge_connection(const RandomGauge& g, MatrixFunction& gamma_x, MatrixFunction& gamma_y) {
  MatrixFunction bx = gamma_x, by = gamma_y;
  gamma_x = [g, bx](double x, double y) {
    Mat gi = g.value(x, y).inverse();
    return Mat(gi * g.derivative(x, y, 0) + gi * bx(x, y) * g.value(x, y));
  };
  gamma_y = [g, by](double x, double y) {
    Mat gi = g.value(x, y).inverse();
    return Mat(gi * g.derivative(x, y, 1) + gi * by(x, y) * g.value(x, y));
  };
}

}  // namespace pgtest
