#include "pg/curvature.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pg/linalg.hpp"

namespace pg {

EndomorphismField curvature_field(const Transports& tr, const MatrixField& H, const ScalarField& E, double floor) {
  const CylinderGrid& g = H.grid;
  require_same_grid(g, E.grid);
  const int n = H.n;
  EndomorphismField K(g, n, H.frame);
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy);

  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat hp = H.at(i, j);
      // positive definite above the floor iff the shifted Cholesky succeeds
      bool low = n == 1 ? hp(0, 0).real() < floor
                        : Eigen::LLT<Mat>(hermitize(hp) - floor * Mat::Identity(n, n)).info() != Eigen::Success;
      if (low)
        fail(ErrorKind::SingularH, fmt::format("metric eigenvalue below floor at node ({}, {})", i, j));
    }

  for (int i = 1; i < g.Nx; ++i) {
    const Mat& uxp = tr.x_plus[i];
    const Mat uxm = tr.x_minus(i);
    const Mat& uyp = tr.y_plus[i];
    const Mat& uym = tr.y_minus[i];
    for (int j = 0; j < g.Ny; ++j) {
      const RatioBase base = ratio_base(H.at(i, j));
      auto term = [&](const Mat& U, int qi, int qj) { return log_ratio(base, U.adjoint() * H.at(qi, qj) * U); };
      Mat sx = term(uxp, i + 1, j) + term(uxm, i - 1, j);
      Mat sy = term(uyp, i, g.wrap(j + 1)) + term(uym, i, g.wrap(j - 1));
      Mat k = (-0.25 / E(i, j)) * (sx * ix2 + sy * iy2);
      K.set(i, j, k);
    }
  }
  return K;
}

EndomorphismField curvature_K(const ModelMetric& model, const EndomorphismField& h, double floor) {
  require_same_grid(model.grid, h.grid);
  if (h.frame != Frame::Unitary) fail(ErrorKind::InvalidArgument, "curvature_K expects a unitary-frame h");
  return curvature_field(model.unitary, h, model.E, floor);
}

double sup_residual(const EndomorphismField& K, double c) {
  double s = 0.0;
  const CylinderGrid& g = K.grid;
  for (int i = 1; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      Mat d = K.at(i, j) - c * Mat::Identity(K.n, K.n);
      s = std::max(s, std::sqrt(frob2(d)));
    }
  return s;
}

ScalarField residual_field(const EndomorphismField& K, double c) {
  ScalarField r(K.grid);
  for (int i = 1; i < K.grid.Nx; ++i)
    for (int j = 0; j < K.grid.Ny; ++j)
      r(i, j) = std::sqrt(frob2(K.at(i, j) - c * Mat::Identity(K.n, K.n)));
  return r;
}

}  // namespace pg
