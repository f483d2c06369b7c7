// Pointwise checks of the dimension-reduction identities on a small square
// patch where the metric and connection are given as callables.

#include <algorithm>
#include <cmath>

#include "pg/analysis.hpp"
#include "pg/linalg.hpp"

namespace pg {

void parabolic_connection(const FlatBundleSpec& bundle, MatrixFunction& gamma_x, MatrixFunction& gamma_y) {
  const int n = bundle.rank;
  Mat B = Mat::Zero(n, n);
  std::vector<int> block_of(n);
  for (int l = 0; l < bundle.block_count(); ++l) {
    int off = bundle.block_offset(l), d = bundle.block_dim(l);
    for (int a = 0; a < d; ++a) {
      block_of[off + a] = l;
      B(off + a, off + a) = bundle.block_kappa(l);
      if (a + 1 < d) B(off + a, off + a + 1) = 1.0;
    }
  }
  FlatBundleSpec b = bundle;
  gamma_x = [b, block_of, n](double x, double) {
    Mat a = Mat::Zero(n, n);
    double s = weight_step(x);
    for (int k = 0; k < n; ++k) {
      int l = block_of[k];
      a(k, k) = -b.weight_infinity(l) + (b.weight_zero(l) + b.weight_infinity(l)) * s;
    }
    return a;
  };
  gamma_y = [B](double, double) { return B; };
}

namespace {

struct PatchEval {
  const MatrixFunction& H;
  const MatrixFunction& gx;
  const MatrixFunction& gy;
  double s;

  // connection form of the dual connection d + H^{-1} dH - H^{-1} Gamma^* H along direction k (0 = x, 1 = y)
  Mat dual(double x, double y, int k) const {
    Mat h = H(x, y);
    Mat dh = k == 0 ? (H(x + s, y) - H(x - s, y)) / (2.0 * s) : (H(x, y + s) - H(x, y - s)) / (2.0 * s);
    Mat gam = k == 0 ? gx(x, y) : gy(x, y);
    Eigen::LLT<Mat> llt(h);
    return llt.solve(dh - gam.adjoint() * h);
  }
  Mat gamma(double x, double y, int k) const { return k == 0 ? gx(x, y) : gy(x, y); }

  template <class F>
  Mat derivative(F f, double x, double y, int k) const {
    return k == 0 ? (f(x + s, y) - f(x - s, y)) / (2.0 * s) : (f(x, y + s) - f(x, y - s)) / (2.0 * s);
  }
};

template <class F>
double patch_max(const Patch& patch, F residual) {
  int m = std::max(1, static_cast<int>(std::lround(patch.half_width / patch.spacing)));
  double worst = 0.0;
  for (int a = -m; a <= m; a += std::max(1, m / 4))
    for (int c = -m; c <= m; c += std::max(1, m / 4))
      worst = std::max(worst, residual(patch.x0 + a * patch.spacing, patch.y0 + c * patch.spacing));
  return worst;
}

}  // namespace

double hym_lift_check(const MatrixFunction& H, const MatrixFunction& gamma_x, const MatrixFunction& gamma_y,
                      const Patch& patch) {
  PatchEval ev{H, gamma_x, gamma_y, patch.spacing};
  return patch_max(patch, [&](double x, double y) {
    Mat dual[2] = {ev.dual(x, y, 0), ev.dual(x, y, 1)};
    Mat gam[2] = {ev.gamma(x, y, 0), ev.gamma(x, y, 1)};
    Mat psi[2], unit[2];
    for (int k = 0; k < 2; ++k) {
      psi[k] = 0.5 * (dual[k] - gam[k]);
      unit[k] = 0.5 * (dual[k] + gam[k]);
    }
    double worst = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) {
        // 4 F_{kbar j} = -d_k (A_j + Psi_j) + d_j (A_k - Psi_k) - (A_k - Psi_k)(A_j + Psi_j) + (A_j + Psi_j)(A_k - Psi_k)
        Mat d_dual = ev.derivative([&](double p, double q) { return ev.dual(p, q, j); }, x, y, k);
        Mat d_gam = ev.derivative([&](double p, double q) { return ev.gamma(p, q, k); }, x, y, j);
        Mat F = 0.25 * (-d_dual + d_gam - gam[k] * dual[j] + dual[j] * gam[k]);
        Mat d_psi = ev.derivative(
            [&](double p, double q) { return Mat(0.5 * (ev.dual(p, q, j) - ev.gamma(p, q, j))); }, x, y, k);
        Mat cov = d_psi + unit[k] * psi[j] - psi[j] * unit[k] - (psi[k] * psi[j] - psi[j] * psi[k]);
        worst = std::max(worst, std::sqrt(frob2(F + 0.5 * cov)));
      }
    return worst;
  });
}

double dual_flatness_check(const MatrixFunction& H, const MatrixFunction& gamma_x, const MatrixFunction& gamma_y,
                           const Patch& patch) {
  PatchEval ev{H, gamma_x, gamma_y, patch.spacing};
  return patch_max(patch, [&](double x, double y) {
    Mat ax = ev.dual(x, y, 0), ay = ev.dual(x, y, 1);
    Mat dxay = ev.derivative([&](double p, double q) { return ev.dual(p, q, 1); }, x, y, 0);
    Mat dyax = ev.derivative([&](double p, double q) { return ev.dual(p, q, 0); }, x, y, 1);
    return std::sqrt(frob2(dxay - dyax + ax * ay - ay * ax));
  });
}

}  // namespace pg
