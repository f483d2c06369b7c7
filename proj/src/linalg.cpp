#include "pg/linalg.hpp"

#include <cmath>

namespace pg {

Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

Mat identity(int n) { return Mat::Identity(n, n); }

double frob2(const Mat& a) { return a.cwiseAbs2().sum(); }

HermEig herm_eig(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  HermEig out;
  if (n == 1) {
    out.values.resize(1);
    out.values(0) = a(0, 0).real();
    out.vectors = Mat::Identity(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

Mat herm_apply(const Mat& a, const std::function<double(double)>& f) {
  const int n = static_cast<int>(a.rows());
  if (n == 1) {
    Mat r(1, 1);
    r(0, 0) = f(a(0, 0).real());
    return r;
  }
  HermEig e = herm_eig(a);
  RVec fv(n);
  for (int i = 0; i < n; ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.cast<cd>().asDiagonal() * e.vectors.adjoint();
}

namespace {

// 2x2 Hermitian a = m I + B with B traceless; B^2 = r^2 I, so f(a) = alpha I + beta B.
struct TwoByTwo {
  double m, r;
  Mat b;
};

TwoByTwo split2(const Mat& a) {
  TwoByTwo t;
  double a00 = a(0, 0).real(), a11 = a(1, 1).real();
  cd off = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
  t.m = 0.5 * (a00 + a11);
  double h = 0.5 * (a00 - a11);
  t.r = std::sqrt(h * h + std::norm(off));
  t.b.resize(2, 2);
  t.b << h, off, std::conj(off), -h;
  return t;
}

}  // namespace

Mat herm_log(const Mat& a) {
  if (a.rows() == 2) {
    TwoByTwo t = split2(a);
    // log(m + r) - log(m - r) = 2 atanh(r / m)
    double q = t.r / t.m;
    double beta = std::abs(q) < 1e-4 ? (1.0 + q * q / 3.0) / t.m : std::atanh(q) / t.r;
    double alpha = 0.5 * std::log((t.m - t.r) * (t.m + t.r));
    return alpha * Mat::Identity(2, 2) + beta * t.b;
  }
  return herm_apply(a, [](double v) { return std::log(v); });
}

Mat herm_exp(const Mat& a) {
  if (a.rows() == 2) {
    TwoByTwo t = split2(a);
    double em = std::exp(t.m);
    double sinhc = t.r < 1e-4 ? 1.0 + t.r * t.r / 6.0 : std::sinh(t.r) / t.r;
    return em * (std::cosh(t.r) * Mat::Identity(2, 2) + sinhc * t.b);
  }
  return herm_apply(a, [](double v) { return std::exp(v); });
}
Mat herm_sqrt(const Mat& a) { return herm_apply(a, [](double v) { return std::sqrt(v); }); }
Mat herm_inv_sqrt(const Mat& a) { return herm_apply(a, [](double v) { return 1.0 / std::sqrt(v); }); }
Mat herm_pow(const Mat& a, double power) {
  return herm_apply(a, [power](double v) { return std::pow(v, power); });
}

double herm_min_eig(const Mat& a) {
  if (a.rows() == 1) return a(0, 0).real();
  if (a.rows() == 2) {
    TwoByTwo t = split2(a);
    return t.m - t.r;
  }
  return herm_eig(a).values(0);
}

RatioBase ratio_base(const Mat& p) {
  const int n = static_cast<int>(p.rows());
  RatioBase b;
  if (n == 1) {
    b.l_adj = p.real().cast<cd>();
    b.linv = Mat::Constant(1, 1, cd(1.0 / p(0, 0).real(), 0.0));
    return b;
  }
  Eigen::LLT<Mat> llt(hermitize(p));
  Mat l = llt.matrixL();
  b.linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  b.l_adj = l.adjoint();
  return b;
}

Mat log_ratio(const RatioBase& base, const Mat& q) {
  if (q.rows() == 1) {
    Mat r(1, 1);
    r(0, 0) = std::log(q(0, 0).real() * base.linv(0, 0).real());
    return r;
  }
  Mat inner = base.linv * q * base.linv.adjoint();
  return base.linv.adjoint() * herm_log(inner) * base.l_adj;
}

Mat log_ratio(const Mat& p, const Mat& q) {
  const int n = static_cast<int>(p.rows());
  if (n == 1) {
    Mat r(1, 1);
    r(0, 0) = std::log(q(0, 0).real() / p(0, 0).real());
    return r;
  }
  // P = L L^*, P^{-1}Q = L^{-*} (L^{-1} Q L^{-*}) L^*
  Eigen::LLT<Mat> llt(hermitize(p));
  Mat l = llt.matrixL();
  Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  Mat inner = linv * q * linv.adjoint();
  Mat lg = herm_log(inner);
  return linv.adjoint() * lg * l.adjoint();
}

}  // namespace pg
