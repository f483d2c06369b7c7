#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace pg;

namespace {

Mat random_hermitian(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal;
  Mat a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = cd(normal(rng), normal(rng)) * scale;
  return hermitize(a);
}

// Spectral function through a plain Eigen solver, independent of the closed forms.
Mat reference_apply(const Mat& a, double (*f)(double)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(hermitize(a)));
  Eigen::VectorXcd d(es.eigenvalues().size());
  for (int k = 0; k < d.size(); ++k) d(k) = f(es.eigenvalues()(k));
  return Mat(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("Hermitian log and exp agree with an eigen-decomposition oracle") {
  std::mt19937_64 rng(2);
  for (int n : {1, 2, 3, 4}) {
    for (int trial = 0; trial < 100; ++trial) {
      Mat a = random_hermitian(n, rng, trial % 2 ? 1.0 : 1e-6);
      Mat e = herm_exp(a);
      CHECK(max_abs(e - reference_apply(a, [](double v) { return std::exp(v); })) < 1e-12 * max_abs(e) + 1e-14);
      CHECK(max_abs(herm_log(e) - a) < 1e-11);
      CHECK(herm_min_eig(e) == doctest::Approx(herm_eig(e).values(0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("log_ratio matches the symmetric form for positive pairs") {
  std::mt19937_64 rng(9);
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 100; ++trial) {
      Mat p = herm_exp(random_hermitian(n, rng, 0.7));
      Mat q = herm_exp(random_hermitian(n, rng, 0.7));
      // P^{-1}Q is similar to P^{-1/2} Q P^{-1/2}
      Mat s = herm_inv_sqrt(p);
      Mat expected = herm_sqrt(p).inverse() * herm_log(s * q * s) * herm_sqrt(p);
      CHECK(max_abs(log_ratio(p, q) - expected) < 1e-10);
      RatioBase base = ratio_base(p);
      CHECK(max_abs(log_ratio(base, q) - log_ratio(p, q)) < 1e-12);
    }
  }
}

TEST_CASE("powers and square roots") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    Mat a = herm_exp(random_hermitian(3, rng, 0.5));
    Mat r = herm_sqrt(a);
    CHECK(max_abs(r * r - a) < 1e-12);
    CHECK(max_abs(herm_inv_sqrt(a) * r - identity(3)) < 1e-12);
    CHECK(max_abs(herm_pow(a, 3.0) - a * a * a) < 1e-11 * max_abs(a * a * a));
  }
}
