#pragma once

#include <functional>

#include "pg/common.hpp"

namespace pg {

Mat hermitize(const Mat& a);

// Spectral calculus on Hermitian matrices. Input is hermitized first.
struct HermEig {
  RVec values;  // ascending
  Mat vectors;
};
HermEig herm_eig(const Mat& a);
Mat herm_apply(const Mat& a, const std::function<double(double)>& f);
Mat herm_log(const Mat& a);
Mat herm_exp(const Mat& a);
Mat herm_sqrt(const Mat& a);
Mat herm_inv_sqrt(const Mat& a);
Mat herm_pow(const Mat& a, double power);
double herm_min_eig(const Mat& a);

// log(P^{-1} Q) for Hermitian positive P and Q, via the Cholesky factor of P.
Mat log_ratio(const Mat& p, const Mat& q);

// Cholesky data of P shared by several log_ratio calls with the same P.
struct RatioBase {
  Mat linv;   // L^{-1}
  Mat l_adj;  // L^*
};
RatioBase ratio_base(const Mat& p);
Mat log_ratio(const RatioBase& base, const Mat& q);

Mat identity(int n);
double frob2(const Mat& a);

}  // namespace pg
