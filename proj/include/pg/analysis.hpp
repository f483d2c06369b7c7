#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pg/bundle.hpp"
#include "pg/curvature.hpp"
#include "pg/model.hpp"

namespace pg {

// Psi(H) = 1/2 (dual connection - connection) for H = H0 h, in the unitary
// frame: 1/2 (h^{-1} dh - h^{-1} Omega^* h - Omega) with central differences
// of h (one-sided on the boundary rows). h Psi is Hermitian by construction.
OneFormField psi_field(const ModelMetric& model, const EndomorphismField& h);

// H-orthogonal projector onto a block-aligned flat subbundle at one node.
Mat subbundle_projector(const FlatBundleSpec& bundle, const FlatSubbundleSpec& sub, const Mat& h);

// beta = (I - pi) dual-derivative(pi) pi with pi the H-orthogonal projector.
OneFormField second_fundamental_form(const ModelMetric& model, const EndomorphismField& h,
                                     const FlatSubbundleSpec& sub);

struct DegreeEstimate {
  double value = 0.0;        // truncated integral plus the tail estimate
  double truncated = 0.0;    // integral over the grid only
  double tail = 0.0;         // model-tail estimate of the missing part
  double sensitivity = 0.0;  // change when the domain is cut back by one unit
};

// (1/pi) [ int Tr(pi K pi) dnu - 1/4 int |beta|^2 ] with the model tail for
// nilpotent prefixes when `tail` is Analytic.
DegreeEstimate chern_weil_degree(const ModelMetric& model, const EndomorphismField& h, const FlatSubbundleSpec& sub,
                                 TailMode tail = TailMode::Analytic);
DegreeEstimate degree_via_curvature(const ModelMetric& model, const EndomorphismField& h,
                                    TailMode tail = TailMode::Analytic);

// Pointwise sup over interior nodes of |Tr K(H_S) - (Tr(pi K pi) - 1/4 |beta|^2)|.
double trace_identity_defect(const ModelMetric& model, const EndomorphismField& h, const FlatSubbundleSpec& sub);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct TamenessOptions {
  double weight_rel_tol = 0.02;  // relative to max(|w|, weight_floor)
  double weight_floor = 0.05;
  double half_tau_rel_tol = 0.05;  // relative to max(|tau/2|, 1/2)
  int min_window_nodes = 20;
};

struct BlockWeightFit {
  int block = 0;
  double configured = 0.0;
  double fitted = 0.0;
  double ci = 0.0;
  double relative_error = 0.0;
  double epsilon = 0.0;  // remainder decay exponent; +inf when the remainder is at rounding level
  double epsilon_ci = 0.0;
  bool pass = false;
};

struct SectionNormFit {
  int component = 0;
  int block = 0;
  double configured_weight = 0.0;
  double fitted_weight = 0.0;
  double configured_half_tau = 0.0;
  double fitted_half_tau = 0.0;
  double half_tau_ci = 0.0;
  bool pass = false;
};

struct EndTameness {
  std::string puncture;  // "zero" (x -> +X) or "infinity" (x -> -X)
  double t_lo = 0.0, t_hi = 0.0;
  int window_nodes = 0;
  std::vector<std::pair<double, double>> curvature_tail;  // (t, integral of |K| dnu beyond t)
  bool pass_a = false;
  std::vector<BlockWeightFit> blocks;
  bool pass_b = false;
  std::vector<SectionNormFit> sections;
  bool pass_c = false;
  double offdiag_exponent = 0.0;
  double offdiag_ci = 0.0;
  bool pass_d = false;
};

struct TamenessReport {
  std::vector<EndTameness> ends;
  bool pass = false;
  bool weight_mismatch = false;
};

// Fits on the rescaled metric e^{-u} H over t = |x| in [X/2, X - 1].
TamenessReport tameness_report(const ModelMetric& model, const EndomorphismField& h, const TamenessOptions& opt = {});

struct DecayProfile {
  std::vector<std::pair<double, double>> table;  // (X', integral over |x| > X')
  double constant = 0.0;  // max X' * integral
  double exponent = 0.0;  // fitted decay exponent in 1/X'
  double bound = 0.0;     // 100 pi (sup Tr h)^2
  bool exceeds_bound = false;
};
DecayProfile gradient_decay_profile(const ModelMetric& model, const EndomorphismField& h,
                                    std::vector<double> cutoffs = {});

struct FourierGap {
  double ratio = 0.0;
  double gap = 0.0;
  bool holds = false;
};
// Samples g at uniform angles; ratio of int |g' + i lambda g|^2 to int |g|^2.
FourierGap fourier_gap(const std::vector<cd>& samples, double lambda, double tol = 1e-12);

struct UniquenessComparison {
  double scale = 0.0;
  double deviation = 0.0;
};
UniquenessComparison uniqueness_compare(const MatrixField& H1, const MatrixField& H2);

// --- local identity checks on a square patch with callable data

using MatrixFunction = std::function<Mat(double, double)>;

struct Patch {
  double x0 = 0.0, y0 = 0.0;
  double half_width = 0.1;
  double spacing = 0.02;
};

// Flat connection of the bundle in the parabolic frame: diagonal weight
// potential along x and the residue along y.
void parabolic_connection(const FlatBundleSpec& bundle, MatrixFunction& gamma_x, MatrixFunction& gamma_y);

// max |F_{kbar j} + 1/2 nabla_k Psi_j| of the lifted connection over the patch.
double hym_lift_check(const MatrixFunction& H, const MatrixFunction& gamma_x, const MatrixFunction& gamma_y,
                      const Patch& patch);
// max |curvature of d + H^{-1} dH - Gamma^{*H}| over the patch.
double dual_flatness_check(const MatrixFunction& H, const MatrixFunction& gamma_x, const MatrixFunction& gamma_y,
                           const Patch& patch);

}  // namespace pg
