#pragma once

#include <optional>
#include <vector>

#include "pg/bundle.hpp"
#include "pg/geometry.hpp"

namespace pg {

enum class Frame { Temporal, Parabolic, Unitary };
const char* frame_name(Frame f);

// n x n complex matrix per grid node, stored column-major per node.
struct MatrixField {
  CylinderGrid grid;
  Frame frame = Frame::Unitary;
  int n = 0;
  std::vector<cd> data;

  MatrixField() = default;
  MatrixField(const CylinderGrid& g, int n_, Frame f);
  static MatrixField identity(const CylinderGrid& g, int n_, Frame f);

  Mat at(int i, int j) const;
  void set(int i, int j, const Mat& m);
  cd* node(int i, int j) { return data.data() + grid.index(i, j) * n * n; }
  const cd* node(int i, int j) const { return data.data() + grid.index(i, j) * n * n; }
};

using MetricField = MatrixField;
using EndomorphismField = MatrixField;

struct OneFormField {
  MatrixField dx;
  MatrixField dy;
};
using ConnectionField = OneFormField;

// Parallel transport between neighbouring nodes for a frame: a flat section
// with components v at node p has components U v at the neighbour q.
struct Transports {
  Frame frame = Frame::Unitary;
  std::vector<Mat> x_plus;   // row i -> row i+1, i = 0..Nx-1
  std::vector<Mat> y_plus;   // column j -> j+1 on row i
  std::vector<Mat> y_minus;  // column j -> j-1 on row i
  Mat x_minus(int i) const;  // row i -> row i-1
};

struct ModelOptions {
  bool conformal_twist = true;
  double blend_inner = 2.0;  // blend band in |x|
  double blend_outer = 3.0;
  double shift = 2.0;        // argument offset inside the band
};

// Explicit model metric and everything derived from it on one grid. The
// conformal twist u and the density E depend on x only.
struct ModelMetric {
  FlatBundleSpec bundle;
  CylinderGrid grid;
  ModelOptions options;
  ConformalPreset preset;
  int n = 0;
  ScalarField E;
  ScalarField u;
  double c = 0.0;             // constant used by the equation on this grid
  double c_closed_form = 0.0; // 2 pi deg / (n Vol) with the analytic volume
  double volume = 0.0;

  std::vector<int> comp_block;  // component -> global block
  std::vector<int> comp_alpha;  // component -> 1-based position in its block
  std::vector<double> t;        // blended |x| per row
  std::vector<double> dt_dx;    // derivative of the blended argument
  std::vector<double> lambda;   // per row, n entries
  std::vector<double> weight_potential;  // per row, n entries (x-coefficient of the parabolic frame)
  std::vector<double> phase_step;        // per interval, n entries: integral of the potential
  Transports unitary;

  double row_u(int i) const { return u(i, 0); }
  double row_E(int i) const { return E(i, 0); }
  double lam(int i, int k) const { return lambda[static_cast<size_t>(i) * n + k]; }
};

double blended_argument(double x, const ModelOptions& opt);
double blended_argument_derivative(double x, const ModelOptions& opt);
// Smooth step from 0 (x <= -2) to 1 (x >= 2).
double weight_step(double x);

std::vector<double> block_model_lambdas(int d, double t);
// Max finite-difference residual of (log lambda_i)'' = lambda_i/lambda_{i+1} - lambda_{i-1}/lambda_i
// for samples lambdas[k][i] at t_k with uniform spacing h.
double model_ode_residual(const std::vector<std::vector<double>>& lambdas, double h);

double poisson_constant(const FlatBundleSpec& bundle, double vol);

// Builds the model on the grid. If c is given it is used as is, otherwise the
// discrete constant that makes the twist equation solvable is used.
ModelMetric build_model_metric(const FlatBundleSpec& bundle, const CylinderGrid& grid, const ConformalPreset& preset,
                               const ModelOptions& opt = {}, std::optional<double> c = std::nullopt);

// Interior-row trace of K of the untwisted model (u = 0), per row.
std::vector<double> untwisted_trace_curvature(const FlatBundleSpec& bundle, const CylinderGrid& grid,
                                              const ScalarField& E, const ModelOptions& opt = {});

ScalarField solve_conformal_factor(const FlatBundleSpec& bundle, const CylinderGrid& grid, const ScalarField& E,
                                   double c, const ModelOptions& opt = {});

// Gauge matrix g taking `to`-frame components to `from`-frame ones at row i
// (a section v_from = g v_to); metrics transform as g^* H g.
Mat frame_gauge(const ModelMetric& model, int i, Frame from, Frame to);

// x-derivative of the conformal twist per row (central, one-sided at the ends).
std::vector<double> twist_slope(const ModelMetric& model);

MetricField model_metric_field(const ModelMetric& model, Frame frame);
ConnectionField unitary_connection(const ModelMetric& model);
ConnectionField model_connection(const ModelMetric& model, Frame frame);

// Metric: g^* H g. Endomorphism: g^{-1} A g. Connection: g^{-1} dg + g^{-1} A g.
MetricField gauge_transform_metric(const ModelMetric& model, const MetricField& H, Frame to);
EndomorphismField gauge_transform_endomorphism(const ModelMetric& model, const EndomorphismField& A, Frame to);
ConnectionField gauge_transform_connection(const ModelMetric& model, const ConnectionField& A, Frame to);

Transports transports_in_frame(const ModelMetric& model, Frame frame);

// Unitary-frame h of the metric sigma^* H0 sigma for a constant parabolic-frame sigma.
EndomorphismField conjugated_model(const ModelMetric& model, const Mat& sigma);

ScalarField model_residual(const ModelMetric& model);

// Restriction to the centred sub-grid of half-length X (same spacing).
ModelMetric restrict_model(const ModelMetric& model, double X);
MatrixField restrict_field(const MatrixField& f, const CylinderGrid& sub);
// Embeds f into a larger centred grid, filling the new band with the identity.
MatrixField extend_by_identity(const MatrixField& f, const CylinderGrid& big);

}  // namespace pg
