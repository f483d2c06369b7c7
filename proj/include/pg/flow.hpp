#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pg/bundle.hpp"
#include "pg/curvature.hpp"
#include "pg/model.hpp"

namespace pg {

enum class StepScheme { Exponential, Euler };

struct FlowOptions {
  double tol = 1e-8;            // target sup E |K - cI| (density-weighted)
  double t_max = 1e300;         // flow-phase time budget
  int max_flow_steps = 200;     // flow-phase step budget
  double cfl = 0.2;             // dt <= cfl * min(E) * min(dx, dy)^2
  std::optional<double> dt;     // fixed step overriding the CFL policy (still capped by it)
  StepScheme scheme = StepScheme::Exponential;
  bool det_renormalize = false;
  double positivity_floor = 1e-12;
  double dt_min = 1e-300;
  int record_every = 1;
  bool record_energy = false;
  bool steady_solver = true;    // finish with the Newton-Krylov steady-state solve
  int newton_max_iter = 60;
  int gmres_max_iter = 300;
  int gmres_restart = 60;
};

struct FlowMonitors {
  double t = 0.0;
  double dt = 0.0;
  double sup_residual = 0.0;  // sup |K - cI| before the step
  double weighted_residual = 0.0;  // sup E |K - cI|
  double sup_trace = 0.0;     // sup Tr h
  double det_error = 0.0;     // max |det h - 1|
  double energy = 0.0;        // integral of |D h|^2, D the Chern connection of H0 (if recorded)
};

struct FlowState {
  EndomorphismField h;
  double t = 0.0;
  double dt = 0.0;
  FlowMonitors monitors;
};

struct FlowReport {
  bool converged = false;
  double final_residual = 0.0;           // sup |K - cI|
  double final_weighted_residual = 0.0;  // sup E |K - cI|
  double decay_rate = 0.0;  // fitted rate of sup |K - cI|^2 ~ exp(-rate t)
  bool monotone = true;
  double max_increase = 0.0;
  int flow_steps = 0;
  int rejected_steps = 0;
  int newton_iterations = 0;
  std::string diagnosis;
  std::vector<FlowMonitors> series;
  EndomorphismField h;
};

double cfl_dt(const ModelMetric& model, double cfl);
FlowState initial_state(const ModelMetric& model);
// h = exp(amplitude * bump(x) * A(x, y)) with A Hermitian, smooth, seeded; identity on boundary rows.
EndomorphismField perturbed_initial(const ModelMetric& model, double amplitude, unsigned seed);

FlowMonitors measure(const ModelMetric& model, const EndomorphismField& h, const EndomorphismField& K, double t,
                     double dt, bool energy);

// One accepted step (with step halving). Throws StepCollapse.
FlowState flow_step(const FlowState& state, const ModelMetric& model, const FlowOptions& opt, int* rejected = nullptr);

FlowReport run_flow(const ModelMetric& model, const EndomorphismField& h0, const FlowOptions& opt);

struct SteadyResult {
  EndomorphismField h;
  bool converged = false;
  double residual = 0.0;           // sup |K - cI|
  double weighted_residual = 0.0;  // sup E |K - cI|
  int iterations = 0;
  std::string diagnosis;
};
SteadyResult solve_steady_state(const ModelMetric& model, const EndomorphismField& h0, const FlowOptions& opt);

double energy_density_integral(const ModelMetric& model, const EndomorphismField& h, double min_abs_x = 0.0);

// --- continuation and destabilizer extraction

struct ContinuationRow {
  double X = 0.0;
  double rho = 0.0;
  double sup_trace = 0.0;
  double argmax_x = 0.0;
  bool converged = false;
  double residual = 0.0;
};

struct ContinuationResult {
  std::vector<ContinuationRow> rows;
  std::string verdict;  // "bounded" or "unbounded-trend"
  bool strictly_increasing = false;
  double final_relative_increase = 0.0;
  std::vector<EndomorphismField> solutions;
  std::vector<ModelMetric> models;
};

// Model built on the largest grid (spacing 2 X_max / Nx) and restricted per X.
ContinuationResult rho_continuation(const FlatBundleSpec& bundle, const std::vector<double>& X_schedule, int Nx_max,
                                    int Ny, const ConformalPreset& preset, const FlowOptions& opt,
                                    double plateau_tol = 0.01, const ModelOptions& mopt = {});

struct SigmaRow {
  double sigma = 0.0;
  std::vector<double> spectrum;  // normalized eigenvalues of I - h~^sigma at the probe node
  double gap = 0.0;
  int rank = 0;
};

struct DestabilizerCandidate {
  EndomorphismField projection;
  int rank = 0;
  double flatness = 0.0;
  double idempotency = 0.0;
  FlatSubbundleSpec matched;
  double matched_distance = 0.0;
  double slope = 0.0;
  double mu = 0.0;
  double probe_x = 0.0;
  std::vector<SigmaRow> sigma_table;
};

DestabilizerCandidate extract_destabilizer(const ModelMetric& model, const EndomorphismField& h,
                                           const std::vector<double>& sigma_schedule = {1.0, 0.5, 0.25, 0.1, 0.05},
                                           double rounding_threshold = 0.5, double min_gap = 0.2);

// Flatness residual of a projection field: integral of |pi (dual derivative of pi) (I - pi)|^2.
double projection_flatness(const ModelMetric& model, const EndomorphismField& pi);
double projection_idempotency(const EndomorphismField& pi);

}  // namespace pg
