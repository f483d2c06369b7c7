#pragma once

#include <vector>

#include "pg/model.hpp"

// Reference solvers that share no code with the nonlinear solver.
namespace pg {

// Rank-1 bundles: h = e^f solves K(h) = c exactly when the 5-point system
// Lap f = 4E (K(I) - c) holds with f = 0 on the boundary rows. Assembled and
// factored with a sparse LU; returns f.
ScalarField rank1_linear_oracle(const ModelMetric& model);

// Radial reduction of a rank-2 Jordan block with zero weights and c = 0:
// L'' = e^{2L} on [-X, X], L(+-X) = -log X, where L is the log of the first
// parabolic-frame entry. Solved by RK4 shooting from x = 0 with L'(0) = 0.
struct RadialSolution {
  std::vector<double> x;
  std::vector<double> L;
  double L0 = 0.0;
  double closed_form_scale = 0.0;  // a with cos(aX) = aX, L = log(a / cos(ax))
};
RadialSolution jordan_radial_bvp(double X, const std::vector<double>& xs, int steps_per_unit = 2000);

// Integrates L'' = e^{2L} inward from x = X with the model data L = -log x and
// returns the largest deviation from -log x on [x_end, X].
double radial_model_ivp_deviation(double X, double x_end, int steps = 20000);

// Unitary-frame h of the radial solution on the model's grid (twist must be off).
EndomorphismField radial_oracle_metric(const ModelMetric& model, const RadialSolution& sol);

struct ManufacturedRow {
  int Nx = 0;
  double dx = 0.0;
  double error = 0.0;
  double ratio = 0.0;  // previous error / this error
};
// Dirichlet Poisson solve of a manufactured solution at successive Nx; Ny
// is scaled with Nx starting from the given value.
std::vector<ManufacturedRow> manufactured_poisson_table(double X, int Ny, const std::vector<int>& Nxs);

}  // namespace pg
