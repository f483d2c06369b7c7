#pragma once

#include "pg/model.hpp"

namespace pg {

// K(H) = -(1/4E) sum over the four neighbours of log(H_p^{-1} U^* H_q U) / spacing^2,
// in whatever frame the transports and H are expressed. Boundary rows are zero.
EndomorphismField curvature_field(const Transports& tr, const MatrixField& H, const ScalarField& E,
                                  double floor = 1e-12);

// Unitary-frame K of the metric with h = H0^{-1} H.
EndomorphismField curvature_K(const ModelMetric& model, const EndomorphismField& h, double floor = 1e-12);

// Interior-node sup of |K - cI| (Frobenius, unitary frame).
double sup_residual(const EndomorphismField& K, double c);

// Per-node |K - cI|, boundary rows zero.
ScalarField residual_field(const EndomorphismField& K, double c);

}  // namespace pg
