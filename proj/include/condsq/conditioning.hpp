#pragma once

// Gaussian homodyne conditioning of the mechanics on the filtered output mode.

#include <span>
#include <vector>

#include "condsq/core.hpp"

namespace condsq {

struct ConditionalResult {
  Mat2 v_cond;                   // conditional mechanical CM
  double sigma_cond = 0.0;       // smaller eigenvalue, vacuum = 1
  double sigma_major = 0.0;      // larger eigenvalue
  double s_cond_db = 0.0;        // max(0, -20 log10 sigma_cond)
  double theta = 0.0;            // measured quadrature X cos(theta) + Y sin(theta)
  double principal_angle = 0.0;  // orientation of the squeezed eigenvector, (-pi/2, pi/2]
};

/// Variance threshold below which the measured quadrature is degenerate.
constexpr double kDegenerateVariance = 1e-12;

/// Eigenvalues (ascending) of a symmetric 2x2 matrix, closed form.
Vec2 eigenvalues_2x2(const Mat2& m);

/// Rotates the optical basis: V(theta) = R(theta) V R(theta)^T with
/// R = R2(theta) (+) I, R2 = [[cos, sin], [-sin, cos]].
Mat4 rotate_optical(const Mat4& v, double theta);

/// Rank-one Schur complement in the rotated basis:
/// V_m' = V_m - V_c^T P V_c / V_out,11 with P = diag(1, 0).
/// Throws DegenerateMeasurement if the measured variance is <= 1e-12.
ConditionalResult condition_homodyne(const JointCM& v, double theta);

/// Same update from the general-dyne form V_m - V_c^T (Pi V_out Pi)^+ V_c with
/// Pi the projector on the measured quadrature and ^+ the Moore-Penrose
/// pseudoinverse.
ConditionalResult condition_homodyne_pseudoinverse(const JointCM& v, double theta);

/// Conditioning on a projection onto a state of optical CM `d`:
/// V_m - V_c^T (V_out + d)^{-1} V_c.
Mat2 condition_general(const JointCM& v, const Mat2& d);

/// max(0, -20 log10 sigma). Throws InvalidArgument for sigma <= 0.
double squeezing_db(double sigma_cond);

std::vector<ConditionalResult> phase_scan(const JointCM& v, std::span<const double> thetas);

}  // namespace condsq
