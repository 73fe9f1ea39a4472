#pragma once

// Joint covariance matrix of (filtered output mode, mechanics at tau).
//
// Every quadrature of z = (X_out, Y_out, X_m(tau), Y_m(tau)) is linear in the
// initial state u(0) and in the white input noise n(s):
//
//   z = L u(0) + int_0^tau W(s) n(s) ds,   V = L sigma0 L^T + int_0^tau W(s) sigma_in W(s)^T ds.
//
// For the output rows W(s) = -f(s) e_i^T + sqrt(2 kappa) int_s^tau f(s') M(s' - s) ds' sqrt(2K),
// which expands to the four terms of the direct covariance calculation. The
// tail integrals are evaluated in the eigenbasis of the drift matrix: in
// closed form for exponential-sum profiles and exactly per grid panel for
// piecewise-linear profiles. The outer integral uses composite Gauss-Legendre
// quadrature, repeated at twice the panel count as a convergence check.

#include <cstddef>

#include "condsq/core.hpp"
#include "condsq/propagator.hpp"
#include "condsq/temporal_modes.hpp"

namespace condsq {

struct QuadratureReport {
  double error_estimate = 0.0;  // max |V_n - V_2n| / max(1, max |V|)
  bool converged = true;        // error_estimate <= 1e-4
};

struct FilteredState {
  JointCM cm;
  TemporalMode mode;
  SystemParams params;
  QuadratureReport quadrature;
};

constexpr double kQuadratureFlagThreshold = 1e-4;

/// Mechanical covariance at tau, closed form:
/// [M(tau) sigma0 M(tau) + int_0^tau M(u) 2K sigma_in M(u) du] rows/cols 3-4.
Mat2 mechanical_block(const SystemParams& p);

/// Covariance of the filtered output mode.
Mat2 output_block(const SystemParams& p, const TemporalMode& f);

/// Cross-covariance <r_out, r_m>.
Mat2 cross_block(const SystemParams& p, const TemporalMode& f);

/// Full assembly (lossless) with quadrature diagnostics. Throws
/// InvalidArgument if the mode duration differs from tau.
FilteredState filtered_state(const SystemParams& p, const TemporalMode& f);

/// Detection loss: v_out -> eta v_out + (1 - eta) I, v_c -> sqrt(eta) v_c.
/// Throws InvalidArgument for eta outside [0, 1].
JointCM apply_loss(const JointCM& v, double eta);

/// Independent check: the pulse is cut into `n_bins` equal slots, the exact
/// per-bin Gaussian map (drift exponential plus Van Loan noise covariance) is
/// applied, and the output is filtered by the mode sampled at bin midpoints
/// and renormalized. Requires n_bins >= 64 kappa tau.
JointCM binned_oracle(const SystemParams& p, const TemporalMode& f, std::size_t n_bins);

/// max_ij |a_ij - b_ij| / max(|b_ij|, 1): relative error with a one vacuum
/// unit floor.
double cm_relative_difference(const Mat4& a, const Mat4& b);

}  // namespace condsq
