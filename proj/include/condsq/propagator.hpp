#pragma once

// Drift matrix of the blue-sideband (two-mode squeezing) Langevin equation and
// its propagator M(s) = exp(A s).

#include "condsq/core.hpp"

namespace condsq {

/// Drift matrix over the basis (X_c, Y_c, X_m, Y_m):
///   [[-k, 0, g, 0], [0, -k, 0, -g], [g, 0, -gamma/2, 0], [0, -g, 0, -gamma/2]].
struct DriftMatrix {
  Mat4 a;
};

DriftMatrix build_drift(const SystemParams& p);

/// Diagonal diffusion factor sqrt(2K) = diag(sqrt(2k), sqrt(2k), sqrt(gamma), sqrt(gamma)).
Vec4 noise_gain(const SystemParams& p);

/// lambda = sqrt((kappa - gamma/2)^2 + 4 g^2).
double propagator_lambda(const SystemParams& p);

/// Upper drift eigenvalue (lambda - kappa - gamma/2) / 2, free of cancellation
/// for small g and gamma.
double propagator_slow_rate(const SystemParams& p);

/// M(s) = exp(A s) through one symmetric eigendecomposition A = Q diag(mu) Q^T,
/// shared by every sample time.
class Propagator {
 public:
  explicit Propagator(const DriftMatrix& drift);
  explicit Propagator(const SystemParams& p) : Propagator(build_drift(p)) {}

  /// M(s); throws InvalidArgument for s < 0.
  Mat4 sample(double s) const;
  Mat4 operator()(double s) const { return sample(s); }

  /// Eigenvalues mu_k of A (ascending) and the matching orthonormal eigenvectors.
  const Vec4& rates() const { return rates_; }
  const Mat4& eigenvectors() const { return vectors_; }
  const Mat4& drift() const { return drift_; }

  /// lambda from the eigenvalue spread, (mu_max - mu_min).
  double lambda() const { return rates_(3) - rates_(0); }

 private:
  Mat4 drift_;
  Vec4 rates_;
  Mat4 vectors_;
};

/// M(s) = exp(A s) for a single time.
Mat4 propagate(const DriftMatrix& a, double s);

/// Closed form M13(t) = (g/lambda) [e^{-(t/2)(k + gamma/2 - lambda)} - e^{-(t/2)(k + gamma/2 + lambda)}],
/// with the lambda -> 0 limit g t e^{-(k + gamma/2) t / 2}.
double analytic_m13(const SystemParams& p, double t);

}  // namespace condsq
