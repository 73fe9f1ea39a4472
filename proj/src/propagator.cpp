#include "condsq/propagator.hpp"

#include <cmath>

namespace condsq {

DriftMatrix build_drift(const SystemParams& p) {
  const double k = p.kappa();
  const double g = p.g();
  const double half_gamma = 0.5 * p.gamma();
  Mat4 a;
  // clang-format off
  a << -k,  0.0,  g,           0.0,
       0.0, -k,   0.0,        -g,
       g,   0.0, -half_gamma,  0.0,
       0.0, -g,   0.0,        -half_gamma;
  // clang-format on
  return {a};
}

Vec4 noise_gain(const SystemParams& p) {
  const double opt = std::sqrt(2.0 * p.kappa());
  const double mech = std::sqrt(p.gamma());
  return Vec4(opt, opt, mech, mech);
}

double propagator_lambda(const SystemParams& p) {
  const double d = p.kappa() - 0.5 * p.gamma();
  return std::sqrt(d * d + 4.0 * p.g() * p.g());
}

Propagator::Propagator(const DriftMatrix& drift) : drift_(drift.a) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(drift_);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the drift matrix failed");
  }
  rates_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

Mat4 Propagator::sample(double s) const {
  if (!(s >= 0.0)) throw InvalidArgument("propagator time must be >= 0");
  const Vec4 e = (rates_ * s).array().exp();
  return vectors_ * e.asDiagonal() * vectors_.transpose();
}

Mat4 propagate(const DriftMatrix& a, double s) { return Propagator(a).sample(s); }

double propagator_slow_rate(const SystemParams& p) {
  const double decay = p.kappa() + 0.5 * p.gamma();
  const double g = p.g();
  return (2.0 * g * g - p.kappa() * p.gamma()) / (decay + propagator_lambda(p));
}

double analytic_m13(const SystemParams& p, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be >= 0");
  const double g = p.g();
  const double lambda = propagator_lambda(p);
  const double decay = p.kappa() + 0.5 * p.gamma();
  if (lambda == 0.0) return g * t * std::exp(-0.5 * decay * t);
  // (g/lambda)(e^{a} - e^{b}) = (g/lambda) e^{a} (1 - e^{-lambda t}).
  return (g / lambda) * std::exp(propagator_slow_rate(p) * t) * -std::expm1(-lambda * t);
}

}  // namespace condsq
