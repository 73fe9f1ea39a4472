#pragma once

// Shared domain types: protocol parameters, the joint (output mode, mechanics)
// covariance matrix and the Gaussian noise statistics.
//
// Quadrature convention: X = a + a^dag, Y = (a - a^dag)/i, [X, Y] = 2i.
// A vacuum mode has covariance diag(1, 1).

#include <Eigen/Dense>

#include <string>

#include "condsq/errors.hpp"

namespace condsq {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;

/// All rates and occupations of one pulsed run, stored in units of the
/// optical decay rate kappa (so `kappa()` is always 1 and `tau()` is
/// kappa*tau).
class SystemParams {
 public:
  /// Build from ratios to kappa. Throws InvalidArgument on invalid input.
  static SystemParams dimensionless(double g_over_kappa, double gamma_over_kappa,
                                    double kappa_tau, double n0, double n_th,
                                    double eta = 1.0, double theta = 0.0);

  /// Build from rates in arbitrary consistent units (e.g. rad/s and s);
  /// rates are divided by kappa and tau is multiplied by it.
  static SystemParams physical(double kappa, double gamma, double g, double tau,
                               double n0, double n_th, double eta = 1.0,
                               double theta = 0.0);

  double kappa() const { return 1.0; }
  double gamma() const { return gamma_; }
  double g() const { return g_; }
  double tau() const { return tau_; }
  double n0() const { return n0_; }
  double n_th() const { return n_th_; }
  double eta() const { return eta_; }
  double theta() const { return theta_; }

  /// Amplification rate G = g^2/kappa of the adiabatic regime.
  double rate_G() const { return g_ * g_; }

  SystemParams with_occupation(double nbar) const;
  SystemParams with_occupations(double n0, double n_th) const;
  SystemParams with_eta(double eta) const;
  SystemParams with_theta(double theta) const;
  SystemParams with_tau(double kappa_tau) const;

  std::string describe() const;

 private:
  SystemParams() = default;
  void validate() const;

  double gamma_ = 0.0;
  double g_ = 0.0;
  double tau_ = 1.0;
  double n0_ = 0.0;
  double n_th_ = 0.0;
  double eta_ = 1.0;
  double theta_ = 0.0;
};

/// Initial-state and input-noise covariances over (X_c, Y_c, X_m, Y_m).
struct NoiseSpec {
  Vec4 sigma0;    // diag(1, 1, 2 n0 + 1, 2 n0 + 1)
  Vec4 sigma_in;  // diag(1, 1, 2 n_th + 1, 2 n_th + 1), per unit time

  static NoiseSpec from(const SystemParams& p);
};

/// 4x4 covariance of (X_out, Y_out, X_m, Y_m) in the block form
///   [ v_out   v_c ]
///   [ v_c^T   v_m ].
/// The stored matrix is always symmetrized.
class JointCM {
 public:
  JointCM() : v_(Mat4::Identity()) {}
  explicit JointCM(const Mat4& v);
  JointCM(const Mat2& v_out, const Mat2& v_c, const Mat2& v_m);

  const Mat4& matrix() const { return v_; }
  Mat2 v_out() const { return v_.topLeftCorner<2, 2>(); }
  Mat2 v_c() const { return v_.topRightCorner<2, 2>(); }
  Mat2 v_m() const { return v_.bottomRightCorner<2, 2>(); }

 private:
  Mat4 v_;
};

/// Two-mode symplectic form Omega = J (+) J with J = [[0, 1], [-1, 0]].
Mat4 symplectic_form();

/// Symplectic eigenvalues (ascending) of a positive definite 4x4 CM.
/// Throws NumericalError if `v` is not positive definite.
Vec2 symplectic_eigenvalues(const Mat4& v);

struct PhysicalityReport {
  bool physical = false;
  double min_symplectic = 0.0;
  double max_asymmetry = 0.0;
  std::string diagnostic;
};

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPhysicalityTolerance = 1e-9;

/// True iff V is positive definite and every symplectic eigenvalue is
/// >= 1 - 1e-9. Throws InvalidArgument when V is not symmetric within 1e-12
/// (relative to max(1, max|V_ij|)).
PhysicalityReport physicality_check(const Mat4& v);
PhysicalityReport physicality_check(const JointCM& v);

}  // namespace condsq
