#include "condsq/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace condsq {

SystemParams SystemParams::dimensionless(double g_over_kappa, double gamma_over_kappa,
                                         double kappa_tau, double n0, double n_th,
                                         double eta, double theta) {
  SystemParams p;
  p.g_ = g_over_kappa;
  p.gamma_ = gamma_over_kappa;
  p.tau_ = kappa_tau;
  p.n0_ = n0;
  p.n_th_ = n_th;
  p.eta_ = eta;
  p.theta_ = theta;
  p.validate();
  return p;
}

SystemParams SystemParams::physical(double kappa, double gamma, double g, double tau,
                                    double n0, double n_th, double eta, double theta) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("kappa must be positive and finite");
  }
  return dimensionless(g / kappa, gamma / kappa, kappa * tau, n0, n_th, eta, theta);
}

void SystemParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(std::isfinite(gamma_) && gamma_ >= 0.0, "gamma must be finite and >= 0");
  require(std::isfinite(g_) && g_ >= 0.0, "g must be finite and >= 0");
  require(std::isfinite(tau_) && tau_ > 0.0, "tau must be finite and > 0");
  require(std::isfinite(n0_) && n0_ >= 0.0, "n0 must be finite and >= 0");
  require(std::isfinite(n_th_) && n_th_ >= 0.0, "n_th must be finite and >= 0");
  require(eta_ >= 0.0 && eta_ <= 1.0, "eta must lie in [0, 1]");
  require(std::isfinite(theta_), "theta must be finite");
}

SystemParams SystemParams::with_occupation(double nbar) const {
  return with_occupations(nbar, nbar);
}

SystemParams SystemParams::with_occupations(double n0, double n_th) const {
  return dimensionless(g_, gamma_, tau_, n0, n_th, eta_, theta_);
}

SystemParams SystemParams::with_eta(double eta) const {
  return dimensionless(g_, gamma_, tau_, n0_, n_th_, eta, theta_);
}

SystemParams SystemParams::with_theta(double theta) const {
  return dimensionless(g_, gamma_, tau_, n0_, n_th_, eta_, theta);
}

SystemParams SystemParams::with_tau(double kappa_tau) const {
  return dimensionless(g_, gamma_, kappa_tau, n0_, n_th_, eta_, theta_);
}

std::string SystemParams::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << "g/kappa=" << g_ << " gamma/kappa=" << gamma_ << " kappa*tau=" << tau_
     << " n0=" << n0_ << " n_th=" << n_th_ << " eta=" << eta_ << " theta=" << theta_;
  return os.str();
}

NoiseSpec NoiseSpec::from(const SystemParams& p) {
  const double m0 = 2.0 * p.n0() + 1.0;
  const double mth = 2.0 * p.n_th() + 1.0;
  return {Vec4(1.0, 1.0, m0, m0), Vec4(1.0, 1.0, mth, mth)};
}

JointCM::JointCM(const Mat4& v) : v_(0.5 * (v + v.transpose())) {}

JointCM::JointCM(const Mat2& v_out, const Mat2& v_c, const Mat2& v_m) {
  Mat4 v;
  v << v_out, v_c, v_c.transpose(), v_m;
  v_ = 0.5 * (v + v.transpose());
}

Mat4 symplectic_form() {
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

Vec2 symplectic_eigenvalues(const Mat4& v) {
  // With V = L L^T, L^T Omega L is similar to Omega V; its singular values are
  // the symplectic eigenvalues, each appearing twice.
  Eigen::LLT<Mat4> llt(v);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance matrix is not positive definite");
  }
  const Mat4 l = llt.matrixL();
  const Mat4 k = l.transpose() * symplectic_form() * l;
  Eigen::JacobiSVD<Mat4> svd(k);
  const Vec4 s = svd.singularValues();  // descending
  return Vec2(0.5 * (s(2) + s(3)), 0.5 * (s(0) + s(1)));
}

PhysicalityReport physicality_check(const Mat4& v) {
  PhysicalityReport report;
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  report.max_asymmetry = (v - v.transpose()).cwiseAbs().maxCoeff();
  if (!(report.max_asymmetry <= kSymmetryTolerance * scale)) {
    std::ostringstream os;
    os << "covariance matrix is not symmetric: max |V - V^T| = " << report.max_asymmetry;
    throw InvalidArgument(os.str());
  }
  const Mat4 sym = 0.5 * (v + v.transpose());
  try {
    const Vec2 nu = symplectic_eigenvalues(sym);
    report.min_symplectic = nu(0);
    report.physical = nu(0) >= 1.0 - kPhysicalityTolerance;
    if (!report.physical) {
      std::ostringstream os;
      os.precision(12);
      os << "uncertainty relation violated: min symplectic eigenvalue " << nu(0);
      report.diagnostic = os.str();
    }
  } catch (const NumericalError& e) {
    report.physical = false;
    report.min_symplectic = 0.0;
    report.diagnostic = e.what();
  }
  return report;
}

PhysicalityReport physicality_check(const JointCM& v) { return physicality_check(v.matrix()); }

}  // namespace condsq
