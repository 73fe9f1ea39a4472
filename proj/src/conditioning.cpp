#include "condsq/conditioning.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace condsq {

namespace {

ConditionalResult summarize(const Mat2& cond, double theta) {
  ConditionalResult r;
  r.v_cond = 0.5 * (cond + cond.transpose());
  const Vec2 ev = eigenvalues_2x2(r.v_cond);
  r.sigma_cond = ev(0);
  r.sigma_major = ev(1);
  r.theta = theta;
  // Major axis at 0.5 atan2(2b, a - c); the squeezed axis is orthogonal.
  const double major = 0.5 * std::atan2(2.0 * r.v_cond(0, 1), r.v_cond(0, 0) - r.v_cond(1, 1));
  double minor = major + 0.5 * std::numbers::pi;
  if (minor > 0.5 * std::numbers::pi) minor -= std::numbers::pi;
  r.principal_angle = minor;
  r.s_cond_db = r.sigma_cond > 0.0 ? squeezing_db(r.sigma_cond) : 0.0;
  return r;
}

void require_measurable(double variance) {
  if (!(variance > kDegenerateVariance)) {
    std::ostringstream os;
    os << "degenerate homodyne measurement: measured quadrature variance " << variance;
    throw DegenerateMeasurement(os.str());
  }
}

}  // namespace

Vec2 eigenvalues_2x2(const Mat2& m) {
  const double a = m(0, 0);
  const double c = m(1, 1);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  const double major = mean + radius;
  // Smaller root through det / major avoids cancellation when major >> minor.
  double minor = mean - radius;
  if (major > 0.0 && mean > 0.0) minor = (a * c - b * b) / major;
  return Vec2(minor, major);
}

Mat4 rotate_optical(const Mat4& v, double theta) {
  Mat4 r = Mat4::Identity();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  r(0, 0) = c;
  r(0, 1) = s;
  r(1, 0) = -s;
  r(1, 1) = c;
  return r * v * r.transpose();
}

ConditionalResult condition_homodyne(const JointCM& v, double theta) {
  const JointCM rotated(rotate_optical(v.matrix(), theta));
  const double measured = rotated.v_out()(0, 0);
  require_measurable(measured);
  const Eigen::RowVector2d corr = rotated.v_c().row(0);
  const Mat2 cond = rotated.v_m() - corr.transpose() * corr / measured;
  return summarize(cond, theta);
}

ConditionalResult condition_homodyne_pseudoinverse(const JointCM& v, double theta) {
  const Vec2 w(std::cos(theta), std::sin(theta));
  const Mat2 projector = w * w.transpose();
  const Mat2 projected = projector * v.v_out() * projector;
  require_measurable(w.dot(v.v_out() * w));
  const Mat2 pinv = projected.completeOrthogonalDecomposition().pseudoInverse();
  const Mat2 cond = v.v_m() - v.v_c().transpose() * pinv * v.v_c();
  return summarize(cond, theta);
}

Mat2 condition_general(const JointCM& v, const Mat2& d) {
  const Mat2 total = v.v_out() + d;
  return v.v_m() - v.v_c().transpose() * total.inverse() * v.v_c();
}

double squeezing_db(double sigma_cond) {
  if (!(sigma_cond > 0.0)) throw InvalidArgument("conditional variance must be positive");
  return std::max(0.0, -20.0 * std::log10(sigma_cond));
}

std::vector<ConditionalResult> phase_scan(const JointCM& v, std::span<const double> thetas) {
  std::vector<ConditionalResult> out;
  out.reserve(thetas.size());
  for (double theta : thetas) out.push_back(condition_homodyne(v, theta));
  return out;
}

}  // namespace condsq
