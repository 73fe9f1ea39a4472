#include <doctest.h>

#include <cmath>
#include <random>

#include "condsq/conditioning.hpp"
#include "condsq/covariance.hpp"

using namespace condsq;

namespace {

// RK4 integration of dV/dt = A V + V A^T + 2K sigma_in from V(0) = sigma0.
Mat4 lyapunov_rk4(const SystemParams& p, double dt) {
  const Mat4 a = build_drift(p).a;
  const NoiseSpec noise = NoiseSpec::from(p);
  const Vec4 k(1.0, 1.0, 0.5 * p.gamma(), 0.5 * p.gamma());
  const Mat4 d = (2.0 * k.cwiseProduct(noise.sigma_in)).asDiagonal();
  auto rhs = [&](const Mat4& v) -> Mat4 { return a * v + v * a.transpose() + d; };
  Mat4 v = noise.sigma0.asDiagonal();
  const int steps = static_cast<int>(std::lround(p.tau() / dt));
  const double h = p.tau() / steps;
  for (int i = 0; i < steps; ++i) {
    const Mat4 k1 = rhs(v);
    const Mat4 k2 = rhs(v + 0.5 * h * k1);
    const Mat4 k3 = rhs(v + 0.5 * h * k2);
    const Mat4 k4 = rhs(v + h * k3);
    v += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

double rel(const Mat2& a, const Mat2& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

TemporalMode flat_mode(double tau) {
  const TimeGrid grid{tau, 65};
  return TemporalMode::custom(grid, std::vector<double>(grid.points, 1.0));
}

// Two-mode squeezed CM of gain G acting on vacuum and a thermal mechanics.
JointCM adiabatic_cm(double G, double n0) {
  const double m = 2 * n0 + 1;
  const double c = std::sqrt(G * (G - 1)) * (1 + m);
  Mat2 out = Mat2::Identity() * (G + (G - 1) * m);
  Mat2 mech = Mat2::Identity() * (G * m + G - 1);
  Mat2 cross;
  cross << c, 0, 0, -c;
  return JointCM(out, cross, mech);
}

SystemParams adiabatic(double n = 0.0) { return SystemParams::dimensionless(0.05, 1e-10, 200, n, n); }
SystemParams delic(double n = 0.0) { return SystemParams::dimensionless(0.62, 2.8e-10, 8, n, n); }

}  // namespace

TEST_CASE("uncoupled mechanics") {
  const auto frozen = SystemParams::dimensionless(0.0, 0.0, 5, 7, 7);
  CHECK(rel(mechanical_block(frozen), Mat2::Identity() * 15) < 1e-14);

  const auto p = SystemParams::dimensionless(0.0, 0.2, 5, 3, 40);
  const double w = std::exp(-0.2 * 5);
  const double expect = 7 * w + 81 * (1 - w);
  CHECK(rel(mechanical_block(p), Mat2::Identity() * expect) < 1e-13);

  const auto f = flat_mode(5);
  const auto s = filtered_state(p, f);
  CHECK(rel(s.cm.v_out(), Mat2::Identity()) < 1e-12);
  CHECK(s.cm.v_c().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(rel(s.cm.v_m(), Mat2::Identity() * expect) < 1e-13);
  CHECK(rel(output_block(p, f), Mat2::Identity()) < 1e-12);
  CHECK(cross_block(p, f).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mechanical block against an RK4 Lyapunov integration") {
  for (const auto& p : {SystemParams::dimensionless(0.62, 1e-9, 8, 1e3, 1e3),
                        SystemParams::dimensionless(0.3, 0.05, 6, 2, 30)}) {
    const Mat4 ref = lyapunov_rk4(p, 1e-3);
    CHECK(rel(mechanical_block(p), ref.bottomRightCorner<2, 2>()) < 1e-9);
  }
}

TEST_CASE("adiabatic regime reproduces the two-mode squeezed blocks") {
  const auto p = adiabatic();
  const double G = gain(p).gain;
  const auto s = filtered_state(p, optimal_output_mode(p));
  const JointCM ref = adiabatic_cm(G, 0.0);
  // Deviations are O(g^2 / kappa^2) corrections to the adiabatic elimination.
  CHECK(rel(s.cm.v_out(), ref.v_out()) < 1e-2);
  CHECK(rel(s.cm.v_m(), ref.v_m()) < 1e-2);
  CHECK(rel(s.cm.v_c(), ref.v_c()) < 1e-2);
  CHECK(s.cm.v_c()(0, 0) > 0.0);
  CHECK(s.cm.v_c()(1, 1) < 0.0);
  CHECK(std::abs(s.cm.v_c()(0, 1)) < 1e-10);
  CHECK(s.quadrature.converged);
}

TEST_CASE("loss examples") {
  const JointCM v = adiabatic_cm(2.0, 0.0);
  CHECK(apply_loss(v, 1.0).matrix().isApprox(v.matrix()));
  const JointCM dark = apply_loss(v, 0.0);
  CHECK(dark.v_out().isApprox(Mat2::Identity()));
  CHECK(dark.v_c().norm() == 0.0);
  CHECK(dark.v_m().isApprox(v.v_m()));
  const JointCM half = apply_loss(v, 0.5);
  CHECK(half.v_out().isApprox(Mat2::Identity() * 2));
  Mat2 c;
  c << 2, 0, 0, -2;
  CHECK(half.v_c().isApprox(c));
  CHECK(physicality_check(half).physical);
  // Conditioning on the lossy state: 3 - 4/2 = 1.
  CHECK(condition_homodyne(half, 0.0).sigma_cond == doctest::Approx(1.0));
  CHECK_THROWS_AS(apply_loss(v, 1.01), InvalidArgument);
  CHECK_THROWS_AS(apply_loss(v, -0.01), InvalidArgument);
}

TEST_CASE("property: loss never improves conditioning") {
  for (const auto& p : {delic(10.0), adiabatic(100.0), SystemParams::dimensionless(0.3, 1e-3, 20, 5, 50)}) {
    const auto s = filtered_state(p, optimal_output_mode(p));
    double prev = 0.0;
    for (int k = 20; k >= 0; --k) {
      const double eta = k / 20.0;
      const double sigma = condition_homodyne(apply_loss(s.cm, eta), 0.0).sigma_cond;
      CHECK(sigma >= prev * (1 - 1e-12));
      prev = sigma;
    }
  }
}

TEST_CASE("property: cross block is linear in g for weak coupling") {
  std::vector<double> ratios;
  for (double g : {1e-2, 1e-3, 1e-4}) {
    const auto p = SystemParams::dimensionless(g, 0.0, 8, 0, 0);
    const Mat2 c = cross_block(p, optimal_output_mode(p));
    ratios.push_back(c.norm() / g);
  }
  CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(1e-3));
  CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(1e-3));
}

TEST_CASE("property: every assembled and lossy CM is physical") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double g = 0.01 + 0.79 * u(rng);
    const double gamma = (trial % 3 == 0) ? 0.0 : 0.5 * u(rng);
    const double tau = 0.5 + 11.5 * u(rng);
    const double n0 = std::pow(10.0, 4 * u(rng)) - 1;
    const double nth = std::pow(10.0, 4 * u(rng)) - 1;
    const auto p = SystemParams::dimensionless(g, gamma, tau, n0, nth);
    const auto s = filtered_state(p, optimal_output_mode(p));
    INFO(p.describe());
    CHECK(physicality_check(s.cm).physical);
    CHECK(physicality_check(apply_loss(s.cm, u(rng))).physical);
    CHECK(s.quadrature.converged);
  }
}

TEST_CASE("piecewise-linear profiles converge to the analytic result") {
  const auto p = delic(10.0);
  const auto f = optimal_output_mode(p);
  const Mat4 exact = filtered_state(p, f).cm.matrix();
  double prev = 1.0;
  for (std::size_t points : {129, 257, 513, 1025}) {
    const TimeGrid grid{p.tau(), points};
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i) v[i] = f(grid.at(i));
    const auto s = filtered_state(p, TemporalMode::custom(grid, v));
    const double err = cm_relative_difference(s.cm.matrix(), exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("binned oracle") {
  SUBCASE("uncoupled") {
    const auto p = SystemParams::dimensionless(0.0, 0.2, 5, 3, 40);
    const auto f = flat_mode(5);
    const JointCM o = binned_oracle(p, f, 1024);
    CHECK(cm_relative_difference(o.matrix(), filtered_state(p, f).cm.matrix()) < 1e-6);
  }
  SUBCASE("adiabatic two-mode squeezing") {
    const auto p = adiabatic();
    const auto f = optimal_output_mode(p);
    const JointCM o = binned_oracle(p, f, 1u << 14);
    CHECK(cm_relative_difference(o.matrix(), filtered_state(p, f).cm.matrix()) < 1e-3);
    CHECK(cm_relative_difference(o.matrix(), adiabatic_cm(gain(p).gain, 0.0).matrix()) < 1e-2);
  }
  SUBCASE("non-adiabatic") {
    const auto p = delic(1e4);
    const auto f = optimal_output_mode(p);
    const Mat4 quad = filtered_state(p, f).cm.matrix();
    const double coarse = cm_relative_difference(binned_oracle(p, f, 1u << 12).matrix(), quad);
    const double fine = cm_relative_difference(binned_oracle(p, f, 1u << 13).matrix(), quad);
    CHECK(fine < 1e-3);
    CHECK(fine < coarse / 1.6);
  }
  SUBCASE("resolution floor") {
    const auto p = delic();
    CHECK_THROWS_AS(binned_oracle(p, optimal_output_mode(p), 500), InvalidArgument);
  }
}

TEST_CASE("mode duration must match the pulse") {
  const auto p = delic();
  const auto other = optimal_output_mode(p.with_tau(4.0));
  CHECK_THROWS_AS(filtered_state(p, other), InvalidArgument);
}

TEST_CASE("assembly is deterministic") {
  const auto p = delic(3.0);
  const auto f = optimal_output_mode(p);
  const Mat4 a = filtered_state(p, f).cm.matrix();
  const Mat4 b = filtered_state(p, f).cm.matrix();
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("relative difference uses a vacuum floor") {
  Mat4 a = Mat4::Identity() * 1e-3;
  Mat4 b = Mat4::Zero();
  CHECK(cm_relative_difference(a, b) == doctest::Approx(1e-3));
  CHECK(cm_relative_difference(Mat4::Identity() * 110, Mat4::Identity() * 100) == doctest::Approx(0.1));
}
