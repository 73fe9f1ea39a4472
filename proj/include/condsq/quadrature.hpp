#pragma once

// Integration helpers for smooth exponential integrands.

#include <cstddef>
#include <span>
#include <vector>

namespace condsq::quad {

/// (e^x - 1)/x, accurate near x = 0.
double phi1(double x);
/// (e^x - 1 - x)/x^2, accurate near x = 0.
double phi2(double x);

/// Integral of e^{rate*s} over [a, b]; well conditioned for rate -> 0.
double exp_integral(double rate, double a, double b);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);
};

/// Composite Gauss-Legendre over [a, b] split into `panels` equal panels.
/// `f` maps a point to any type supporting `+=` and scalar `*`.
template <class T, class F>
T composite_gauss(const F& f, double a, double b, std::size_t panels, const GaussLegendre& rule,
                  T zero) {
  T acc = zero;
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc += (0.5 * h * rule.weights[q]) * f(mid + 0.5 * h * rule.nodes[q]);
    }
  }
  return acc;
}

/// Composite trapezoid of uniformly spaced samples.
double trapezoid(std::span<const double> values, double dx);

}  // namespace condsq::quad
