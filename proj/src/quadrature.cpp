#include "condsq/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace condsq::quad {

double phi1(double x) {
  if (x == 0.0) return 1.0;
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.5) {
    // sum_{k>=0} x^k / (k+2)!
    double term = 0.5;
    double sum = term;
    for (int k = 1; k < 30; ++k) {
      term *= x / (k + 2);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::expm1(x) - x) / (x * x);
}

double exp_integral(double rate, double a, double b) {
  const double len = b - a;
  return std::exp(rate * a) * len * phi1(rate * len);
}

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  const auto n = static_cast<std::size_t>(order);
  nodes.assign(n, 0.0);
  weights.assign(n, 2.0);
  if (n == 1) return;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * dx;
}

}  // namespace condsq::quad
