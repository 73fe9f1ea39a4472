#include "condsq/temporal_modes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>

#include "condsq/quadrature.hpp"

namespace condsq {

namespace {

constexpr int kGaussOrder = 16;

const quad::GaussLegendre& gauss_rule() {
  static const quad::GaussLegendre rule(kGaussOrder);
  return rule;
}

// Panels such that each spans at most one e-folding of the fastest rate.
std::size_t panels_for(double tau, double max_rate) {
  return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(tau * max_rate)));
}

// Exact integral of the product of two piecewise-linear profiles on a shared grid.
double piecewise_linear_dot(const std::vector<double>& f, const std::vector<double>& h,
                            double dx) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    acc += 2.0 * f[i] * h[i] + f[i] * h[i + 1] + f[i + 1] * h[i] + 2.0 * f[i + 1] * h[i + 1];
  }
  return acc * dx / 6.0;
}

std::vector<double> sample(const TemporalMode& f, const TimeGrid& grid) {
  std::vector<double> out(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) out[i] = f(grid.at(i));
  return out;
}

void require_matching_grid(const SystemParams& p, const TimeGrid& grid) {
  if (grid.points < 2 || std::abs(grid.tau - p.tau()) > 1e-12 * p.tau()) {
    throw InvalidArgument("time grid must span [0, tau] with at least two points");
  }
}

// Scale factor sqrt(2 kappa / (G - 1)) of the optimal modes.
double optimal_norm(const SystemParams& p) {
  if (p.g() == 0.0) {
    throw InvalidArgument("optimal temporal mode undefined for g = 0 (gain is 1)");
  }
  const double excess = gain(p).excess;
  if (!(excess > 0.0) || !std::isfinite(excess)) {
    throw NumericalError("gain - 1 is not a positive finite number; mode cannot be normalized");
  }
  return std::sqrt(2.0 * p.kappa() / excess);
}

}  // namespace

TimeGrid TimeGrid::for_params(const SystemParams& p, std::size_t min_points,
                              double points_per_kappa_tau) {
  const auto scaled = static_cast<std::size_t>(std::ceil(points_per_kappa_tau * p.tau()));
  return {p.tau(), std::max(min_points, scaled)};
}

double ExpSum::operator()(double s) const {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.coef * std::exp(t.rate * s);
  return acc;
}

double ExpSum::max_abs_rate() const {
  double r = 0.0;
  for (const auto& t : terms) r = std::max(r, std::abs(t.rate));
  return r;
}

std::string to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::optimal_out: return "optimal_out";
    case ModeKind::optimal_in: return "optimal_in";
    case ModeKind::adiabatic_out: return "adiabatic_out";
    case ModeKind::adiabatic_in: return "adiabatic_in";
    case ModeKind::custom: return "custom";
  }
  return "unknown";
}

TemporalMode TemporalMode::analytic(ModeKind kind, const TimeGrid& grid, ExpSum profile) {
  std::vector<double> values(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) values[i] = profile(grid.at(i));
  return TemporalMode(kind, grid, std::move(values), std::move(profile));
}

TemporalMode TemporalMode::custom(const TimeGrid& grid, std::vector<double> values) {
  if (grid.points < 2 || values.size() != grid.points) {
    throw InvalidArgument("custom profile needs one value per grid point (>= 2 points)");
  }
  if (!(grid.tau > 0.0)) throw InvalidArgument("custom profile needs tau > 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("custom profile contains non-finite values");
  }
  const double norm2 = piecewise_linear_dot(values, values, grid.dt());
  if (!(norm2 > 0.0)) throw InvalidArgument("custom profile is identically zero");
  double scale = 1.0 / std::sqrt(norm2);

  const double peak = *std::max_element(values.begin(), values.end(),
                                        [](double a, double b) { return std::abs(a) < std::abs(b); });
  for (double v : values) {
    if (std::abs(v) > 1e-3 * std::abs(peak)) {
      if (v < 0.0) scale = -scale;
      break;
    }
  }
  for (double& v : values) v *= scale;
  return TemporalMode(ModeKind::custom, grid, std::move(values), std::nullopt);
}

double TemporalMode::operator()(double s) const {
  if (expsum_) return (*expsum_)(s);
  const double dt = grid_.dt();
  if (s <= 0.0) return values_.front();
  if (s >= grid_.tau) return values_.back();
  const auto i = std::min(static_cast<std::size_t>(s / dt), values_.size() - 2);
  const double u = (s - grid_.at(i)) / dt;
  return (1.0 - u) * values_[i] + u * values_[i + 1];
}

double TemporalMode::norm_squared() const {
  if (expsum_) {
    const double rate = 2.0 * expsum_->max_abs_rate();
    const auto& e = *expsum_;
    return quad::composite_gauss<double>([&](double s) { return e(s) * e(s); }, 0.0, tau(),
                                         panels_for(tau(), rate), gauss_rule(), 0.0);
  }
  return piecewise_linear_dot(values_, values_, grid_.dt());
}

GainReport gain(const SystemParams& p) { return gain(p, p.tau()); }

GainReport gain(const SystemParams& p, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  GainReport report;
  report.rate_G = p.rate_G() / p.kappa();
  report.adiabatic_gain = std::exp(2.0 * report.rate_G * tau);
  if (tau == 0.0 || p.g() == 0.0) return report;

  const double max_rate = 2.0 * m13_expsum(p).max_abs_rate();
  auto integrand = [&](double s) {
    const double m = analytic_m13(p, s);
    return m * m;
  };
  // Refine until two successive panel counts agree.
  std::size_t panels = panels_for(tau, max_rate);
  double prev = quad::composite_gauss<double>(integrand, 0.0, tau, panels, gauss_rule(), 0.0);
  for (int round = 0; round < 8; ++round) {
    panels *= 2;
    const double next =
        quad::composite_gauss<double>(integrand, 0.0, tau, panels, gauss_rule(), 0.0);
    const bool done = std::abs(next - prev) <= 1e-13 * std::abs(next);
    prev = next;
    if (done) break;
  }
  report.excess = 2.0 * p.kappa() * prev;
  report.gain = 1.0 + report.excess;
  return report;
}

ExpSum m13_expsum(const SystemParams& p) {
  const double lambda = propagator_lambda(p);
  const double decay = p.kappa() + 0.5 * p.gamma();
  if (p.g() == 0.0) return {};
  const double c = p.g() / lambda;
  return {{{c, propagator_slow_rate(p)}, {-c, -0.5 * (decay + lambda)}}};
}

TemporalMode optimal_output_mode(const SystemParams& p) {
  return optimal_output_mode(p, TimeGrid::for_params(p));
}

TemporalMode optimal_output_mode(const SystemParams& p, const TimeGrid& grid) {
  require_matching_grid(p, grid);
  const double norm = optimal_norm(p);
  ExpSum e = m13_expsum(p);
  for (auto& t : e.terms) t.coef *= norm;
  return TemporalMode::analytic(ModeKind::optimal_out, grid, std::move(e));
}

TemporalMode optimal_input_mode(const SystemParams& p) {
  return optimal_input_mode(p, TimeGrid::for_params(p));
}

TemporalMode optimal_input_mode(const SystemParams& p, const TimeGrid& grid) {
  require_matching_grid(p, grid);
  const double norm = optimal_norm(p);
  const double tau = p.tau();
  ExpSum e;
  for (const auto& t : m13_expsum(p).terms) {
    // c e^{r (tau - s)} = (c e^{r tau}) e^{-r s}
    const double coef = std::copysign(std::exp(std::log(norm * std::abs(t.coef)) + t.rate * tau),
                                      t.coef);
    e.terms.push_back({coef, -t.rate});
  }
  return TemporalMode::analytic(ModeKind::optimal_in, grid, std::move(e));
}

TemporalMode adiabatic_output_mode(const SystemParams& p) {
  return adiabatic_output_mode(p, TimeGrid::for_params(p));
}

TemporalMode adiabatic_output_mode(const SystemParams& p, const TimeGrid& grid) {
  require_matching_grid(p, grid);
  const double rate = p.rate_G() / p.kappa();
  if (rate == 0.0) throw InvalidArgument("adiabatic temporal mode undefined for g = 0");
  const double coef = std::sqrt(2.0 * rate / std::expm1(2.0 * rate * p.tau()));
  return TemporalMode::analytic(ModeKind::adiabatic_out, grid, ExpSum{{{coef, rate}}});
}

TemporalMode adiabatic_input_mode(const SystemParams& p) {
  return adiabatic_input_mode(p, TimeGrid::for_params(p));
}

TemporalMode adiabatic_input_mode(const SystemParams& p, const TimeGrid& grid) {
  require_matching_grid(p, grid);
  const double rate = p.rate_G() / p.kappa();
  if (rate == 0.0) throw InvalidArgument("adiabatic temporal mode undefined for g = 0");
  const double coef = std::sqrt(2.0 * rate / -std::expm1(-2.0 * rate * p.tau()));
  return TemporalMode::analytic(ModeKind::adiabatic_in, grid, ExpSum{{{coef, -rate}}});
}

double mode_overlap(const TemporalMode& f, const TemporalMode& h) {
  if (std::abs(f.tau() - h.tau()) > 1e-12 * std::max(f.tau(), h.tau())) {
    throw InvalidArgument("mode overlap needs profiles of equal duration");
  }
  if (f.expsum() && h.expsum()) {
    const double rate = f.expsum()->max_abs_rate() + h.expsum()->max_abs_rate();
    const auto& a = *f.expsum();
    const auto& b = *h.expsum();
    return quad::composite_gauss<double>([&](double s) { return a(s) * b(s); }, 0.0, f.tau(),
                                         panels_for(f.tau(), rate), gauss_rule(), 0.0);
  }
  if (f.grid() == h.grid()) {
    return piecewise_linear_dot(f.values(), h.values(), f.grid().dt());
  }
  const TimeGrid& fine = f.grid().points >= h.grid().points ? f.grid() : h.grid();
  std::cerr << "warning: mode_overlap resampling onto a " << fine.points
            << "-point grid (profiles on different grids)\n";
  return piecewise_linear_dot(sample(f, fine), sample(h, fine), fine.dt());
}

double l2_distance(const TemporalMode& f, const TemporalMode& h) {
  const double d2 = f.norm_squared() + h.norm_squared() - 2.0 * mode_overlap(f, h);
  return std::sqrt(std::max(0.0, d2));
}

void write_profiles_csv(std::ostream& os, const std::vector<TemporalMode>& modes,
                        const std::vector<std::string>& header_comment) {
  if (modes.empty()) throw InvalidArgument("no profiles to write");
  const TimeGrid& grid = modes.front().grid();
  for (const auto& m : modes) {
    if (!(m.grid() == grid)) throw InvalidArgument("profiles must share one grid");
  }
  for (const auto& line : header_comment) os << "# " << line << '\n';
  os << "time";
  for (const auto& m : modes) os << ',' << to_string(m.kind());
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < grid.points; ++i) {
    std::snprintf(buf, sizeof buf, "%.12e", grid.at(i));
    os << buf;
    for (const auto& m : modes) {
      std::snprintf(buf, sizeof buf, "%.12e", m.values()[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace condsq
