#pragma once

// Temporal mode profiles of the traveling field, the amplification gain and
// mode overlaps.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "condsq/core.hpp"
#include "condsq/propagator.hpp"

namespace condsq {

/// Uniform grid of `points` samples on [0, tau].
struct TimeGrid {
  double tau = 1.0;
  std::size_t points = 2;

  double dt() const { return tau / static_cast<double>(points - 1); }
  double at(std::size_t i) const { return dt() * static_cast<double>(i); }
  bool operator==(const TimeGrid&) const = default;

  /// max(2048, ceil(64 kappa tau)) points.
  static TimeGrid for_params(const SystemParams& p, std::size_t min_points = 2048,
                             double points_per_kappa_tau = 64.0);
};

/// f(s) = sum_j coef_j e^{rate_j s}.
struct ExpSum {
  struct Term {
    double coef;
    double rate;
  };
  std::vector<Term> terms;

  double operator()(double s) const;
  double max_abs_rate() const;
};

enum class ModeKind { optimal_out, optimal_in, adiabatic_out, adiabatic_in, custom };

std::string to_string(ModeKind kind);

class TemporalMode {
 public:
  /// Analytic profile; `values` are sampled from it on `grid`. The caller
  /// guarantees unit normalization.
  static TemporalMode analytic(ModeKind kind, const TimeGrid& grid, ExpSum profile);

  /// User-supplied samples, interpreted as a piecewise-linear profile and
  /// renormalized on ingestion. The sign is flipped if needed so that the
  /// leading lobe is positive. Throws InvalidArgument for an all-zero profile.
  static TemporalMode custom(const TimeGrid& grid, std::vector<double> values);

  ModeKind kind() const { return kind_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<ExpSum>& expsum() const { return expsum_; }
  double tau() const { return grid_.tau; }

  /// f(s): exact for analytic modes, linear interpolation otherwise.
  double operator()(double s) const;

  /// Integral of f^2 over [0, tau].
  double norm_squared() const;

 private:
  TemporalMode(ModeKind kind, const TimeGrid& grid, std::vector<double> values,
               std::optional<ExpSum> expsum)
      : kind_(kind), grid_(grid), values_(std::move(values)), expsum_(std::move(expsum)) {}

  ModeKind kind_;
  TimeGrid grid_;
  std::vector<double> values_;
  std::optional<ExpSum> expsum_;
};

struct GainReport {
  double gain = 1.0;            // 1 + 2 kappa int_0^tau M31^2
  double excess = 0.0;          // gain - 1 without cancellation
  double rate_G = 0.0;          // g^2 / kappa
  double adiabatic_gain = 1.0;  // e^{2 G tau}
};

/// Amplification gain by Gauss-Legendre quadrature of the closed-form M31^2.
GainReport gain(const SystemParams& p);
GainReport gain(const SystemParams& p, double tau);

/// M13(s) as an exponential sum.
ExpSum m13_expsum(const SystemParams& p);

/// f_out(s) = sqrt(2 kappa / (G - 1)) M13(s). Throws InvalidArgument when the
/// gain is 1 (g = 0).
TemporalMode optimal_output_mode(const SystemParams& p);
TemporalMode optimal_output_mode(const SystemParams& p, const TimeGrid& grid);

/// f_in(s) = sqrt(2 kappa / (G - 1)) M31(tau - s).
TemporalMode optimal_input_mode(const SystemParams& p);
TemporalMode optimal_input_mode(const SystemParams& p, const TimeGrid& grid);

/// sqrt(2G / (e^{2 G tau} - 1)) e^{G s}.
TemporalMode adiabatic_output_mode(const SystemParams& p);
TemporalMode adiabatic_output_mode(const SystemParams& p, const TimeGrid& grid);

/// sqrt(2G / (1 - e^{-2 G tau})) e^{-G s}.
TemporalMode adiabatic_input_mode(const SystemParams& p);
TemporalMode adiabatic_input_mode(const SystemParams& p, const TimeGrid& grid);

/// Signed overlap int_0^tau f h ds. Analytic pairs are integrated by
/// Gauss-Legendre quadrature; otherwise the piecewise-linear product is
/// integrated exactly on the finer grid, resampling the coarser profile with a
/// warning on stderr. Throws InvalidArgument when the durations differ.
double mode_overlap(const TemporalMode& f, const TemporalMode& h);

/// sqrt(int (f - h)^2).
double l2_distance(const TemporalMode& f, const TemporalMode& h);

/// Two-column-per-mode CSV: `time,<kind>,<kind>...`, one row per grid point.
/// All modes must share the grid of the first. `header_comment` lines are
/// written first, each prefixed with "# ".
void write_profiles_csv(std::ostream& os, const std::vector<TemporalMode>& modes,
                        const std::vector<std::string>& header_comment = {});

}  // namespace condsq
