#pragma once

// Batch driver: single protocol points, occupation sweeps and profile export.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "condsq/conditioning.hpp"
#include "condsq/covariance.hpp"

namespace condsq {

enum class DetectionMode { optimal, adiabatic_exponential, optimal_with_overlap_loss };

/// CLI spelling: "optimal", "adiabatic", "optimal-lossy".
std::string to_string(DetectionMode mode);
DetectionMode parse_detection_mode(const std::string& text);

struct Preset {
  std::string name;
  double g_over_kappa;
  double gamma_over_kappa;
  double kappa_tau;
};

/// Known presets: "delic2018" (g/k = 0.62, gamma/k = 2.8e-10, k tau = 8) and
/// "adiabatic" (g/k = 0.05, gamma/k = 1e-10, k tau = 200).
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

struct SweepConfig {
  double g_over_kappa = 0.62;
  double gamma_over_kappa = 2.8e-10;
  double kappa_tau = 8.0;
  double eta = 1.0;
  double theta = 0.0;
  double nbar_min = 1e-2;
  double nbar_max = 1e8;
  std::size_t nbar_points = 61;
  std::vector<DetectionMode> modes{DetectionMode::optimal};
  std::filesystem::path out_dir = ".";
  std::string format = "csv";
  bool svg = false;
  std::size_t threads = 0;  // 0: hardware concurrency

  void apply_preset(const Preset& preset);
  /// Flat `key = value` assignments; keys match the long CLI flags without
  /// the leading dashes (dashes or underscores). Throws InvalidArgument on
  /// unknown keys or malformed values.
  void apply(const std::map<std::string, std::string>& assignments);
  void validate() const;

  /// Base parameters with zero occupation.
  SystemParams base_params() const;
};

/// Parses `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& is);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// `points` log-spaced occupations over [min, max].
std::vector<double> nbar_grid(double min, double max, std::size_t points);

struct SweepRow {
  double nbar = 0.0;
  double gain = 1.0;
  double eta_effective = 1.0;
  double sigma_cond = 1.0;
  double s_cond_db = 0.0;
  DetectionMode mode = DetectionMode::optimal;
  double wall_time_s = 0.0;
};

struct PointResult {
  SweepRow row;
  FilteredState state;       // lossless, detected mode
  JointCM detected;          // after loss
  ConditionalResult result;  // conditioned at p.theta()
  double mode_overlap = 1.0; // optimal vs adiabatic, only for the lossy-overlap mode
};

/// Error tagged with the parameter point that produced it.
class PointError : public Error {
 public:
  PointError(std::string kind, const std::string& message, std::string point)
      : Error(message), kind_(std::move(kind)), point_(std::move(point)) {}
  const char* kind() const noexcept override { return kind_.c_str(); }
  const std::string& point() const { return point_; }

 private:
  std::string kind_;
  std::string point_;
};

/// Propagator -> temporal mode -> covariance -> loss -> conditioning at the
/// occupations, eta and theta carried by `p`. For optimal_with_overlap_loss
/// the effective transmittance is eta * eta_mm^2. Deterministic.
PointResult run_point_detailed(const SystemParams& p, DetectionMode mode);
SweepRow run_point(const SystemParams& p, DetectionMode mode);

struct SweepTable {
  std::vector<SweepRow> rows;  // grouped by mode (config order), ascending nbar
};

/// Evaluates every (mode, nbar) point on a work pool.
SweepTable run_sweep(const SweepConfig& config);

/// Versioned CSV: comment header, column row, one row per point. Wall time
/// is left out so identical configs produce identical bytes.
void write_sweep_csv(std::ostream& os, const SweepConfig& config, const SweepTable& table);
nlohmann::json sweep_to_json(const SweepConfig& config, const SweepTable& table);

/// S_cond versus log10(nbar), one series per detection mode.
void write_sweep_svg(std::ostream& os, const SweepTable& table);

/// Writes the requested artifacts into config.out_dir and returns their paths.
std::vector<std::filesystem::path> write_sweep_outputs(const SweepConfig& config,
                                                       const SweepTable& table);

/// {params, blocks (row-major), matrix, symplectic_eigenvalues}.
nlohmann::json params_to_json(const SystemParams& p);
nlohmann::json cm_to_json(const SystemParams& p, const JointCM& cm);
nlohmann::json point_to_json(const PointResult& r);

struct ModeProfiles {
  TemporalMode optimal;
  TemporalMode adiabatic;
  double overlap;
};

/// Optimal and adiabatic output profiles on the shared default grid.
ModeProfiles mode_profiles(const SystemParams& p);
void write_mode_profiles_csv(std::ostream& os, const SystemParams& p);

}  // namespace condsq
