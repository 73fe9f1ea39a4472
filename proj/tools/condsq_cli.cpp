// condsq: conditional mechanical squeezing from pulsed blue-detuned
// optomechanics. Subcommands: sweep, point, modes, selftest.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condsq/harness.hpp"

namespace {

using condsq::SweepConfig;

// Flags shared by every subcommand. Values stay unset unless given so that
// preset < config file < flags.
struct CommonFlags {
  std::string preset;
  std::string config;
  std::optional<double> g_over_kappa, gamma_over_kappa, kappa_tau, eta, theta;
  std::optional<double> nbar_min, nbar_max;
  std::optional<std::size_t> nbar_points, threads;
  std::vector<std::string> modes;
  std::string out;
  std::string format;
  bool svg = false;

  void add_physics(CLI::App* app) {
    app->add_option("--preset", preset, "named parameter preset (delic2018, adiabatic)");
    app->add_option("--config", config, "key = value configuration file");
    app->add_option("--g-over-kappa", g_over_kappa, "coupling rate g/kappa");
    app->add_option("--gamma-over-kappa", gamma_over_kappa, "mechanical damping gamma/kappa");
    app->add_option("--kappa-tau", kappa_tau, "pulse duration kappa*tau");
    app->add_option("--eta", eta, "detection transmittance in [0, 1]");
    app->add_option("--theta", theta, "homodyne quadrature angle (rad)");
  }
  void add_sweep(CLI::App* app) {
    app->add_option("--nbar-min", nbar_min, "smallest occupation");
    app->add_option("--nbar-max", nbar_max, "largest occupation");
    app->add_option("--nbar-points", nbar_points, "number of log-spaced occupations");
    app->add_option("--threads", threads, "worker threads (0: all cores)");
  }
  void add_mode(CLI::App* app) {
    app->add_option("--mode", modes, "detection mode: optimal | adiabatic | optimal-lossy")
        ->delimiter(',');
  }
  void add_output(CLI::App* app, bool with_svg) {
    app->add_option("--out", out, "output directory");
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (with_svg) app->add_flag("--svg", svg, "also write an SVG plot");
  }

  SweepConfig resolve() const {
    SweepConfig cfg;
    if (!preset.empty()) cfg.apply_preset(condsq::find_preset(preset));
    if (!config.empty()) cfg.apply(condsq::read_config_file(config));
    if (g_over_kappa) cfg.g_over_kappa = *g_over_kappa;
    if (gamma_over_kappa) cfg.gamma_over_kappa = *gamma_over_kappa;
    if (kappa_tau) cfg.kappa_tau = *kappa_tau;
    if (eta) cfg.eta = *eta;
    if (theta) cfg.theta = *theta;
    if (nbar_min) cfg.nbar_min = *nbar_min;
    if (nbar_max) cfg.nbar_max = *nbar_max;
    if (nbar_points) cfg.nbar_points = *nbar_points;
    if (threads) cfg.threads = *threads;
    if (!modes.empty()) {
      cfg.modes.clear();
      for (const auto& m : modes) cfg.modes.push_back(condsq::parse_detection_mode(m));
    }
    if (!out.empty()) cfg.out_dir = out;
    if (!format.empty()) cfg.format = format;
    if (svg) cfg.svg = true;
    return cfg;
  }
};

void print_error(const std::string& kind, const std::string& message, const std::string& point) {
  nlohmann::json err = {{"kind", kind}, {"message", message}};
  if (!point.empty()) err["point"] = point;
  std::cerr << nlohmann::json{{"error", err}}.dump() << '\n';
}

int run_sweep_cmd(const CommonFlags& flags) {
  const SweepConfig cfg = flags.resolve();
  const auto table = condsq::run_sweep(cfg);
  for (const auto& path : condsq::write_sweep_outputs(cfg, table)) {
    std::cout << path.string() << '\n';
  }
  return 0;
}

int run_point_cmd(const CommonFlags& flags, double nbar, std::optional<double> n0,
                  std::optional<double> n_th) {
  const SweepConfig cfg = flags.resolve();
  const auto p = cfg.base_params().with_occupations(n0.value_or(nbar), n_th.value_or(nbar));
  const auto mode = cfg.modes.front();
  const auto result = condsq::run_point_detailed(p, mode);
  if (cfg.format == "csv") {
    condsq::SweepTable table{{result.row}};
    condsq::write_sweep_csv(std::cout, cfg, table);
  } else {
    std::cout << condsq::point_to_json(result).dump(2) << '\n';
  }
  return 0;
}

int run_modes_cmd(const CommonFlags& flags) {
  const SweepConfig cfg = flags.resolve();
  const auto p = cfg.base_params();
  if (flags.out.empty()) {
    condsq::write_mode_profiles_csv(std::cout, p);
    return 0;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / "modes.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw condsq::IoError("cannot open " + path.string() + " for writing");
  condsq::write_mode_profiles_csv(os, p);
  std::cout << path.string() << '\n';
  return 0;
}

// Quadrature engine against the time-binned oracle.
int run_selftest_cmd(std::size_t bins) {
  struct Case {
    const char* name;
    condsq::SystemParams p;
  };
  const std::vector<Case> cases = {
      {"adiabatic, ground state", condsq::SystemParams::dimensionless(0.05, 1e-10, 200, 0, 0)},
      {"adiabatic, thermal", condsq::SystemParams::dimensionless(0.05, 1e-10, 200, 100, 100)},
      {"delic2018, nbar=1e4", condsq::SystemParams::dimensionless(0.62, 2.8e-10, 8, 1e4, 1e4)},
      {"intermediate, damped", condsq::SystemParams::dimensionless(0.3, 1e-3, 20, 5, 50)},
      {"strong damping", condsq::SystemParams::dimensionless(0.4, 0.2, 10, 2, 3)},
  };
  bool ok = true;
  for (const auto& c : cases) {
    const auto mode = condsq::optimal_output_mode(c.p);
    const auto quad = condsq::filtered_state(c.p, mode).cm;
    const auto oracle = condsq::binned_oracle(c.p, mode, bins);
    const double err = condsq::cm_relative_difference(oracle.matrix(), quad.matrix());
    const bool pass = err <= 1e-3;
    ok = ok && pass;
    std::printf("[%s] %-26s max relative difference %.3e\n", pass ? "PASS" : "FAIL", c.name, err);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional squeezing of a levitated oscillator by pulsed optomechanics"};
  app.require_subcommand(1);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "sweep the occupation nbar = n0 = n_th");
  sweep_flags.add_physics(sweep);
  sweep_flags.add_sweep(sweep);
  sweep_flags.add_mode(sweep);
  sweep_flags.add_output(sweep, true);

  CommonFlags point_flags;
  double nbar = 0.0;
  std::optional<double> n0, n_th;
  auto* point = app.add_subcommand("point", "evaluate a single parameter point");
  point_flags.add_physics(point);
  point_flags.add_mode(point);
  point_flags.add_output(point, false);
  point->add_option("--nbar", nbar, "occupation used for both n0 and n_th");
  point->add_option("--n0", n0, "initial mechanical occupation");
  point->add_option("--n-th", n_th, "bath occupation");

  CommonFlags modes_flags;
  auto* modes = app.add_subcommand("modes", "export optimal and adiabatic output profiles");
  modes_flags.add_physics(modes);
  modes_flags.add_output(modes, false);

  std::size_t bins = 1u << 14;
  auto* selftest = app.add_subcommand("selftest", "quadrature vs binned oracle equivalence");
  selftest->add_option("--bins", bins, "time bins for the oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what(), "");
    return 2;
  }

  try {
    if (*sweep) return run_sweep_cmd(sweep_flags);
    if (*point) {
      if (point_flags.format.empty()) point_flags.format = "json";
      return run_point_cmd(point_flags, nbar, n0, n_th);
    }
    if (*modes) return run_modes_cmd(modes_flags);
    if (*selftest) return run_selftest_cmd(bins);
  } catch (const condsq::PointError& e) {
    print_error(e.kind(), e.what(), e.point());
    return 1;
  } catch (const condsq::Error& e) {
    print_error(e.kind(), e.what(), "");
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what(), "");
    return 1;
  }
  return 0;
}
