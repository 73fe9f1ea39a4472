#include "condsq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "condsq/svg_plot.hpp"

namespace condsq {

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': not a number: '" + value + "'");
  }
  if (used != value.size()) {
    throw InvalidArgument("config key '" + key + "': trailing characters in '" + value + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v < 0.0 || v != std::floor(v)) {
    throw InvalidArgument("config key '" + key + "': expected a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<DetectionMode> parse_mode_list(const std::string& value) {
  std::vector<DetectionMode> modes;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) modes.push_back(parse_detection_mode(item));
  }
  if (modes.empty()) throw InvalidArgument("empty detection mode list");
  return modes;
}

}  // namespace

std::string to_string(DetectionMode mode) {
  switch (mode) {
    case DetectionMode::optimal: return "optimal";
    case DetectionMode::adiabatic_exponential: return "adiabatic";
    case DetectionMode::optimal_with_overlap_loss: return "optimal-lossy";
  }
  return "unknown";
}

DetectionMode parse_detection_mode(const std::string& text) {
  if (text == "optimal") return DetectionMode::optimal;
  if (text == "adiabatic" || text == "adiabatic_exponential") {
    return DetectionMode::adiabatic_exponential;
  }
  if (text == "optimal-lossy" || text == "optimal_with_overlap_loss") {
    return DetectionMode::optimal_with_overlap_loss;
  }
  throw InvalidArgument("unknown detection mode '" + text +
                        "' (expected optimal, adiabatic or optimal-lossy)");
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"delic2018", 0.62, 2.8e-10, 8.0},
      {"adiabatic", 0.05, 1e-10, 200.0},
  };
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

void SweepConfig::apply_preset(const Preset& preset) {
  g_over_kappa = preset.g_over_kappa;
  gamma_over_kappa = preset.gamma_over_kappa;
  kappa_tau = preset.kappa_tau;
}

void SweepConfig::apply(const std::map<std::string, std::string>& assignments) {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : assignments) kv[normalize_key(k)] = v;
  if (auto it = kv.find("preset"); it != kv.end()) apply_preset(find_preset(it->second));
  for (const auto& [key, value] : kv) {
    if (key == "preset") continue;
    if (key == "g-over-kappa") g_over_kappa = parse_double(key, value);
    else if (key == "gamma-over-kappa") gamma_over_kappa = parse_double(key, value);
    else if (key == "kappa-tau") kappa_tau = parse_double(key, value);
    else if (key == "eta") eta = parse_double(key, value);
    else if (key == "theta") theta = parse_double(key, value);
    else if (key == "nbar-min") nbar_min = parse_double(key, value);
    else if (key == "nbar-max") nbar_max = parse_double(key, value);
    else if (key == "nbar-points") nbar_points = parse_count(key, value);
    else if (key == "mode") modes = parse_mode_list(value);
    else if (key == "out") out_dir = value;
    else if (key == "format") format = value;
    else if (key == "svg") svg = parse_bool(key, value);
    else if (key == "threads") threads = parse_count(key, value);
    else throw InvalidArgument("unknown config key '" + key + "'");
  }
}

void SweepConfig::validate() const {
  base_params();
  if (nbar_points < 2) throw InvalidArgument("nbar-points must be >= 2");
  if (!(nbar_min > 0.0) || !(nbar_max > 0.0)) throw InvalidArgument("nbar values must be > 0");
  if (!(nbar_max > nbar_min)) throw InvalidArgument("nbar-max must exceed nbar-min");
  if (modes.empty()) throw InvalidArgument("at least one detection mode is required");
  if (format != "csv" && format != "json") throw InvalidArgument("format must be csv or json");
}

SystemParams SweepConfig::base_params() const {
  return SystemParams::dimensionless(g_over_kappa, gamma_over_kappa, kappa_tau, 0.0, 0.0, eta,
                                     theta);
}

std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_key_values(in);
}

std::vector<double> nbar_grid(double min, double max, std::size_t points) {
  if (points < 2 || !(min > 0.0) || !(max > min)) {
    throw InvalidArgument("nbar grid needs 0 < min < max and >= 2 points");
  }
  std::vector<double> out(points);
  const double lo = std::log10(min);
  const double hi = std::log10(max);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(points - 1));
  }
  out.front() = min;
  out.back() = max;
  return out;
}

PointResult run_point_detailed(const SystemParams& p, DetectionMode mode) {
  const auto start = std::chrono::steady_clock::now();
  try {
    double eta_eff = p.eta();
    double overlap = 1.0;
    std::optional<TemporalMode> detected_mode;
    switch (mode) {
      case DetectionMode::optimal:
        detected_mode = optimal_output_mode(p);
        break;
      case DetectionMode::adiabatic_exponential:
        detected_mode = adiabatic_output_mode(p);
        break;
      case DetectionMode::optimal_with_overlap_loss: {
        detected_mode = optimal_output_mode(p);
        overlap = mode_overlap(*detected_mode, adiabatic_output_mode(p));
        // Detecting a mode with amplitude overlap eta_mm with the optimal one
        // keeps a fraction eta_mm^2 of the correlated power.
        eta_eff *= overlap * overlap;
        break;
      }
    }
    FilteredState state = filtered_state(p, *detected_mode);
    if (!state.quadrature.converged) {
      std::cerr << "warning: covariance quadrature not converged (estimate "
                << state.quadrature.error_estimate << ") at " << p.describe() << '\n';
    }
    JointCM detected = apply_loss(state.cm, eta_eff);
    ConditionalResult result = condition_homodyne(detected, p.theta());

    SweepRow row;
    row.nbar = p.n0();
    row.gain = gain(p).gain;
    row.eta_effective = eta_eff;
    row.sigma_cond = result.sigma_cond;
    row.s_cond_db = result.s_cond_db;
    row.mode = mode;
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {row, std::move(state), detected, result, overlap};
  } catch (const Error& e) {
    throw PointError(e.kind(), e.what(), p.describe() + " mode=" + to_string(mode));
  }
}

SweepRow run_point(const SystemParams& p, DetectionMode mode) {
  return run_point_detailed(p, mode).row;
}

SweepTable run_sweep(const SweepConfig& config) {
  config.validate();
  const SystemParams base = config.base_params();
  const std::vector<double> nbars = nbar_grid(config.nbar_min, config.nbar_max, config.nbar_points);

  struct Task {
    DetectionMode mode;
    double nbar;
  };
  std::vector<Task> tasks;
  for (DetectionMode m : config.modes) {
    for (double n : nbars) tasks.push_back({m, n});
  }

  std::vector<SweepRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        rows[i] = run_point(base.with_occupation(tasks[i].nbar), tasks[i].mode);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::clamp<std::size_t>(n_threads, 1, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return {std::move(rows)};
}

void write_sweep_csv(std::ostream& os, const SweepConfig& config, const SweepTable& table) {
  os << "# condsq-sweep v1 columns=nbar,gain,eta_effective,sigma_cond,s_cond_db,mode\n";
  os << "# g_over_kappa=" << sci(config.g_over_kappa)
     << " gamma_over_kappa=" << sci(config.gamma_over_kappa)
     << " kappa_tau=" << sci(config.kappa_tau) << " eta=" << sci(config.eta)
     << " theta=" << sci(config.theta) << '\n';
  os << "nbar,gain,eta_effective,sigma_cond,s_cond_db,mode\n";
  for (const auto& r : table.rows) {
    os << sci(r.nbar) << ',' << sci(r.gain) << ',' << sci(r.eta_effective) << ','
       << sci(r.sigma_cond) << ',' << sci(r.s_cond_db) << ',' << to_string(r.mode) << '\n';
  }
}

nlohmann::json sweep_to_json(const SweepConfig& config, const SweepTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"nbar", r.nbar},
                    {"gain", r.gain},
                    {"eta_effective", r.eta_effective},
                    {"sigma_cond", r.sigma_cond},
                    {"s_cond_db", r.s_cond_db},
                    {"mode", to_string(r.mode)},
                    {"wall_time_s", r.wall_time_s}});
  }
  nlohmann::json modes = nlohmann::json::array();
  for (auto m : config.modes) modes.push_back(to_string(m));
  return {{"version", 1},
          {"config",
           {{"g_over_kappa", config.g_over_kappa},
            {"gamma_over_kappa", config.gamma_over_kappa},
            {"kappa_tau", config.kappa_tau},
            {"eta", config.eta},
            {"theta", config.theta},
            {"nbar_min", config.nbar_min},
            {"nbar_max", config.nbar_max},
            {"nbar_points", config.nbar_points},
            {"modes", modes}}},
          {"rows", rows}};
}

void write_sweep_svg(std::ostream& os, const SweepTable& table) {
  std::vector<svg::Series> series;
  for (const auto& r : table.rows) {
    const std::string label = to_string(r.mode);
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const svg::Series& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}, {}});
      it = std::prev(series.end());
    }
    it->x.push_back(r.nbar);
    it->y.push_back(r.s_cond_db);
  }
  svg::write_line_plot(os, series,
                       {"Conditional squeezing", "mean occupation nbar", "S_cond (dB)", true});
}

std::vector<std::filesystem::path> write_sweep_outputs(const SweepConfig& config,
                                                       const SweepTable& table) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir.string());

  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
  };
  if (config.format == "json") {
    const auto path = config.out_dir / "sweep.json";
    auto out = open(path);
    out << sweep_to_json(config, table).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
    written.push_back(path);
  } else {
    const auto path = config.out_dir / "sweep.csv";
    auto out = open(path);
    write_sweep_csv(out, config, table);
    if (!out) throw IoError("write failed: " + path.string());
    written.push_back(path);
  }
  if (config.svg) {
    const auto path = config.out_dir / "sweep.svg";
    auto out = open(path);
    write_sweep_svg(out, table);
    if (!out) throw IoError("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

nlohmann::json params_to_json(const SystemParams& p) {
  return {{"g_over_kappa", p.g()},  {"gamma_over_kappa", p.gamma()}, {"kappa_tau", p.tau()},
          {"n0", p.n0()},           {"n_th", p.n_th()},              {"eta", p.eta()},
          {"theta", p.theta()}};
}

nlohmann::json cm_to_json(const SystemParams& p, const JointCM& cm) {
  auto flat2 = [](const Mat2& m) {
    return nlohmann::json::array({m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
  };
  nlohmann::json matrix = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) matrix.push_back(cm.matrix()(i, j));
  }
  const Vec2 nu = symplectic_eigenvalues(cm.matrix());
  return {{"params", params_to_json(p)},
          {"blocks", {{"v_out", flat2(cm.v_out())}, {"v_c", flat2(cm.v_c())}, {"v_m", flat2(cm.v_m())}}},
          {"matrix", matrix},
          {"symplectic_eigenvalues", {nu(0), nu(1)}}};
}

nlohmann::json point_to_json(const PointResult& r) {
  nlohmann::json j = cm_to_json(r.state.params, r.detected);
  const auto& c = r.result;
  j["mode"] = to_string(r.row.mode);
  j["gain"] = r.row.gain;
  j["eta_effective"] = r.row.eta_effective;
  j["conditional"] = {{"v_cond", {c.v_cond(0, 0), c.v_cond(0, 1), c.v_cond(1, 0), c.v_cond(1, 1)}},
                      {"sigma_cond", c.sigma_cond},
                      {"sigma_major", c.sigma_major},
                      {"s_cond_db", c.s_cond_db},
                      {"theta", c.theta},
                      {"principal_angle", c.principal_angle}};
  j["quadrature_error_estimate"] = r.state.quadrature.error_estimate;
  if (r.row.mode == DetectionMode::optimal_with_overlap_loss) j["mode_overlap"] = r.mode_overlap;
  return j;
}

ModeProfiles mode_profiles(const SystemParams& p) {
  const TimeGrid grid = TimeGrid::for_params(p);
  TemporalMode opt = optimal_output_mode(p, grid);
  TemporalMode ad = adiabatic_output_mode(p, grid);
  const double overlap = mode_overlap(opt, ad);
  return {std::move(opt), std::move(ad), overlap};
}

void write_mode_profiles_csv(std::ostream& os, const SystemParams& p) {
  const ModeProfiles m = mode_profiles(p);
  write_profiles_csv(os, {m.optimal, m.adiabatic},
                     {"condsq-modes v1", p.describe(), "overlap=" + sci(m.overlap) +
                                                          " l2_distance=" +
                                                          sci(l2_distance(m.optimal, m.adiabatic))});
}

}  // namespace condsq
