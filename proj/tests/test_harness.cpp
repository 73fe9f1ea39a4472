#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "condsq/harness.hpp"

using namespace condsq;

namespace {

std::string csv_of(const SweepConfig& cfg) {
  std::ostringstream os;
  write_sweep_csv(os, cfg, run_sweep(cfg));
  return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("condsq_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Conditional variance of the two-mode squeezed adiabatic state.
double adiabatic_sigma(double G, double n0) {
  const double m = 2 * n0 + 1;
  return m / (G + (G - 1) * m);
}

}  // namespace

TEST_CASE("detection mode spelling") {
  for (auto m : {DetectionMode::optimal, DetectionMode::adiabatic_exponential,
                 DetectionMode::optimal_with_overlap_loss}) {
    CHECK(parse_detection_mode(to_string(m)) == m);
  }
  CHECK(parse_detection_mode("optimal-lossy") == DetectionMode::optimal_with_overlap_loss);
  CHECK_THROWS_AS(parse_detection_mode("heterodyne"), InvalidArgument);
}

TEST_CASE("presets") {
  const auto& d = find_preset("delic2018");
  CHECK(d.g_over_kappa == 0.62);
  CHECK(d.gamma_over_kappa == 2.8e-10);
  CHECK(d.kappa_tau == 8.0);
  CHECK(find_preset("adiabatic").kappa_tau == 200.0);
  CHECK_THROWS_AS(find_preset("nope"), InvalidArgument);
}

TEST_CASE("key-value configuration") {
  std::istringstream is(
      "# comment\n"
      "preset = adiabatic\n"
      "eta = 0.5   # trailing\n"
      "nbar_points = 5\n"
      "mode = optimal, adiabatic\n"
      "\n"
      "svg = true\n");
  SweepConfig cfg;
  cfg.apply(parse_key_values(is));
  CHECK(cfg.g_over_kappa == 0.05);
  CHECK(cfg.kappa_tau == 200.0);
  CHECK(cfg.eta == 0.5);
  CHECK(cfg.nbar_points == 5);
  REQUIRE(cfg.modes.size() == 2);
  CHECK(cfg.modes[1] == DetectionMode::adiabatic_exponential);
  CHECK(cfg.svg);
  CHECK_NOTHROW(cfg.validate());

  std::istringstream bad_line("eta 0.5\n");
  CHECK_THROWS_AS(parse_key_values(bad_line), InvalidArgument);
  SweepConfig other;
  CHECK_THROWS_AS(other.apply({{"colour", "blue"}}), InvalidArgument);
  CHECK_THROWS_AS(other.apply({{"eta", "half"}}), InvalidArgument);
  CHECK_THROWS_AS(read_config_file("/nonexistent/condsq.cfg"), IoError);

  SweepConfig invalid;
  invalid.nbar_points = 1;
  CHECK_THROWS_AS(invalid.validate(), InvalidArgument);
  invalid = SweepConfig{};
  invalid.nbar_min = 0.0;
  CHECK_THROWS_AS(invalid.validate(), InvalidArgument);
}

TEST_CASE("log-spaced occupation grid") {
  const auto g = nbar_grid(1e-2, 1e8, 61);
  REQUIRE(g.size() == 61);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e8));
  CHECK(g[6] == doctest::Approx(1e-1));
  CHECK(g[30] == doctest::Approx(1e3));
}

TEST_CASE("adiabatic point against the two-mode squeezing formula") {
  const auto p = SystemParams::dimensionless(0.05, 1e-10, 200, 0.01, 0.01);
  const auto r = run_point(p, DetectionMode::optimal);
  const double G = r.gain;
  const double expect = -20 * std::log10(adiabatic_sigma(G, 0.01));
  CHECK(std::abs(r.s_cond_db / expect - 1.0) < 0.05);
  CHECK(r.eta_effective == 1.0);
  CHECK(r.nbar == 0.01);
}

TEST_CASE("no detection, no squeezing") {
  for (auto mode : {DetectionMode::optimal, DetectionMode::adiabatic_exponential,
                    DetectionMode::optimal_with_overlap_loss}) {
    const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 0.0, 0.0, 0.0);
    const auto r = run_point(p, mode);
    CHECK(r.s_cond_db == 0.0);
    const Vec2 ev = eigenvalues_2x2(mechanical_block(p));
    CHECK(r.sigma_cond == doctest::Approx(ev(0)).epsilon(1e-10));
  }
}

TEST_CASE("non-adiabatic point against the binned oracle end to end") {
  const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 1e4, 1e4);
  const auto r = run_point_detailed(p, DetectionMode::optimal);
  const JointCM oracle = binned_oracle(p, r.state.mode, 1u << 14);
  const auto ref = condition_homodyne(oracle, 0.0);
  CHECK(r.result.sigma_cond == doctest::Approx(ref.sigma_cond).epsilon(1e-3));
  CHECK(r.row.s_cond_db == doctest::Approx(ref.s_cond_db).epsilon(1e-3));
  CHECK(r.row.s_cond_db > 9.0);
}

TEST_CASE("errors name the offending point") {
  const auto p = SystemParams::dimensionless(0.0, 0.1, 5, 1, 1);
  try {
    run_point(p, DetectionMode::optimal);
    FAIL("expected an error");
  } catch (const PointError& e) {
    CHECK(std::string(e.kind()) == "invalid_argument");
    CHECK(e.point().find("mode=optimal") != std::string::npos);
  }
  SweepConfig cfg;
  cfg.g_over_kappa = 0.0;
  cfg.nbar_points = 3;
  CHECK_THROWS_AS(run_sweep(cfg), PointError);
  std::ostringstream os;
  CHECK_THROWS_AS(write_mode_profiles_csv(os, p), InvalidArgument);
}

TEST_CASE("sweeps are deterministic and match isolated points") {
  SweepConfig cfg;
  cfg.nbar_min = 1.0;
  cfg.nbar_max = 1e6;
  cfg.nbar_points = 7;
  cfg.modes = {DetectionMode::optimal, DetectionMode::adiabatic_exponential};
  cfg.threads = 4;
  const std::string a = csv_of(cfg);
  cfg.threads = 1;
  const std::string b = csv_of(cfg);
  CHECK(a == b);
  CHECK(a.rfind("# condsq-sweep v1", 0) == 0);

  const auto table = run_sweep(cfg);
  REQUIRE(table.rows.size() == 14);
  CHECK(table.rows[0].mode == DetectionMode::optimal);
  CHECK(table.rows[7].mode == DetectionMode::adiabatic_exponential);
  for (std::size_t i : {0u, 3u, 9u, 13u}) {
    const auto& row = table.rows[i];
    const auto alone = run_point(cfg.base_params().with_occupation(row.nbar), row.mode);
    CHECK(alone.sigma_cond == row.sigma_cond);
    CHECK(alone.s_cond_db == row.s_cond_db);
    CHECK(alone.gain == row.gain);
  }
}

TEST_CASE("mismatched exponential detection equals optimal detection behind a loss") {
  SweepConfig cfg;
  cfg.gamma_over_kappa = 0.0;
  cfg.nbar_min = 1e-2;
  cfg.nbar_max = 1e4;
  cfg.nbar_points = 7;
  cfg.modes = {DetectionMode::adiabatic_exponential, DetectionMode::optimal_with_overlap_loss};
  const auto t = run_sweep(cfg);
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& ad = t.rows[i];
    const auto& lossy = t.rows[i + 7];
    CHECK(lossy.nbar == ad.nbar);
    CHECK(lossy.sigma_cond == doctest::Approx(ad.sigma_cond).epsilon(1e-6));
    CHECK(lossy.s_cond_db == doctest::Approx(ad.s_cond_db).epsilon(1e-6));
    CHECK(lossy.eta_effective < 1.0);
  }
}

TEST_CASE("rethermalization breaks the mismatch equivalence in proportion to the bath") {
  // Bath noise injected during the pulse also reaches the part of the
  // exponential mode orthogonal to the optimal one.
  const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 0, 0);
  std::vector<double> gaps;
  for (double n : {1e-2, 1e2, 1e3, 1e4, 1e5}) {
    const auto q = p.with_occupation(n);
    const double ad = run_point(q, DetectionMode::adiabatic_exponential).sigma_cond;
    const double lossy = run_point(q, DetectionMode::optimal_with_overlap_loss).sigma_cond;
    gaps.push_back(std::abs(lossy / ad - 1.0));
  }
  CHECK(gaps[0] < 1e-6);
  CHECK(gaps[1] < 1e-6);
  CHECK(gaps[3] / gaps[2] == doctest::Approx(10.0).epsilon(0.05));
  CHECK(gaps[4] / gaps[3] == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("rethermalization removes squeezing at high occupation") {
  const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 0, 0);
  const double ncrit = 1.0 / (p.gamma() * p.tau());
  for (double k : {10.0, 30.0}) {
    CHECK(run_point(p.with_occupation(k * ncrit), DetectionMode::optimal).s_cond_db == 0.0);
  }
  CHECK(run_point(p.with_occupation(0.1 * ncrit), DetectionMode::optimal).s_cond_db > 0.0);
}

TEST_CASE("plateau over intermediate occupations") {
  SweepConfig cfg;
  cfg.apply_preset(find_preset("adiabatic"));
  cfg.nbar_min = 1.0;
  cfg.nbar_max = 1e8;
  cfg.nbar_points = 25;
  const auto t = run_sweep(cfg);
  double lo = 1e9, hi = -1e9;
  for (const auto& r : t.rows) {
    if (r.nbar >= 1e2 * (1 - 1e-9) && r.nbar <= 1e5 * (1 + 1e-9)) {
      lo = std::min(lo, r.s_cond_db);
      hi = std::max(hi, r.s_cond_db);
    }
  }
  CHECK(hi - lo < 0.5);
  CHECK(lo > 0.0);
}

TEST_CASE("property: squeezing never recovers with more heat past the plateau") {
  SweepConfig cfg;
  cfg.nbar_min = 1e2;
  cfg.nbar_max = 1e10;
  cfg.nbar_points = 33;
  const auto t = run_sweep(cfg);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].s_cond_db <= t.rows[i - 1].s_cond_db + 1e-9);
  }
}

TEST_CASE("sweep artifacts on disk") {
  SweepConfig cfg;
  cfg.nbar_points = 4;
  cfg.nbar_max = 1e4;
  cfg.modes = {DetectionMode::optimal, DetectionMode::adiabatic_exponential};
  cfg.svg = true;
  cfg.out_dir = scratch_dir("sweep");
  const auto table = run_sweep(cfg);
  const auto paths = write_sweep_outputs(cfg, table);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].filename() == "sweep.csv");
  CHECK(paths[1].filename() == "sweep.svg");
  std::ifstream svg(paths[1]);
  const std::string text((std::istreambuf_iterator<char>(svg)), {});
  CHECK(text.find("<svg") == 0);
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = text.find("<polyline", pos)) != std::string::npos; ++pos) ++lines;
  CHECK(lines == 2);
  CHECK(text.find("adiabatic") != std::string::npos);

  cfg.format = "json";
  cfg.svg = false;
  const auto jpaths = write_sweep_outputs(cfg, table);
  REQUIRE(jpaths.size() == 1);
  std::ifstream js(jpaths[0]);
  const auto j = nlohmann::json::parse(js);
  CHECK(j["rows"].size() == 8);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("covariance JSON export") {
  const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 1, 1);
  const auto r = run_point_detailed(p, DetectionMode::optimal);
  const auto j = point_to_json(r);
  CHECK(j["params"]["g_over_kappa"] == 0.62);
  CHECK(j["blocks"]["v_out"].size() == 4);
  CHECK(j["blocks"]["v_c"][0] == doctest::Approx(r.detected.v_c()(0, 0)));
  CHECK(j["symplectic_eigenvalues"][0].get<double>() >= 1.0 - 1e-9);
  CHECK(j["conditional"]["s_cond_db"] == doctest::Approx(r.row.s_cond_db));
}

TEST_CASE("mode profile export") {
  SUBCASE("adiabatic preset") {
    const auto m = mode_profiles(SystemParams::dimensionless(0.05, 1e-10, 200, 0, 0));
    CHECK(m.optimal.grid() == m.adiabatic.grid());
    CHECK(m.overlap > 0.999);
    const double d = l2_distance(m.optimal, m.adiabatic);
    CHECK(d * d < 0.01);
  }
  SUBCASE("non-adiabatic preset") {
    const auto p = SystemParams::dimensionless(0.62, 2.8e-10, 8, 0, 0);
    std::ostringstream os;
    write_mode_profiles_csv(os, p);
    const std::string text = os.str();
    CHECK(text.rfind("# condsq-modes v1", 0) == 0);
    const auto pos = text.find("overlap=");
    REQUIRE(pos != std::string::npos);
    const double overlap = std::stod(text.substr(pos + 8));
    CHECK(overlap < 1.0);
    CHECK(overlap == doctest::Approx(0.99372196).epsilon(1e-7));
  }
}
