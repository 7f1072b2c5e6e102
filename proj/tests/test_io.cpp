#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "lifshitz/constants.hpp"
#include "lifshitz/io.hpp"

using namespace lifshitz;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kEv = constants::ev_to_rad_s;

fs::path temp_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("lifshitz_io_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json gold_json() {
  return json::parse(R"({
    "name": "gold",
    "permittivity": {
      "variant": "drude",
      "omega_p_eV": 9.0,
      "gamma_eV": 0.035
    }
  })");
}

json ideal_config(const char* kind) {
  json c;
  c["kind"] = kind;
  c["geometry"] = {{"a_nm", {500.0, 1000.0}}, {"T_K", {300.0}}};
  c["body1"] = "ideal-metal";
  c["body2"] = "ideal-metal";
  c["quadrature"] = {{"integral_rel_tol", 1e-7}, {"matsubara_rel_tol", 1e-7}};
  return c;
}

}  // namespace

TEST_CASE("material JSON round trips") {
  const json variants[] = {
      json::parse(R"({"name":"v","permittivity":{"variant":"vacuum"}})"),
      json::parse(R"({"name":"glass","permittivity":{"variant":"core",
        "oscillators":[{"g_eV2":2.8,"omega_eV":1.0}]}})"),
      json::parse(R"({"name":"doped","permittivity":{"variant":"dc_dielectric",
        "oscillators":[{"g_eV2":2.8,"omega_eV":1.0,"gamma_eV":0.1}],
        "sigma0_rad_s":1e11}})"),
      gold_json(),
      json::parse(R"({"name":"au-p","permittivity":{"variant":"plasma",
        "omega_p_eV":9.0}})"),
      json::parse(R"({"name":"ni","mu0":110.0,"permittivity":{"variant":"drude",
        "omega_p_eV":4.89,"gamma_eV":0.0436}})"),
  };
  for (const json& j : variants) {
    const MaterialModel m = io::material_from_json(j);
    const MaterialModel again = io::material_to_json(m).is_object()
                                    ? io::material_from_json(io::material_to_json(m))
                                    : m;
    CHECK(again.kind == m.kind);
    CHECK(again.name == m.name);
    CHECK(again.permeability.mu0 == m.permeability.mu0);
    for (double xi : {1e14, 1e15, 1e16}) {
      CHECK(eval_permittivity(again, xi, 300.0) ==
            doctest::Approx(eval_permittivity(m, xi, 300.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("material presets and unit conversions") {
  const MaterialModel gold = io::material_from_json(json("gold-drude"));
  CHECK(gold.kind == MaterialModel::Kind::Drude);
  CHECK(gold.omega_p == doctest::Approx(9.0 * kEv));
  CHECK(io::material_from_json(json("nickel-plasma")).permeability.mu0 ==
        110.0);
  CHECK_THROWS_AS(io::material_from_json(json("unobtainium")),
                  io::ConfigError);

  // sigma_SI -> Gaussian frequency units: sigma0 = sigma_SI / (4 pi eps0)
  const double sigma_si = 4.0 * M_PI * constants::vacuum_permittivity * 2.5e11;
  json j = json::parse(R"({"permittivity":{"variant":"dc_dielectric"}})");
  j["permittivity"]["sigma_SI_S_per_m"] = sigma_si;
  CHECK(io::material_from_json(j).sigma0 == doctest::Approx(2.5e11));
}

TEST_CASE("material parsing errors carry context") {
  json j = gold_json();
  j["permittivity"]["typo_key"] = 1.0;
  CHECK_THROWS_WITH_AS(io::material_from_json(j),
                       doctest::Contains("typo_key"), io::ConfigError);

  json bad_variant = gold_json();
  bad_variant["permittivity"]["variant"] = "weird";
  CHECK_THROWS_WITH_AS(io::material_from_json(bad_variant),
                       doctest::Contains("weird"), io::ConfigError);

  json missing = gold_json();
  missing["permittivity"].erase("omega_p_eV");
  CHECK_THROWS_WITH_AS(io::material_from_json(missing),
                       doctest::Contains("omega_p_eV"), io::ConfigError);

  json negative = gold_json();
  negative["permittivity"]["omega_p_eV"] = -9.0;
  CHECK_THROWS_AS(io::material_from_json(negative), io::ConfigError);
}

TEST_CASE("spectral CSV ingestion") {
  const fs::path good = temp_dir() / "good.csv";
  write_file(good, "omega_eV,im_eps\n0.5,1.25\n1.0,0.5\n2.0,0.125\n");
  const SpectralTable table = io::spectral_table_from_csv(good);
  REQUIRE(table.omega.size() == 3);
  CHECK(table.omega[1] == doctest::Approx(1.0 * kEv));
  CHECK(table.im_eps[2] == doctest::Approx(0.125));

  const fs::path bad_header = temp_dir() / "bad_header.csv";
  write_file(bad_header, "omega,im\n1.0,0.5\n");
  CHECK_THROWS_WITH_AS(io::spectral_table_from_csv(bad_header),
                       doctest::Contains("header"), io::ConfigError);

  const fs::path bad_row = temp_dir() / "bad_row.csv";
  write_file(bad_row, "omega_eV,im_eps\n0.5,1.25\nnot-a-number,0.5\n");
  CHECK_THROWS_WITH_AS(io::spectral_table_from_csv(bad_row),
                       doctest::Contains("row 3"), io::ConfigError);

  const fs::path unsorted = temp_dir() / "unsorted.csv";
  write_file(unsorted, "omega_eV,im_eps\n1.0,0.5\n0.5,1.25\n");
  CHECK_THROWS_AS(io::spectral_table_from_csv(unsorted), io::ConfigError);

  CHECK_THROWS_AS(io::spectral_table_from_csv(temp_dir() / "missing.csv"),
                  io::ConfigError);
}

TEST_CASE("body parsing") {
  CHECK(io::body_from_json(json("ideal-metal")).is_ideal());

  json layered;
  layered["material"] = gold_json();
  layered["layers"] = json::array(
      {{{"material", "gold-plasma"}, {"thickness_nm", 30.0}}});
  layered["graphene"] = {{"provider", "constant"},
                         {"params", {{"strength", 1.0}, {"te_strength", 2.0}}}};
  const Body body = io::body_from_json(layered);
  REQUIRE(body.layered_body() != nullptr);
  CHECK(body.layered_body()->layers.size() == 1);
  CHECK(body.layered_body()->layers[0].thickness == doctest::Approx(30e-9));
  CHECK(body.layered_body()->graphene != nullptr);

  json bad = layered;
  bad["graphene"]["provider"] = "nope";
  CHECK_THROWS_AS(io::body_from_json(bad), io::ConfigError);
  json zero_thickness = layered;
  zero_thickness["layers"][0]["thickness_nm"] = 0.0;
  CHECK_THROWS_AS(io::body_from_json(zero_thickness), io::ConfigError);
}

TEST_CASE("run config parsing and normalization") {
  json c;
  c["kind"] = "pressure";
  c["geometry"] = {{"a_nm", {200.0}}, {"T_K", {300.0}}};
  c["body1"] = gold_json();
  const io::RunConfig cfg = io::parse_run_config(c);
  CHECK(cfg.kind == io::RunKind::Pressure);
  // defaults are recorded
  bool body2_defaulted = false, tol_defaulted = false;
  for (const std::string& d : cfg.defaults_applied) {
    if (d.find("body2") != std::string::npos) body2_defaulted = true;
    if (d.find("integral_rel_tol") != std::string::npos) tol_defaulted = true;
  }
  CHECK(body2_defaulted);
  CHECK(tol_defaulted);

  // normalization is idempotent
  const io::RunConfig again = io::parse_run_config(io::run_config_to_json(cfg));
  CHECK(again.normalized == cfg.normalized);
  CHECK(again.defaults_applied.empty());
}

TEST_CASE("run config rejection") {
  CHECK_THROWS_WITH_AS(io::parse_run_config(json::parse(R"({"kind":"wat"})")),
                       doctest::Contains("wat"), io::ConfigError);

  json c = ideal_config("pressure");
  c["surprise"] = 1;
  CHECK_THROWS_WITH_AS(io::parse_run_config(c), doctest::Contains("surprise"),
                       io::ConfigError);

  json no_geometry = ideal_config("pressure");
  no_geometry.erase("geometry");
  CHECK_THROWS_AS(io::parse_run_config(no_geometry), io::ConfigError);

  json stray_radius = ideal_config("pressure");
  stray_radius["geometry"]["R_um"] = 100.0;
  CHECK_THROWS_AS(io::parse_run_config(stray_radius), io::ConfigError);

  json no_radius = ideal_config("gradient");
  CHECK_THROWS_WITH_AS(io::parse_run_config(no_radius),
                       doctest::Contains("R_um"), io::ConfigError);

  json bad_a = ideal_config("pressure");
  bad_a["geometry"]["a_nm"] = {-1.0};
  CHECK_THROWS_AS(io::parse_run_config(bad_a), io::ConfigError);

  json nernst = ideal_config("nernst");
  CHECK_THROWS_AS(io::parse_run_config(nernst), io::ConfigError);  // T_K clash
}

TEST_CASE("run sweep produces a stable CSV schema") {
  const io::RunConfig cfg = io::parse_run_config(ideal_config("pressure"));
  const io::RunOutput out = io::run_sweep(cfg, 1);
  REQUIRE(out.header.size() == 8);
  CHECK(out.header[0] == "a_m");
  CHECK(out.header[1] == "T_K");
  CHECK(out.header[2] == "value");
  CHECK(out.header[3] == "unit");
  CHECK(out.header[4] == "l_max");
  CHECK(out.header[5] == "remainder_est");
  CHECK(out.header[6] == "evals");
  CHECK(out.header[7] == "status");
  REQUIRE(out.rows.size() == 2);
  for (const auto& row : out.rows) {
    CHECK(row.size() == 8);
    CHECK(row[3] == "N/m^2");
    CHECK(row[7] == "ok");
  }
  // rows are ordered by the configured grid
  CHECK(std::stod(out.rows[0][0]) == doctest::Approx(500e-9));
  CHECK(std::stod(out.rows[1][0]) == doctest::Approx(1000e-9));
  CHECK(std::stod(out.rows[0][2]) < std::stod(out.rows[1][2]));

  const std::string csv = out.csv();
  CHECK(csv.find("a_m,T_K,value,unit,l_max,remainder_est,evals,status\n") == 0);
}

TEST_CASE("run sweep is deterministic across thread counts") {
  json c = ideal_config("free-energy");
  c["geometry"]["a_nm"] = {300.0, 500.0, 800.0, 1200.0};
  c["geometry"]["T_K"] = {77.0, 300.0};
  const io::RunConfig cfg = io::parse_run_config(c);
  const std::string csv1 = io::run_sweep(cfg, 1).csv();
  const std::string csv4 = io::run_sweep(cfg, 4).csv();
  const std::string csv7 = io::run_sweep(cfg, 7).csv();
  CHECK(csv1 == csv4);
  CHECK(csv1 == csv7);
}

TEST_CASE("kind-specific sweeps") {
  SUBCASE("gradient includes the radius column") {
    json c = ideal_config("gradient");
    c["geometry"]["R_um"] = 100.0;
    const io::RunOutput out = io::run_sweep(io::parse_run_config(c), 2);
    CHECK(out.header.back() == "R_m");
    CHECK(out.rows[0][3] == "N/m");
  }

  SUBCASE("compare emits both treatments") {
    json c;
    c["kind"] = "compare";
    c["geometry"] = {{"a_nm", {300.0}}, {"T_K", {300.0}}, {"R_um", 41.3}};
    c["quadrature"] = {{"integral_rel_tol", 1e-7}, {"matsubara_rel_tol", 1e-7}};
    const io::RunOutput out = io::run_sweep(io::parse_run_config(c), 1);
    REQUIRE(out.rows.size() == 1);
    const auto& row = out.rows[0];
    CHECK(row[3] == "N/m");
    CHECK(row[9] == "plasma");  // larger column
    CHECK(std::stod(row[10]) > 0.5);
  }

  SUBCASE("graphene ratio") {
    json c;
    c["kind"] = "graphene-ratio";
    c["geometry"] = {{"a_nm", {100.0}}, {"T_K", {300.0}}};
    c["graphene_ratio"] = {
        {"plate", json::parse(R"({"permittivity":{"variant":"core",
           "oscillators":[{"g_eV2":280.0,"omega_eV":10.0}]}})")},
        {"provider", "constant"},
        {"params", {{"strength", 1.0}, {"te_strength", 2.0}}}};
    c["quadrature"] = {{"integral_rel_tol", 1e-7}, {"matsubara_rel_tol", 1e-7}};
    const io::RunOutput out = io::run_sweep(io::parse_run_config(c), 1);
    REQUIRE(out.rows.size() == 1);
    CHECK(out.rows[0][3] == "1");
    CHECK(std::stod(out.rows[0][2]) > 1.0);
    CHECK(out.rows[0].back() == "constant");
  }
}

TEST_CASE("outputs are written atomically with a provenance sidecar") {
  const io::RunConfig cfg = io::parse_run_config(ideal_config("pressure"));
  const io::RunOutput out = io::run_sweep(cfg, 1);
  const fs::path csv_path = temp_dir() / "out.csv";
  io::write_outputs(out, csv_path);
  CHECK(read_file(csv_path) == out.csv());
  const fs::path sidecar = temp_dir() / "out.csv.provenance.json";
  REQUIRE(fs::exists(sidecar));
  const json prov = json::parse(read_file(sidecar));
  CHECK(prov["config"] == cfg.normalized);
  CHECK(prov["defaults_applied"].is_array());
  CHECK(prov.find("threads") == prov.end());
  CHECK(!fs::exists(temp_dir() / "out.csv.tmp"));
}

TEST_CASE("optical data ingestion produces a usable material") {
  // synthetic Drude spectrum so the transform has a closed-form target
  const double wp = 9.0, g = 0.035;  // eV
  std::ostringstream csv;
  csv << "omega_eV,im_eps\n";
  const int samples = 200;
  for (int i = 0; i < samples; ++i) {
    const double w = 1e-3 * std::pow(1e5, static_cast<double>(i) / (samples - 1));
    csv << w << "," << wp * wp * g / (w * (w * w + g * g)) << "\n";
  }
  const fs::path data = temp_dir() / "drude.csv";
  write_file(data, csv.str());

  const json extrapolation = {
      {"low", {{"kind", "drude"}, {"omega_p_eV", wp}, {"gamma_eV", g}}},
      {"high_decay_exponent", 3.0}};
  const fs::path out = temp_dir() / "drude_material.json";
  io::ingest_optical_data(data, extrapolation, out, "gold-tabulated", 50,
                          300.0);

  const MaterialModel m = io::load_material(out);
  CHECK(m.kind == MaterialModel::Kind::Tabulated);
  CHECK(m.name == "gold-tabulated");
  CHECK(m.table.cache_xi.size() == 50);
  const double xi5 = m.table.cache_xi[4];
  const double expected = 1.0 + wp * wp * kEv * kEv / (xi5 * (xi5 + g * kEv));
  CHECK(eval_permittivity(m, xi5, 300.0) ==
        doctest::Approx(expected).epsilon(1e-3));
  CHECK(low_frequency_class(m, 300.0).tag ==
        LowFrequencyClass::Tag::InverseXi);

  // missing policy with a dissipative edge is rejected at ingest time
  CHECK_THROWS_AS(io::ingest_optical_data(data, json::object(),
                                          temp_dir() / "nope.json"),
                  io::ConfigError);
}

TEST_CASE("command-line interface") {
  const char* cli = std::getenv("LIFSHITZ_CLI");
  REQUIRE(cli != nullptr);
  const std::string exe = cli;
  auto run_cmd = [&](const std::string& args) {
    const int rc = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };

  const fs::path cfg_path = temp_dir() / "cli_config.json";
  write_file(cfg_path, ideal_config("pressure").dump());

  CHECK(run_cmd("validate --config " + cfg_path.string()) == 0);

  const fs::path bad_path = temp_dir() / "cli_bad.json";
  write_file(bad_path, R"({"kind":"pressure"})");
  CHECK(run_cmd("validate --config " + bad_path.string()) != 0);
  CHECK(run_cmd("validate --config " + (temp_dir() / "nope.json").string()) !=
        0);

  const fs::path out1 = temp_dir() / "cli_out1.csv";
  const fs::path out2 = temp_dir() / "cli_out2.csv";
  CHECK(run_cmd("run --config " + cfg_path.string() + " --out " +
                out1.string() + " --threads 1") == 0);
  CHECK(run_cmd("run --config " + cfg_path.string() + " --out " +
                out2.string() + " --threads 3") == 0);
  CHECK(read_file(out1) == read_file(out2));
  CHECK(fs::exists(temp_dir() / "cli_out1.csv.provenance.json"));

  // --tolerance must change the recorded quadrature settings
  const fs::path out3 = temp_dir() / "cli_out3.csv";
  CHECK(run_cmd("run --config " + cfg_path.string() + " --out " +
                out3.string() + " --tolerance 1e-6") == 0);
  const json prov = json::parse(
      read_file(temp_dir() / "cli_out3.csv.provenance.json"));
  CHECK(prov["config"]["quadrature"]["integral_rel_tol"].get<double>() ==
        doctest::Approx(1e-6));
}
