#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "lifshitz/io.hpp"

namespace {

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw lifshitz::io::ConfigError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw lifshitz::io::ConfigError(path.string() + ": " + err.what());
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifshitz-theory dispersion force calculations"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Convert tabulated optical data into a material file");
  std::string data_path, ingest_out, material_name = "tabulated";
  std::string extrapolation_path;
  int cache_l_max = 1000;
  double cache_temperature = 300.0;
  ingest->add_option("--data", data_path, "CSV with header omega_eV,im_eps")
      ->required();
  ingest->add_option("--out", ingest_out, "Material JSON to write")->required();
  ingest->add_option("--name", material_name, "Material name");
  ingest->add_option("--extrapolation", extrapolation_path,
                     "JSON file with extrapolation policies "
                     "({\"low\": ..., \"high_decay_exponent\": ...})");
  ingest->add_option("--cache-l-max", cache_l_max,
                     "Matsubara indices to precompute eps(i xi) for");
  ingest->add_option("--cache-temperature", cache_temperature,
                     "Temperature (K) of the precomputed Matsubara grid");

  // run
  auto* run = app.add_subcommand("run", "Evaluate a configured sweep");
  std::string config_path, run_out;
  int threads = 1;
  double tolerance = 0.0;
  run->add_option("--config", config_path, "Run configuration JSON")->required();
  run->add_option("--out", run_out, "Output CSV path")->required();
  run->add_option("--threads", threads, "Worker threads (default 1)");
  run->add_option("--tolerance", tolerance,
                  "Override both quadrature relative tolerances");

  // validate
  auto* validate = app.add_subcommand(
      "validate", "Parse and check a run configuration without evaluating it");
  std::string validate_path;
  validate->add_option("--config", validate_path, "Run configuration JSON")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      nlohmann::json extrapolation = nlohmann::json::object();
      if (!extrapolation_path.empty())
        extrapolation = load_json_file(extrapolation_path);
      lifshitz::io::ingest_optical_data(data_path, extrapolation, ingest_out,
                                        material_name, cache_l_max,
                                        cache_temperature);
      std::cout << "wrote " << ingest_out << "\n";
    } else if (*run) {
      lifshitz::io::RunConfig config =
          lifshitz::io::load_run_config(config_path);
      if (tolerance != 0.0) {
        if (!(tolerance > 0.0 && tolerance < 1.0))
          throw lifshitz::io::ConfigError("--tolerance must be in (0, 1)");
        config.normalized["quadrature"]["integral_rel_tol"] = tolerance;
        config.normalized["quadrature"]["matsubara_rel_tol"] = tolerance;
      }
      lifshitz::io::RunOutput output = lifshitz::io::run_sweep(config, threads);
      lifshitz::io::write_outputs(output, run_out);
      std::cout << "wrote " << run_out << " (" << output.rows.size()
                << " rows)\n";
    } else if (*validate) {
      lifshitz::io::load_run_config(validate_path);
      std::cout << "ok\n";
    }
  } catch (const lifshitz::io::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
