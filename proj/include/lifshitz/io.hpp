#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lifshitz/experiments.hpp"

#include "json.hpp"

namespace lifshitz::io {

/// Malformed configuration or data file. The message carries enough context
/// (file, key, row) to locate the problem; the CLI maps it to a nonzero exit.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// --- materials -------------------------------------------------------------

/// Material schema: {"name": ..., "permittivity": {"variant": ...}, optional
/// "mu0"}. Frequencies carry the unit in the key ("omega_p_eV", "gamma_eV",
/// "g_eV2"); dc conductivity is "sigma0_rad_s" or "sigma_SI_S_per_m".
/// base_dir resolves relative spectral-table paths.
MaterialModel material_from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = ".");
nlohmann::json material_to_json(const MaterialModel& m);
MaterialModel load_material(const std::filesystem::path& path);

/// Two-column CSV with header "omega_eV,im_eps". Errors cite the 1-based row.
SpectralTable spectral_table_from_csv(const std::filesystem::path& path);

/// Body schema: {"material": ..., "layers": [{"material": ..,
/// "thickness_nm": ..}, ...] (substrate outward), "graphene":
/// {"provider": .., "params": {}}} or the string "ideal-metal".
Body body_from_json(const nlohmann::json& j,
                    const std::filesystem::path& base_dir = ".");

// --- run configurations ----------------------------------------------------

enum class RunKind {
  FreeEnergy,
  Pressure,
  Gradient,
  Entropy,
  Compare,
  DiffForce,
  Nernst,
  GrapheneRatio,
};

const char* to_string(RunKind kind);
RunKind run_kind_from_string(const std::string& s);

struct RunConfig {
  RunKind kind = RunKind::FreeEnergy;
  nlohmann::json normalized;  // defaults filled in, paths resolved
  std::vector<std::string> defaults_applied;
  std::filesystem::path base_dir = ".";
};

/// Parse and normalize; unknown keys are rejected, missing optional keys are
/// recorded in defaults_applied.
RunConfig parse_run_config(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Normalized form; parse(serialize(parse(x))) == parse(x).
nlohmann::json run_config_to_json(const RunConfig& config);

void validate_run_config(const RunConfig& config);

// --- execution -------------------------------------------------------------

struct RunOutput {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // cells preformatted
  nlohmann::json provenance;

  std::string csv() const;
};

/// Evaluate the configured sweep. Grid points run on `threads` workers but
/// rows are assembled in grid order, so the CSV bytes never depend on the
/// thread count. Per-point convergence failures land in the status column.
RunOutput run_sweep(const RunConfig& config, int threads = 1);

/// Write csv to out_path and provenance to out_path + ".provenance.json",
/// both via write-to-temporary-then-rename.
void write_outputs(const RunOutput& output, const std::filesystem::path& out_path);

// --- ingestion -------------------------------------------------------------

/// Read tabulated optical data, attach extrapolation policies, validate, and
/// write a material JSON with the table embedded plus a cache of eps(i xi_l)
/// on the Matsubara grid at cache_temperature.
void ingest_optical_data(const std::filesystem::path& csv_path,
                         const nlohmann::json& extrapolation,
                         const std::filesystem::path& out_path,
                         const std::string& name = "tabulated",
                         int cache_l_max = 1000,
                         double cache_temperature = 300.0);

}  // namespace lifshitz::io
