#include "lifshitz/io.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lifshitz/constants.hpp"

namespace lifshitz::io {

namespace {

using nlohmann::json;

constexpr double kEv = constants::ev_to_rad_s;

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw ConfigError(ctx + ": " + what);
}

const json& expect_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail(ctx, "expected an object");
  return j;
}

void reject_unknown(const json& j, const std::string& ctx,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (key == k) { ok = true; break; }
    if (!ok) fail(ctx, "unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& ctx, const char* key) {
  if (!j.contains(key)) fail(ctx, std::string("missing key '") + key + "'");
  if (!j[key].is_number()) fail(ctx, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

double get_number_or(const json& j, const std::string& ctx, const char* key,
                     double fallback,
                     std::vector<std::string>* defaults = nullptr) {
  if (!j.contains(key)) {
    if (defaults) defaults->push_back(ctx + "." + key + " = " + fmt_g(fallback));
    return fallback;
  }
  if (!j[key].is_number()) fail(ctx, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

std::string get_string(const json& j, const std::string& ctx, const char* key) {
  if (!j.contains(key)) fail(ctx, std::string("missing key '") + key + "'");
  if (!j[key].is_string()) fail(ctx, std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& ctx,
                                     const char* key) {
  if (!j.contains(key)) fail(ctx, std::string("missing key '") + key + "'");
  const json& arr = j[key];
  if (!arr.is_array() || arr.empty())
    fail(ctx, std::string("'") + key + "' must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number())
      fail(ctx, std::string("'") + key + "' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<Oscillator> oscillators_from_json(const json& j,
                                              const std::string& ctx) {
  std::vector<Oscillator> out;
  if (!j.is_array()) fail(ctx, "'oscillators' must be an array");
  int i = 0;
  for (const json& o : j) {
    const std::string octx = ctx + ".oscillators[" + std::to_string(i++) + "]";
    expect_object(o, octx);
    reject_unknown(o, octx, {"g_eV2", "omega_eV", "gamma_eV"});
    Oscillator osc;
    osc.strength = get_number(o, octx, "g_eV2") * kEv * kEv;
    osc.frequency = get_number(o, octx, "omega_eV") * kEv;
    osc.relaxation = get_number_or(o, octx, "gamma_eV", 0.0) * kEv;
    out.push_back(osc);
  }
  return out;
}

json oscillators_to_json(const std::vector<Oscillator>& oscillators) {
  json arr = json::array();
  for (const Oscillator& o : oscillators) {
    json e;
    e["g_eV2"] = o.strength / (kEv * kEv);
    e["omega_eV"] = o.frequency / kEv;
    if (o.relaxation != 0.0) e["gamma_eV"] = o.relaxation / kEv;
    arr.push_back(e);
  }
  return arr;
}

LowTail low_tail_from_json(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  const std::string kind = get_string(j, ctx, "kind");
  LowTail tail;
  if (kind == "drude") {
    reject_unknown(j, ctx, {"kind", "omega_p_eV", "gamma_eV"});
    tail.kind = LowTailKind::DrudeTail;
    tail.omega_p = get_number(j, ctx, "omega_p_eV") * kEv;
    tail.gamma = get_number(j, ctx, "gamma_eV") * kEv;
  } else if (kind == "plasma") {
    reject_unknown(j, ctx, {"kind", "omega_p_eV"});
    tail.kind = LowTailKind::PlasmaTail;
    tail.omega_p = get_number(j, ctx, "omega_p_eV") * kEv;
  } else if (kind == "constant") {
    reject_unknown(j, ctx, {"kind", "eps"});
    tail.kind = LowTailKind::ConstantEps;
    tail.eps_const = get_number(j, ctx, "eps");
  } else {
    fail(ctx, "unknown low-extrapolation kind '" + kind +
                  "' (expected drude | plasma | constant)");
  }
  return tail;
}

json low_tail_to_json(const LowTail& tail) {
  json j;
  switch (tail.kind) {
    case LowTailKind::DrudeTail:
      j["kind"] = "drude";
      j["omega_p_eV"] = tail.omega_p / kEv;
      j["gamma_eV"] = tail.gamma / kEv;
      break;
    case LowTailKind::PlasmaTail:
      j["kind"] = "plasma";
      j["omega_p_eV"] = tail.omega_p / kEv;
      break;
    case LowTailKind::ConstantEps:
      j["kind"] = "constant";
      j["eps"] = tail.eps_const;
      break;
  }
  return j;
}

MaterialModel preset_material(const std::string& name, const std::string& ctx) {
  if (name == "vacuum") return MaterialModel::vacuum();
  if (name == "gold-drude") return make_metal(gold_params(), MetalApproach::Drude);
  if (name == "gold-plasma")
    return make_metal(gold_params(), MetalApproach::Plasma);
  if (name == "nickel-drude")
    return make_metal(nickel_params(), MetalApproach::Drude);
  if (name == "nickel-plasma")
    return make_metal(nickel_params(), MetalApproach::Plasma);
  fail(ctx, "unknown material preset '" + name +
                "' (or path does not end in .json)");
}

RelaxationLaw relaxation_from_json(const json& j, const std::string& ctx) {
  RelaxationLaw law;
  law.gamma_ref = get_number(j, ctx, "gamma_eV") * kEv;
  law.t_ref = get_number_or(j, ctx, "gamma_T_ref_K", 300.0);
  law.exponent = get_number_or(j, ctx, "gamma_exponent", 1.0);
  return law;
}

SpectralTable spectral_table_from_json(const json& perm, const std::string& ctx,
                                       const std::filesystem::path& base_dir) {
  SpectralTable table;
  if (perm.contains("table_csv")) {
    std::filesystem::path p = perm["table_csv"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    table = spectral_table_from_csv(p);
  } else if (perm.contains("table")) {
    const json& t = expect_object(perm["table"], ctx + ".table");
    reject_unknown(t, ctx + ".table", {"omega_eV", "im_eps"});
    for (double w : get_number_array(t, ctx + ".table", "omega_eV"))
      table.omega.push_back(w * kEv);
    table.im_eps = get_number_array(t, ctx + ".table", "im_eps");
  } else {
    fail(ctx, "tabulated variant needs 'table' or 'table_csv'");
  }
  if (perm.contains("low_extrapolation"))
    table.low_tail =
        low_tail_from_json(perm["low_extrapolation"], ctx + ".low_extrapolation");
  if (perm.contains("high_decay_exponent")) {
    if (!perm["high_decay_exponent"].is_number())
      fail(ctx, "'high_decay_exponent' must be a number");
    table.high_decay_exponent = perm["high_decay_exponent"].get<double>();
  }
  if (perm.contains("cache")) {
    const json& c = expect_object(perm["cache"], ctx + ".cache");
    reject_unknown(c, ctx + ".cache", {"T_K", "xi_rad_s", "eps"});
    table.cache_xi = get_number_array(c, ctx + ".cache", "xi_rad_s");
    table.cache_eps = get_number_array(c, ctx + ".cache", "eps");
  }
  return table;
}

}  // namespace

MaterialModel material_from_json(const json& j,
                                 const std::filesystem::path& base_dir) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.size() > 5 && s.substr(s.size() - 5) == ".json") {
      std::filesystem::path p = s;
      if (p.is_relative()) p = base_dir / p;
      return load_material(p);
    }
    return preset_material(s, "material");
  }
  const std::string ctx = "material";
  expect_object(j, ctx);
  reject_unknown(j, ctx, {"name", "mu0", "permittivity"});
  const std::string name =
      j.contains("name") ? get_string(j, ctx, "name") : "material";
  const std::string pctx = ctx + ".permittivity";
  const json perm =
      j.contains("permittivity") ? j["permittivity"] : json::object();
  expect_object(perm, pctx);
  const std::string variant =
      j.contains("permittivity") ? get_string(perm, pctx, "variant") : "vacuum";

  MaterialModel m;
  try {
    if (variant == "vacuum") {
      reject_unknown(perm, pctx, {"variant"});
      m = MaterialModel::vacuum();
      m.name = name;
    } else if (variant == "core") {
      reject_unknown(perm, pctx, {"variant", "oscillators"});
      if (!perm.contains("oscillators"))
        fail(pctx, "core variant needs 'oscillators'");
      m = MaterialModel::core_oscillators(
          oscillators_from_json(perm["oscillators"], pctx), name);
    } else if (variant == "dc_dielectric") {
      reject_unknown(perm, pctx,
                     {"variant", "oscillators", "sigma0_rad_s",
                      "sigma_SI_S_per_m"});
      double sigma0 = 0.0;
      if (perm.contains("sigma0_rad_s")) {
        sigma0 = get_number(perm, pctx, "sigma0_rad_s");
      } else if (perm.contains("sigma_SI_S_per_m")) {
        sigma0 = get_number(perm, pctx, "sigma_SI_S_per_m") /
                 (4.0 * M_PI * constants::vacuum_permittivity);
      } else {
        fail(pctx, "dc_dielectric needs 'sigma0_rad_s' or 'sigma_SI_S_per_m'");
      }
      std::vector<Oscillator> core;
      if (perm.contains("oscillators"))
        core = oscillators_from_json(perm["oscillators"], pctx);
      m = MaterialModel::dc_dielectric(std::move(core), sigma0, name);
    } else if (variant == "drude") {
      reject_unknown(perm, pctx,
                     {"variant", "oscillators", "omega_p_eV", "gamma_eV",
                      "gamma_T_ref_K", "gamma_exponent"});
      std::vector<Oscillator> core;
      if (perm.contains("oscillators"))
        core = oscillators_from_json(perm["oscillators"], pctx);
      m = MaterialModel::drude(get_number(perm, pctx, "omega_p_eV") * kEv,
                               relaxation_from_json(perm, pctx),
                               std::move(core), name);
    } else if (variant == "plasma") {
      reject_unknown(perm, pctx, {"variant", "oscillators", "omega_p_eV"});
      std::vector<Oscillator> core;
      if (perm.contains("oscillators"))
        core = oscillators_from_json(perm["oscillators"], pctx);
      m = MaterialModel::plasma(get_number(perm, pctx, "omega_p_eV") * kEv,
                                std::move(core), name);
    } else if (variant == "tabulated") {
      reject_unknown(perm, pctx,
                     {"variant", "table", "table_csv", "low_extrapolation",
                      "high_decay_exponent", "cache"});
      m = MaterialModel::tabulated(
          spectral_table_from_json(perm, pctx, base_dir), name);
    } else {
      fail(pctx, "unknown variant '" + variant + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    fail(ctx + " '" + name + "'", err.what());
  }
  if (j.contains("mu0")) m.permeability.mu0 = get_number(j, ctx, "mu0");
  if (!(m.permeability.mu0 > 0.0)) fail(ctx, "'mu0' must be > 0");
  return m;
}

json material_to_json(const MaterialModel& m) {
  json j;
  j["name"] = m.name;
  if (m.permeability.mu0 != 1.0) j["mu0"] = m.permeability.mu0;
  json perm;
  switch (m.kind) {
    case MaterialModel::Kind::Vacuum:
      perm["variant"] = "vacuum";
      break;
    case MaterialModel::Kind::CoreOscillators:
      perm["variant"] = "core";
      perm["oscillators"] = oscillators_to_json(m.core);
      break;
    case MaterialModel::Kind::DcDielectric:
      perm["variant"] = "dc_dielectric";
      if (!m.core.empty()) perm["oscillators"] = oscillators_to_json(m.core);
      perm["sigma0_rad_s"] = m.sigma0;
      break;
    case MaterialModel::Kind::Drude:
      perm["variant"] = "drude";
      if (!m.core.empty()) perm["oscillators"] = oscillators_to_json(m.core);
      perm["omega_p_eV"] = m.omega_p / kEv;
      perm["gamma_eV"] = m.relaxation.gamma_ref / kEv;
      perm["gamma_T_ref_K"] = m.relaxation.t_ref;
      perm["gamma_exponent"] = m.relaxation.exponent;
      break;
    case MaterialModel::Kind::Plasma:
      perm["variant"] = "plasma";
      if (!m.core.empty()) perm["oscillators"] = oscillators_to_json(m.core);
      perm["omega_p_eV"] = m.omega_p / kEv;
      break;
    case MaterialModel::Kind::Tabulated: {
      perm["variant"] = "tabulated";
      json t;
      json omega = json::array();
      for (double w : m.table.omega) omega.push_back(w / kEv);
      t["omega_eV"] = std::move(omega);
      t["im_eps"] = m.table.im_eps;
      perm["table"] = std::move(t);
      if (m.table.low_tail)
        perm["low_extrapolation"] = low_tail_to_json(*m.table.low_tail);
      if (m.table.high_decay_exponent)
        perm["high_decay_exponent"] = *m.table.high_decay_exponent;
      if (!m.table.cache_xi.empty()) {
        json c;
        c["T_K"] = 300.0;
        c["xi_rad_s"] = m.table.cache_xi;
        c["eps"] = m.table.cache_eps;
        perm["cache"] = std::move(c);
      }
      break;
    }
  }
  j["permittivity"] = std::move(perm);
  return j;
}

MaterialModel load_material(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open material file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ConfigError("material file " + path.string() + ": " + err.what());
  }
  return material_from_json(j, path.parent_path());
}

SpectralTable spectral_table_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectral data file " + path.string());
  const std::string ctx = "spectral data " + path.string();
  std::string line;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    const auto last = s.find_last_not_of(ws);
    s.erase(last == std::string::npos ? 0 : last + 1);
    return s;
  };
  if (!std::getline(in, line)) fail(ctx, "empty file");
  if (trim(line) != "omega_eV,im_eps")
    fail(ctx, "row 1: header must be 'omega_eV,im_eps'");
  SpectralTable table;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto comma = stripped.find(',');
    if (comma == std::string::npos)
      fail(ctx, "row " + std::to_string(row) + ": expected two comma-separated values");
    std::size_t used = 0;
    double omega = 0.0, im = 0.0;
    try {
      omega = std::stod(stripped.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing characters");
      const std::string rest = trim(stripped.substr(comma + 1));
      im = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail(ctx, "row " + std::to_string(row) + ": malformed number");
    }
    table.omega.push_back(omega * kEv);
    table.im_eps.push_back(im);
  }
  try {
    validate_spectral_table(table);
  } catch (const std::exception& err) {
    fail(ctx, err.what());
  }
  return table;
}

Body body_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string() && j.get<std::string>() == "ideal-metal")
    return Body::ideal_metal();
  if (j.is_string() || j.is_object()) {
    const std::string ctx = "body";
    // a bare material object (or preset/path string) means a plain semispace
    const bool bare_material =
        j.is_string() ||
        (!j.contains("material") && !j.contains("layers") &&
         !j.contains("graphene"));
    json obj = bare_material ? json{{"material", j}} : j;
    reject_unknown(obj, ctx, {"material", "layers", "graphene"});
    if (!obj.contains("material")) fail(ctx, "missing key 'material'");
    LayeredBody body =
        LayeredBody::semispace(material_from_json(obj["material"], base_dir));
    if (obj.contains("layers")) {
      const json& layers = obj["layers"];
      if (!layers.is_array()) fail(ctx, "'layers' must be an array");
      int i = 0;
      for (const json& lj : layers) {
        const std::string lctx = ctx + ".layers[" + std::to_string(i++) + "]";
        expect_object(lj, lctx);
        reject_unknown(lj, lctx, {"material", "thickness_nm"});
        if (!lj.contains("material")) fail(lctx, "missing key 'material'");
        Layer layer;
        layer.material = material_from_json(lj["material"], base_dir);
        layer.thickness = get_number(lj, lctx, "thickness_nm") * 1e-9;
        if (!(layer.thickness > 0.0)) fail(lctx, "'thickness_nm' must be > 0");
        body.layers.push_back(std::move(layer));
      }
    }
    if (obj.contains("graphene")) {
      const std::string gctx = ctx + ".graphene";
      const json& gj = expect_object(obj["graphene"], gctx);
      reject_unknown(gj, gctx, {"provider", "params"});
      const std::string provider = get_string(gj, gctx, "provider");
      try {
        body.graphene = make_pi_provider(
            provider, gj.contains("params") ? gj["params"] : json::object());
      } catch (const std::exception& err) {
        fail(gctx, err.what());
      }
    }
    return Body::layered(std::move(body));
  }
  throw ConfigError("body: expected an object or the string \"ideal-metal\"");
}

// --- run configurations ----------------------------------------------------

const char* to_string(RunKind kind) {
  switch (kind) {
    case RunKind::FreeEnergy: return "free-energy";
    case RunKind::Pressure: return "pressure";
    case RunKind::Gradient: return "gradient";
    case RunKind::Entropy: return "entropy";
    case RunKind::Compare: return "compare";
    case RunKind::DiffForce: return "diff-force";
    case RunKind::Nernst: return "nernst";
    case RunKind::GrapheneRatio: return "graphene-ratio";
  }
  return "unknown";
}

RunKind run_kind_from_string(const std::string& s) {
  for (RunKind k :
       {RunKind::FreeEnergy, RunKind::Pressure, RunKind::Gradient,
        RunKind::Entropy, RunKind::Compare, RunKind::DiffForce, RunKind::Nernst,
        RunKind::GrapheneRatio})
    if (s == to_string(k)) return k;
  throw ConfigError(
      "unknown computation kind '" + s +
      "' (expected free-energy | pressure | gradient | entropy | compare | "
      "diff-force | nernst | graphene-ratio)");
}

namespace {

bool needs_radius(RunKind kind) {
  return kind == RunKind::Gradient || kind == RunKind::Compare ||
         kind == RunKind::DiffForce;
}

bool needs_bodies(RunKind kind) {
  return kind == RunKind::FreeEnergy || kind == RunKind::Pressure ||
         kind == RunKind::Gradient || kind == RunKind::Entropy ||
         kind == RunKind::Nernst;
}

QuadratureSpec quadrature_from_normalized(const json& q) {
  QuadratureSpec spec;
  spec.integral_rel_tol = q["integral_rel_tol"].get<double>();
  spec.matsubara_rel_tol = q["matsubara_rel_tol"].get<double>();
  spec.max_matsubara = q["max_matsubara"].get<int>();
  spec.max_evals = q["max_evals"].get<long>();
  return spec;
}

MetalParams metal_params_from_json(const json& j, const std::string& ctx) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "gold") return gold_params();
    if (s == "nickel") return nickel_params();
    fail(ctx, "unknown metal preset '" + s + "' (expected gold | nickel)");
  }
  expect_object(j, ctx);
  reject_unknown(j, ctx,
                 {"name", "omega_p_eV", "gamma_eV", "gamma_T_ref_K",
                  "gamma_exponent", "mu0"});
  MetalParams p;
  p.omega_p = get_number(j, ctx, "omega_p_eV") * kEv;
  p.relaxation = relaxation_from_json(j, ctx);
  p.mu0 = get_number_or(j, ctx, "mu0", 1.0);
  p.name = j.contains("name") ? get_string(j, ctx, "name") : "metal";
  return p;
}

}  // namespace

RunConfig parse_run_config(const json& j,
                           const std::filesystem::path& base_dir) {
  const std::string ctx = "config";
  expect_object(j, ctx);
  reject_unknown(j, ctx,
                 {"kind", "geometry", "quadrature", "body1", "body2", "entropy",
                  "compare", "diff_force", "nernst", "graphene_ratio"});
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.kind = run_kind_from_string(get_string(j, ctx, "kind"));
  json n;
  n["kind"] = to_string(cfg.kind);
  auto& defaults = cfg.defaults_applied;

  // geometry
  {
    const std::string gctx = ctx + ".geometry";
    if (!j.contains("geometry")) fail(ctx, "missing key 'geometry'");
    const json& g = expect_object(j["geometry"], gctx);
    reject_unknown(g, gctx, {"a_nm", "T_K", "R_um"});
    json ng;
    const std::vector<double> a_nm = get_number_array(g, gctx, "a_nm");
    for (double a : a_nm)
      if (!(a > 0.0)) fail(gctx, "'a_nm' entries must be > 0");
    ng["a_nm"] = a_nm;
    if (cfg.kind == RunKind::Nernst) {
      if (g.contains("T_K"))
        fail(gctx, "'T_K' conflicts with nernst.T_sequence_K");
    } else {
      const std::vector<double> t_k = get_number_array(g, gctx, "T_K");
      for (double t : t_k)
        if (!(t > 0.0)) fail(gctx, "'T_K' entries must be > 0");
      ng["T_K"] = t_k;
    }
    if (needs_radius(cfg.kind)) {
      const double r_um = get_number(g, gctx, "R_um");
      if (!(r_um > 0.0)) fail(gctx, "'R_um' must be > 0");
      ng["R_um"] = r_um;
    } else if (g.contains("R_um")) {
      fail(gctx, std::string("'R_um' is not used by kind ") +
                     to_string(cfg.kind));
    }
    n["geometry"] = std::move(ng);
  }

  // quadrature
  {
    const std::string qctx = ctx + ".quadrature";
    const json q = j.contains("quadrature")
                       ? expect_object(j["quadrature"], qctx)
                       : json::object();
    reject_unknown(q, qctx,
                   {"integral_rel_tol", "matsubara_rel_tol", "max_matsubara",
                    "max_evals"});
    json nq;
    const QuadratureSpec ref;
    nq["integral_rel_tol"] =
        get_number_or(q, qctx, "integral_rel_tol", ref.integral_rel_tol,
                      &defaults);
    nq["matsubara_rel_tol"] =
        get_number_or(q, qctx, "matsubara_rel_tol", ref.matsubara_rel_tol,
                      &defaults);
    nq["max_matsubara"] = static_cast<int>(get_number_or(
        q, qctx, "max_matsubara", ref.max_matsubara, &defaults));
    nq["max_evals"] = static_cast<long>(
        get_number_or(q, qctx, "max_evals",
                      static_cast<double>(ref.max_evals), &defaults));
    n["quadrature"] = std::move(nq);
  }

  // bodies
  if (needs_bodies(cfg.kind)) {
    if (!j.contains("body1")) fail(ctx, "missing key 'body1'");
    n["body1"] = j["body1"];
    if (j.contains("body2")) {
      n["body2"] = j["body2"];
    } else {
      n["body2"] = j["body1"];
      defaults.push_back(ctx + ".body2 = body1");
    }
  } else {
    for (const char* key : {"body1", "body2"})
      if (j.contains(key))
        fail(ctx, std::string("'") + key + "' is not used by kind " +
                      to_string(cfg.kind));
  }

  // kind-specific sections
  switch (cfg.kind) {
    case RunKind::Entropy: {
      const std::string ectx = ctx + ".entropy";
      const json e = j.contains("entropy") ? expect_object(j["entropy"], ectx)
                                           : json::object();
      reject_unknown(e, ectx, {"delta_T_K"});
      json ne;
      ne["delta_T_K"] = get_number_or(e, ectx, "delta_T_K", 0.0, &defaults);
      n["entropy"] = std::move(ne);
      break;
    }
    case RunKind::Compare: {
      const std::string cctx = ctx + ".compare";
      const json c = j.contains("compare") ? expect_object(j["compare"], cctx)
                                           : json::object();
      reject_unknown(c, cctx, {"metal"});
      json nc;
      if (c.contains("metal")) {
        nc["metal"] = c["metal"];
      } else {
        nc["metal"] = "gold";
        defaults.push_back(cctx + ".metal = gold");
      }
      metal_params_from_json(nc["metal"], cctx + ".metal");
      n["compare"] = std::move(nc);
      break;
    }
    case RunKind::DiffForce: {
      const std::string dctx = ctx + ".diff_force";
      if (!j.contains("diff_force")) fail(ctx, "missing key 'diff_force'");
      const json& d = expect_object(j["diff_force"], dctx);
      const std::string scheme = get_string(d, dctx, "scheme");
      json nd;
      nd["scheme"] = scheme;
      if (scheme == "magnetic-stripes") {
        reject_unknown(d, dctx, {"scheme", "overlayer_d_nm", "approach"});
        const double d_nm = get_number(d, dctx, "overlayer_d_nm");
        if (!(d_nm > 0.0)) fail(dctx, "'overlayer_d_nm' must be > 0");
        nd["overlayer_d_nm"] = d_nm;
        std::string approach = "drude";
        if (d.contains("approach")) {
          approach = get_string(d, dctx, "approach");
          if (approach != "drude" && approach != "plasma")
            fail(dctx, "'approach' must be drude or plasma");
        } else {
          defaults.push_back(dctx + ".approach = drude");
        }
        nd["approach"] = approach;
      } else if (scheme == "optical-modulation") {
        reject_unknown(d, dctx,
                       {"scheme", "sphere", "plate_bright", "plate_dark"});
        for (const char* key : {"sphere", "plate_bright", "plate_dark"}) {
          if (!d.contains(key))
            fail(dctx, std::string("missing key '") + key + "'");
          nd[key] = d[key];
        }
      } else {
        fail(dctx, "unknown scheme '" + scheme +
                       "' (expected magnetic-stripes | optical-modulation)");
      }
      n["diff_force"] = std::move(nd);
      break;
    }
    case RunKind::Nernst: {
      const std::string nctx = ctx + ".nernst";
      if (!j.contains("nernst")) fail(ctx, "missing key 'nernst'");
      const json& s = expect_object(j["nernst"], nctx);
      reject_unknown(s, nctx, {"T_sequence_K"});
      const std::vector<double> seq = get_number_array(s, nctx, "T_sequence_K");
      if (seq.size() < 4)
        fail(nctx, "'T_sequence_K' needs at least 4 temperatures");
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!(seq[i] > 0.0)) fail(nctx, "'T_sequence_K' entries must be > 0");
        if (i > 0 && !(seq[i] < seq[i - 1]))
          fail(nctx, "'T_sequence_K' must be strictly descending");
      }
      json ns;
      ns["T_sequence_K"] = seq;
      n["nernst"] = std::move(ns);
      break;
    }
    case RunKind::GrapheneRatio: {
      const std::string gctx = ctx + ".graphene_ratio";
      if (!j.contains("graphene_ratio"))
        fail(ctx, "missing key 'graphene_ratio'");
      const json& g = expect_object(j["graphene_ratio"], gctx);
      reject_unknown(g, gctx, {"plate", "provider", "params"});
      if (!g.contains("plate")) fail(gctx, "missing key 'plate'");
      json ng;
      ng["plate"] = g["plate"];
      ng["provider"] = get_string(g, gctx, "provider");
      if (g.contains("params")) {
        ng["params"] = g["params"];
      } else {
        ng["params"] = json::object();
        defaults.push_back(gctx + ".params = {}");
      }
      n["graphene_ratio"] = std::move(ng);
      break;
    }
    default: {
      for (const char* key : {"entropy", "compare", "diff_force", "nernst",
                              "graphene_ratio"})
        if (j.contains(key))
          fail(ctx, std::string("'") + key + "' is not used by kind " +
                        to_string(cfg.kind));
      break;
    }
  }

  cfg.normalized = std::move(n);
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ConfigError("config file " + path.string() + ": " + err.what());
  }
  return parse_run_config(j, path.parent_path());
}

json run_config_to_json(const RunConfig& config) { return config.normalized; }

void validate_run_config(const RunConfig& config) {
  const json& n = config.normalized;
  // materialize everything once so malformed nested objects fail here, not
  // mid-sweep
  if (needs_bodies(config.kind)) {
    body_from_json(n["body1"], config.base_dir);
    body_from_json(n["body2"], config.base_dir);
  }
  if (config.kind == RunKind::Compare)
    metal_params_from_json(n["compare"]["metal"], "config.compare.metal");
  if (config.kind == RunKind::DiffForce &&
      n["diff_force"]["scheme"] == "optical-modulation") {
    body_from_json(n["diff_force"]["sphere"], config.base_dir);
    material_from_json(n["diff_force"]["plate_bright"], config.base_dir);
    material_from_json(n["diff_force"]["plate_dark"], config.base_dir);
  }
  if (config.kind == RunKind::GrapheneRatio) {
    material_from_json(n["graphene_ratio"]["plate"], config.base_dir);
    try {
      make_pi_provider(n["graphene_ratio"]["provider"].get<std::string>(),
                       n["graphene_ratio"]["params"]);
    } catch (const std::exception& err) {
      fail("config.graphene_ratio", err.what());
    }
  }
  QuadratureSpec spec = quadrature_from_normalized(n["quadrature"]);
  if (!(spec.integral_rel_tol > 0.0 && spec.integral_rel_tol < 1.0) ||
      !(spec.matsubara_rel_tol > 0.0 && spec.matsubara_rel_tol < 1.0) ||
      spec.max_matsubara <= 0 || spec.max_evals <= 0)
    fail("config.quadrature", "tolerances must be in (0, 1) and caps positive");
}

// --- execution -------------------------------------------------------------

namespace {

using Row = std::vector<std::string>;

void run_jobs(std::size_t count, int threads,
              const std::function<void(std::size_t)>& job) {
  if (threads < 1) threads = 1;
  threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Row base_row(double a, double t, const LifshitzResult& r,
             const std::string& status) {
  return {fmt_g(a),
          fmt_g(t),
          fmt_g(r.value),
          r.unit,
          std::to_string(r.l_max),
          fmt_g(r.remainder_estimate),
          std::to_string(r.evals),
          status};
}

struct Grid {
  std::vector<double> a;  // m
  std::vector<double> t;  // K

  std::size_t size() const { return a.size() * t.size(); }
  double a_at(std::size_t i) const { return a[i / t.size()]; }
  double t_at(std::size_t i) const { return t[i % t.size()]; }
};

Grid grid_from_normalized(const json& n, bool with_t) {
  Grid g;
  for (const json& v : n["geometry"]["a_nm"]) g.a.push_back(v.get<double>() * 1e-9);
  if (with_t)
    for (const json& v : n["geometry"]["T_K"]) g.t.push_back(v.get<double>());
  else
    g.t.push_back(0.0);
  return g;
}

}  // namespace

std::string RunOutput::csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

RunOutput run_sweep(const RunConfig& config, int threads) {
  validate_run_config(config);
  const json& n = config.normalized;
  const QuadratureSpec spec = quadrature_from_normalized(n["quadrature"]);
  const std::vector<std::string> base_header = {
      "a_m", "T_K",           "value", "unit",
      "l_max", "remainder_est", "evals", "status"};

  RunOutput out;
  out.header = base_header;
  const RunKind kind = config.kind;
  const double radius =
      needs_radius(kind) ? n["geometry"]["R_um"].get<double>() * 1e-6 : 0.0;

  std::vector<std::vector<Row>> results;
  auto flatten = [&] {
    for (auto& rows : results)
      for (auto& row : rows) out.rows.push_back(std::move(row));
  };

  switch (kind) {
    case RunKind::FreeEnergy:
    case RunKind::Pressure:
    case RunKind::Gradient:
    case RunKind::Entropy: {
      if (kind == RunKind::Gradient) out.header.push_back("R_m");
      const Body body1 = body_from_json(n["body1"], config.base_dir);
      const Body body2 = body_from_json(n["body2"], config.base_dir);
      const double delta_t =
          kind == RunKind::Entropy ? n["entropy"]["delta_T_K"].get<double>()
                                   : 0.0;
      const Grid grid = grid_from_normalized(n, true);
      results.resize(grid.size());
      run_jobs(grid.size(), threads, [&](std::size_t i) {
        const GeometryThermal g{grid.a_at(i), grid.t_at(i)};
        LifshitzResult r;
        std::string status = "ok";
        try {
          switch (kind) {
            case RunKind::FreeEnergy:
              r = free_energy(body1, body2, g, spec);
              break;
            case RunKind::Pressure:
              r = casimir_pressure(body1, body2, g, spec);
              break;
            case RunKind::Gradient:
              r = force_gradient_sphere_plate(body1, body2, radius, g, spec);
              break;
            default:
              r = casimir_entropy(body1, body2, g, spec, delta_t);
              break;
          }
        } catch (const EntropyStepError& err) {
          r = err.partial;
          status = "entropy-step-too-large";
        } catch (const ConvergenceError& err) {
          r = err.partial;
          status = "convergence-failure";
        }
        Row row = base_row(g.separation, g.temperature, r, status);
        if (kind == RunKind::Gradient) row.push_back(fmt_g(radius));
        results[i].push_back(std::move(row));
      });
      break;
    }
    case RunKind::Compare: {
      out.header.insert(out.header.end(),
                        {"gradient_plasma_N_per_m", "larger",
                         "rel_diff_percent", "R_m"});
      const MetalParams metal =
          metal_params_from_json(n["compare"]["metal"], "config.compare.metal");
      const Grid grid = grid_from_normalized(n, true);
      results.resize(grid.size());
      run_jobs(grid.size(), threads, [&](std::size_t i) {
        const std::vector<ComparisonRow> rows = drude_plasma_comparison(
            metal, radius, {grid.a_at(i)}, grid.t_at(i), spec);
        const ComparisonRow& c = rows.front();
        LifshitzResult r = c.drude_diag;
        r.value = c.gradient_drude;
        r.unit = "N/m";
        r.l_max = std::max(r.l_max, c.plasma_diag.l_max);
        r.remainder_estimate =
            std::max(r.remainder_estimate, c.plasma_diag.remainder_estimate);
        r.evals += c.plasma_diag.evals;
        Row row = base_row(grid.a_at(i), grid.t_at(i), r, c.status);
        row.insert(row.end(),
                   {fmt_g(c.gradient_plasma), c.larger,
                    fmt_g(c.rel_diff_percent), fmt_g(radius)});
        results[i].push_back(std::move(row));
      });
      break;
    }
    case RunKind::DiffForce: {
      out.header.insert(out.header.end(), {"scheme", "approach", "R_m"});
      const json& d = n["diff_force"];
      const std::string scheme = d["scheme"].get<std::string>();
      const Grid grid = grid_from_normalized(n, true);
      results.resize(grid.size());
      if (scheme == "magnetic-stripes") {
        const double overlayer =
            d["overlayer_d_nm"].get<double>() * 1e-9;
        const std::string approach_name = d["approach"].get<std::string>();
        const MetalApproach approach = approach_name == "plasma"
                                           ? MetalApproach::Plasma
                                           : MetalApproach::Drude;
        run_jobs(grid.size(), threads, [&](std::size_t i) {
          LifshitzResult r;
          std::string status = "ok";
          try {
            r.value = differential_force_magnetic_stripes(
                radius, overlayer, grid.a_at(i), grid.t_at(i), approach, spec,
                gold_params(), nickel_params(), &r);
          } catch (const ConvergenceError& err) {
            r = err.partial;
            status = "convergence-failure";
          }
          r.unit = "N";
          Row row = base_row(grid.a_at(i), grid.t_at(i), r, status);
          row.insert(row.end(), {scheme, approach_name, fmt_g(radius)});
          results[i].push_back(std::move(row));
        });
      } else {
        const Body sphere = body_from_json(d["sphere"], config.base_dir);
        const MaterialModel bright =
            material_from_json(d["plate_bright"], config.base_dir);
        const MaterialModel dark =
            material_from_json(d["plate_dark"], config.base_dir);
        run_jobs(grid.size(), threads, [&](std::size_t i) {
          LifshitzResult r;
          std::string status = "ok";
          try {
            r.value = differential_force_optical_modulation(
                sphere, bright, dark, radius, grid.a_at(i), grid.t_at(i), spec,
                &r);
          } catch (const ConvergenceError& err) {
            r = err.partial;
            status = "convergence-failure";
          }
          r.unit = "N";
          Row row = base_row(grid.a_at(i), grid.t_at(i), r, status);
          row.insert(row.end(), {scheme, "-", fmt_g(radius)});
          results[i].push_back(std::move(row));
        });
      }
      break;
    }
    case RunKind::Nernst: {
      out.header.insert(out.header.end(), {"classification", "s0_estimate"});
      const Body body1 = body_from_json(n["body1"], config.base_dir);
      const Body body2 = body_from_json(n["body2"], config.base_dir);
      std::vector<double> seq;
      for (const json& v : n["nernst"]["T_sequence_K"])
        seq.push_back(v.get<double>());
      const Grid grid = grid_from_normalized(n, false);
      results.resize(grid.a.size());
      run_jobs(grid.a.size(), threads, [&](std::size_t i) {
        const double a = grid.a[i];
        try {
          const NernstScan scan =
              nernst_entropy_scan(body1, body2, a, seq, spec);
          for (std::size_t k = 0; k < scan.temperatures.size(); ++k) {
            LifshitzResult r;
            r.value = scan.entropies[k];
            r.unit = "J/(K m^2)";
            Row row = base_row(a, scan.temperatures[k], r, "ok");
            row.insert(row.end(), {to_string(scan.classification),
                                   fmt_g(scan.s0_estimate)});
            results[i].push_back(std::move(row));
          }
        } catch (const ConvergenceError& err) {
          Row row = base_row(a, seq.front(), err.partial,
                             "convergence-failure");
          row.insert(row.end(), {to_string(EntropyLimitClass::Inconclusive),
                                 fmt_g(0.0)});
          results[i].push_back(std::move(row));
        }
      });
      break;
    }
    case RunKind::GrapheneRatio: {
      out.header.push_back("provider");
      const json& g = n["graphene_ratio"];
      const MaterialModel plate =
          material_from_json(g["plate"], config.base_dir);
      const std::string provider_name = g["provider"].get<std::string>();
      const PiProviderPtr provider =
          make_pi_provider(provider_name, g["params"]);
      const Grid grid = grid_from_normalized(n, true);
      results.resize(grid.size());
      run_jobs(grid.size(), threads, [&](std::size_t i) {
        LifshitzResult r;
        std::string status = "ok";
        try {
          r.value = graphene_pressure_ratio(plate, provider, grid.a_at(i),
                                            grid.t_at(i), spec, &r);
        } catch (const ConvergenceError& err) {
          r = err.partial;
          status = "convergence-failure";
        }
        r.unit = "1";
        Row row = base_row(grid.a_at(i), grid.t_at(i), r, status);
        row.push_back(provider_name);
        results[i].push_back(std::move(row));
      });
      break;
    }
  }

  flatten();
  out.provenance["schema_version"] = 1;
  out.provenance["generator"] = "lifshitz";
  out.provenance["config"] = n;
  out.provenance["defaults_applied"] = config.defaults_applied;
  out.provenance["columns"] = out.header;
  return out;
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp.string());
    f << data;
    f.flush();
    if (!f) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_outputs(const RunOutput& output,
                   const std::filesystem::path& out_path) {
  atomic_write(out_path, output.csv());
  std::filesystem::path sidecar = out_path;
  sidecar += ".provenance.json";
  atomic_write(sidecar, output.provenance.dump(2) + "\n");
}

// --- ingestion -------------------------------------------------------------

void ingest_optical_data(const std::filesystem::path& csv_path,
                         const json& extrapolation,
                         const std::filesystem::path& out_path,
                         const std::string& name, int cache_l_max,
                         double cache_temperature) {
  SpectralTable table = spectral_table_from_csv(csv_path);
  const std::string ctx = "extrapolation";
  expect_object(extrapolation, ctx);
  reject_unknown(extrapolation, ctx, {"low", "high_decay_exponent"});
  if (extrapolation.contains("low"))
    table.low_tail = low_tail_from_json(extrapolation["low"], ctx + ".low");
  if (extrapolation.contains("high_decay_exponent")) {
    if (!extrapolation["high_decay_exponent"].is_number())
      fail(ctx, "'high_decay_exponent' must be a number");
    table.high_decay_exponent =
        extrapolation["high_decay_exponent"].get<double>();
  }

  // probe once so missing-policy errors surface at ingest time
  try {
    (void)kramers_kronig_transform(table, table.omega.front());
  } catch (const std::exception& err) {
    fail("spectral data " + csv_path.string(), err.what());
  }

  if (cache_l_max < 0) fail(ctx, "cache_l_max must be >= 0");
  if (!(cache_temperature > 0.0)) fail(ctx, "cache temperature must be > 0");
  for (int l = 1; l <= cache_l_max; ++l) {
    const double xi = matsubara_frequency(l, cache_temperature);
    const double eps = kramers_kronig_transform(table, xi);
    table.cache_xi.push_back(xi);
    table.cache_eps.push_back(eps);
  }

  MaterialModel m = MaterialModel::tabulated(std::move(table), name);
  json j = material_to_json(m);
  if (j["permittivity"].contains("cache"))
    j["permittivity"]["cache"]["T_K"] = cache_temperature;
  atomic_write(out_path, j.dump(2) + "\n");
}

}  // namespace lifshitz::io
