#include "lifshitz/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "lifshitz/constants.hpp"

namespace lifshitz {

MaterialModel make_metal(const MetalParams& params, MetalApproach approach) {
  MaterialModel m =
      approach == MetalApproach::Drude
          ? MaterialModel::drude(params.omega_p, params.relaxation, params.core,
                                 params.name + "-drude")
          : MaterialModel::plasma(params.omega_p, params.core,
                                  params.name + "-plasma");
  m.permeability.mu0 = params.mu0;
  return m;
}

MetalParams gold_params() {
  const double ev = constants::ev_to_rad_s;
  const double ev2 = ev * ev;
  MetalParams p;
  // six-oscillator interband fit; the free-electron part comes on top
  p.core = {Oscillator{7.091 * ev2, 3.05 * ev, 0.75 * ev},
            Oscillator{41.46 * ev2, 4.15 * ev, 1.85 * ev},
            Oscillator{2.7 * ev2, 5.4 * ev, 1.0 * ev},
            Oscillator{154.7 * ev2, 8.5 * ev, 7.0 * ev},
            Oscillator{44.55 * ev2, 13.5 * ev, 6.0 * ev},
            Oscillator{309.6 * ev2, 21.5 * ev, 9.0 * ev}};
  p.omega_p = 9.0 * constants::ev_to_rad_s;
  p.relaxation = RelaxationLaw{0.035 * constants::ev_to_rad_s, 300.0, 1.0};
  p.mu0 = 1.0;
  p.name = "gold";
  return p;
}

MetalParams nickel_params() {
  MetalParams p;
  p.omega_p = 4.89 * constants::ev_to_rad_s;
  p.relaxation = RelaxationLaw{0.0436 * constants::ev_to_rad_s, 300.0, 1.0};
  p.mu0 = 110.0;
  p.name = "nickel";
  return p;
}

PfaForce pfa_sphere_plate_force(double free_energy_per_area, double radius,
                                double separation) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  PfaForce f;
  f.force = 2.0 * M_PI * radius * free_energy_per_area;
  f.relative_error_bound = separation / radius;
  return f;
}

double pressure_from_gradient(double gradient, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  return -gradient / (2.0 * M_PI * radius);
}

double frequency_shift(const OscillatorProbe& probe, double gradient) {
  if (!(probe.omega0 > 0.0) || !(probe.spring_constant > 0.0))
    throw std::invalid_argument("oscillator probe parameters must be > 0");
  return -probe.omega0 / (2.0 * probe.spring_constant) * gradient;
}

std::vector<ComparisonRow> drude_plasma_comparison(
    const MetalParams& metal, double radius,
    const std::vector<double>& separations, double temperature,
    const QuadratureSpec& spec) {
  const Body drude = Body::semispace(make_metal(metal, MetalApproach::Drude));
  const Body plasma = Body::semispace(make_metal(metal, MetalApproach::Plasma));
  std::vector<ComparisonRow> rows;
  rows.reserve(separations.size());
  for (double a : separations) {
    ComparisonRow row;
    row.separation = a;
    GeometryThermal g{a, temperature};
    try {
      row.drude_diag = force_gradient_sphere_plate(drude, drude, radius, g, spec);
      row.plasma_diag =
          force_gradient_sphere_plate(plasma, plasma, radius, g, spec);
      row.gradient_drude = row.drude_diag.value;
      row.gradient_plasma = row.plasma_diag.value;
      const bool plasma_larger = row.gradient_plasma > row.gradient_drude;
      row.larger = plasma_larger ? "plasma" : "drude";
      const double larger_value =
          std::max(std::abs(row.gradient_drude), std::abs(row.gradient_plasma));
      row.rel_diff_percent =
          100.0 * std::abs(row.gradient_plasma - row.gradient_drude) /
          std::max(larger_value, 1e-300);
    } catch (const ConvergenceError& err) {
      row.status = std::string("convergence-failure: ") + err.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void merge_diag(LifshitzResult* diag, const LifshitzResult& r) {
  if (!diag) return;
  diag->l_max = std::max(diag->l_max, r.l_max);
  diag->remainder_estimate =
      std::max(diag->remainder_estimate, r.remainder_estimate);
  diag->evals += r.evals;
}

}  // namespace

double differential_force_optical_modulation(const Body& sphere,
                                             const MaterialModel& plate_bright,
                                             const MaterialModel& plate_dark,
                                             double radius, double separation,
                                             double temperature,
                                             const QuadratureSpec& spec,
                                             LifshitzResult* diagnostics) {
  GeometryThermal g{separation, temperature};
  const LifshitzResult f_mm =
      free_energy(sphere, Body::semispace(plate_bright), g, spec);
  const LifshitzResult f_dm =
      free_energy(sphere, Body::semispace(plate_dark), g, spec);
  merge_diag(diagnostics, f_mm);
  merge_diag(diagnostics, f_dm);
  return pfa_sphere_plate_force(f_mm.value, radius, separation).force -
         pfa_sphere_plate_force(f_dm.value, radius, separation).force;
}

double differential_force_magnetic_stripes(double radius, double overlayer_d,
                                           double separation, double temperature,
                                           MetalApproach approach,
                                           const QuadratureSpec& spec,
                                           const MetalParams& gold,
                                           const MetalParams& nickel,
                                           LifshitzResult* diagnostics) {
  if (!(overlayer_d > 0.0))
    throw std::invalid_argument("overlayer thickness must be > 0");
  const MaterialModel au = make_metal(gold, approach);
  const MaterialModel ni = make_metal(nickel, approach);

  const Body sphere = Body::semispace(ni);
  LayeredBody coated = LayeredBody::semispace(ni);
  coated.layers.push_back(Layer{au, overlayer_d});
  const Body plate_coated = Body::layered(coated);
  const Body plate_gold = Body::semispace(au);

  GeometryThermal g{separation, temperature};
  const LifshitzResult f_ni_au_ni = free_energy(sphere, plate_coated, g, spec);
  const LifshitzResult f_ni_au = free_energy(sphere, plate_gold, g, spec);
  merge_diag(diagnostics, f_ni_au_ni);
  merge_diag(diagnostics, f_ni_au);
  return pfa_sphere_plate_force(f_ni_au_ni.value, radius, separation).force -
         pfa_sphere_plate_force(f_ni_au.value, radius, separation).force;
}

const char* to_string(EntropyLimitClass cls) {
  switch (cls) {
    case EntropyLimitClass::Zero: return "Zero";
    case EntropyLimitClass::NegativeNonzero: return "NegativeNonzero";
    case EntropyLimitClass::PositiveNonzero: return "PositiveNonzero";
    case EntropyLimitClass::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

namespace {

// least-squares intercept of S = s0 + b T over the given points, with the
// standard error of the intercept from the fit residuals
void linear_intercept(const std::vector<double>& t, const std::vector<double>& s,
                      double* intercept, double* stderr_out) {
  const std::size_t n = t.size();
  double t_mean = 0.0, s_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t_mean += t[i];
    s_mean += s[i];
  }
  t_mean /= static_cast<double>(n);
  s_mean /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (t[i] - t_mean) * (t[i] - t_mean);
    sxy += (t[i] - t_mean) * (s[i] - s_mean);
  }
  const double slope = sxy / sxx;
  const double a = s_mean - slope * t_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fit = a + slope * t[i];
    ss_res += (s[i] - fit) * (s[i] - fit);
  }
  const double dof = static_cast<double>(n) - 2.0;
  const double variance = dof > 0.0 ? ss_res / dof : 0.0;
  *intercept = a;
  *stderr_out = std::sqrt(variance * (1.0 / static_cast<double>(n) +
                                      t_mean * t_mean / sxx));
}

}  // namespace

EntropyLimitClass classify_entropy_tail(const std::vector<double>& temperatures,
                                        const std::vector<double>& entropies,
                                        double* s0_out, double* stderr_out) {
  if (temperatures.size() != entropies.size() || temperatures.size() < 4)
    throw std::invalid_argument("entropy tail needs >= 4 (T, S) points");
  for (std::size_t i = 1; i < temperatures.size(); ++i)
    if (!(temperatures[i] < temperatures[i - 1]))
      throw std::invalid_argument("temperatures must be strictly descending");

  const std::size_t n = temperatures.size();
  // lowest three points (the sequence is descending)
  std::vector<double> t1(temperatures.end() - 3, temperatures.end());
  std::vector<double> s1(entropies.end() - 3, entropies.end());
  double s0 = 0.0, se = 0.0;
  linear_intercept(t1, s1, &s0, &se);
  if (s0_out) *s0_out = s0;
  if (stderr_out) *stderr_out = se;

  double s_scale = 0.0;
  for (double s : entropies) s_scale = std::max(s_scale, std::abs(s));
  const double numeric_floor = 1e-6 * s_scale + 1e-300;

  const bool nonzero = std::abs(s0) > std::max(3.0 * se, numeric_floor);
  if (!nonzero) return EntropyLimitClass::Zero;

  // stability: the next-lowest window must agree within 20%
  std::vector<double> t2(temperatures.end() - 4, temperatures.end() - 1);
  std::vector<double> s2(entropies.end() - 4, entropies.end() - 1);
  double s0_prev = 0.0, se_prev = 0.0;
  linear_intercept(t2, s2, &s0_prev, &se_prev);
  if (std::abs(s0 - s0_prev) >
      0.2 * std::max(std::abs(s0), std::abs(s0_prev)))
    return EntropyLimitClass::Inconclusive;

  (void)n;
  return s0 < 0.0 ? EntropyLimitClass::NegativeNonzero
                  : EntropyLimitClass::PositiveNonzero;
}

NernstScan nernst_entropy_scan(const Body& body1, const Body& body2,
                               double separation,
                               const std::vector<double>& descending_temperatures,
                               const QuadratureSpec& spec) {
  if (descending_temperatures.size() < 4)
    throw std::invalid_argument("Nernst scan needs at least 4 temperatures");
  NernstScan scan;
  scan.temperatures = descending_temperatures;
  for (double temperature : descending_temperatures) {
    GeometryThermal g{separation, temperature};
    scan.entropies.push_back(
        casimir_entropy(body1, body2, g, spec).value);
  }
  scan.classification = classify_entropy_tail(
      scan.temperatures, scan.entropies, &scan.s0_estimate, &scan.s0_stderr);
  return scan;
}

double graphene_pressure_ratio(const MaterialModel& plate, PiProviderPtr pi,
                               double separation, double temperature,
                               const QuadratureSpec& spec,
                               LifshitzResult* diagnostics) {
  if (!pi) throw std::invalid_argument("polarization tensor provider required");
  GeometryThermal g{separation, temperature};
  LayeredBody coated = LayeredBody::semispace(plate);
  coated.graphene = std::move(pi);
  const Body coated_body = Body::layered(coated);
  const Body bare_body = Body::semispace(plate);
  const LifshitzResult p_gg = casimir_pressure(coated_body, coated_body, g, spec);
  const LifshitzResult p_bare = casimir_pressure(bare_body, bare_body, g, spec);
  merge_diag(diagnostics, p_gg);
  merge_diag(diagnostics, p_bare);
  return p_gg.value / p_bare.value;
}

}  // namespace lifshitz
