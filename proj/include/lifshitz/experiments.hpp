#pragma once

#include <vector>

#include "lifshitz/core.hpp"

namespace lifshitz {

/// Shared free-electron parameters of a metal; the Drude/plasma split is the
/// low-frequency treatment applied on top of them.
struct MetalParams {
  std::vector<Oscillator> core;
  double omega_p = 0.0;  // rad/s
  RelaxationLaw relaxation;
  double mu0 = 1.0;
  std::string name = "metal";
};

enum class MetalApproach { Drude, Plasma };

MaterialModel make_metal(const MetalParams& params, MetalApproach approach);

/// Conventional handbook defaults (omega_p = 9.0 eV, gamma = 0.035 eV at
/// 300 K for gold; omega_p = 4.89 eV, gamma = 0.0436 eV, mu0 = 110 for
/// nickel). Configuration defaults, not ground truth.
MetalParams gold_params();
MetalParams nickel_params();

struct OscillatorProbe {
  double omega0 = 0.0;           // rad/s
  double spring_constant = 0.0;  // N/m
};

struct PfaForce {
  double force = 0.0;                 // N
  double relative_error_bound = 0.0;  // a / R
};

/// F = 2 pi R F(a,T), with the PFA error bound a/R attached.
PfaForce pfa_sphere_plate_force(double free_energy_per_area, double radius,
                                double separation);

/// P = -(1 / 2 pi R) dF/da
double pressure_from_gradient(double gradient, double radius);

/// Delta omega = -(omega0 / 2k) dF/da
double frequency_shift(const OscillatorProbe& probe, double gradient);

struct ComparisonRow {
  double separation = 0.0;
  double gradient_drude = 0.0;   // N/m
  double gradient_plasma = 0.0;  // N/m
  std::string larger;            // "drude" | "plasma"
  double rel_diff_percent = 0.0; // |difference| / larger value * 100
  std::string status = "ok";
  LifshitzResult drude_diag;
  LifshitzResult plasma_diag;
};

/// Sphere-plate force gradients for the same metal under both low-frequency
/// treatments. Convergence failures are recorded per separation.
std::vector<ComparisonRow> drude_plasma_comparison(
    const MetalParams& metal, double radius,
    const std::vector<double>& separations, double temperature,
    const QuadratureSpec& spec);

/// F_diff = F_mm - F_dm for an optically modulated plate (illuminated,
/// carrier-inclusive vs dark, carrier-free states) against the same sphere.
double differential_force_optical_modulation(const Body& sphere,
                                             const MaterialModel& plate_bright,
                                             const MaterialModel& plate_dark,
                                             double radius, double separation,
                                             double temperature,
                                             const QuadratureSpec& spec,
                                             LifshitzResult* diagnostics = nullptr);

/// F_diff = F_NiAuNi - F_NiAu: Ni sphere against a gold overlayer on a Ni
/// substrate minus the same sphere against semi-infinite gold.
double differential_force_magnetic_stripes(double radius, double overlayer_d,
                                           double separation, double temperature,
                                           MetalApproach approach,
                                           const QuadratureSpec& spec,
                                           const MetalParams& gold = gold_params(),
                                           const MetalParams& nickel = nickel_params(),
                                           LifshitzResult* diagnostics = nullptr);

enum class EntropyLimitClass { Zero, NegativeNonzero, PositiveNonzero, Inconclusive };

struct NernstScan {
  std::vector<double> temperatures;
  std::vector<double> entropies;
  double s0_estimate = 0.0;
  double s0_stderr = 0.0;
  EntropyLimitClass classification = EntropyLimitClass::Inconclusive;
};

const char* to_string(EntropyLimitClass cls);

/// Classification of the T -> 0 entropy limit from a descending sequence of
/// computed S(a, T) values: linear fit over the lowest three points, intercept
/// tested against 3x its standard error.
EntropyLimitClass classify_entropy_tail(const std::vector<double>& temperatures,
                                        const std::vector<double>& entropies,
                                        double* s0 = nullptr,
                                        double* stderr_out = nullptr);

NernstScan nernst_entropy_scan(const Body& body1, const Body& body2,
                               double separation,
                               const std::vector<double>& descending_temperatures,
                               const QuadratureSpec& spec);

/// Ratio of the pressure between two graphene-coated plates to the pressure
/// between the bare plates. Exactly 1 when Pi == 0.
double graphene_pressure_ratio(const MaterialModel& plate, PiProviderPtr pi,
                               double separation, double temperature,
                               const QuadratureSpec& spec,
                               LifshitzResult* diagnostics = nullptr);

}  // namespace lifshitz
