#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifshitz {

/// Lorentz oscillator contribution g / (omega^2 + xi^2 + gamma * xi).
/// strength is a squared angular frequency (rad^2/s^2), the others rad/s.
struct Oscillator {
  double strength = 0.0;
  double frequency = 0.0;
  double relaxation = 0.0;
};

/// Temperature-dependent relaxation gamma(T) = gamma_ref * (T / t_ref)^exponent.
/// exponent == 0 means temperature-independent relaxation.
struct RelaxationLaw {
  double gamma_ref = 0.0;  // rad/s
  double t_ref = 300.0;    // K
  double exponent = 1.0;

  double at(double temperature) const;
};

/// mu(i xi_l): mu0 at l == 0, exactly 1 at l >= 1.
struct MagneticLaw {
  double mu0 = 1.0;

  double at(int l) const { return l == 0 ? mu0 : 1.0; }
};

enum class LowTailKind { DrudeTail, PlasmaTail, ConstantEps };

struct LowTail {
  LowTailKind kind = LowTailKind::ConstantEps;
  double omega_p = 0.0;    // rad/s (Drude/Plasma tails)
  double gamma = 0.0;      // rad/s (Drude tail)
  double eps_const = 1.0;  // ConstantEps tail
};

/// Tabulated Im eps(omega) with extrapolation policies beyond the sampled
/// range. omega strictly increasing, Im eps >= 0 (passivity).
struct SpectralTable {
  std::vector<double> omega;   // rad/s, strictly increasing
  std::vector<double> im_eps;  // dimensionless, >= 0
  std::optional<LowTail> low_tail;
  // Im eps(omega) ~ Im eps(omega_max) * (omega_max / omega)^decay for
  // omega > omega_max. Unset means no high-frequency extrapolation.
  std::optional<double> high_decay_exponent;
  // Precomputed eps(i xi) samples (filled by ingestion); consulted before the
  // transform when xi matches a sample to 1e-9 relative.
  std::vector<double> cache_xi;   // rad/s, strictly increasing
  std::vector<double> cache_eps;
};

struct MaterialModel {
  enum class Kind { Vacuum, CoreOscillators, DcDielectric, Drude, Plasma, Tabulated };

  Kind kind = Kind::Vacuum;
  std::string name = "vacuum";
  std::vector<Oscillator> core;
  double sigma0 = 0.0;   // dc conductivity in Gaussian frequency units (rad/s)
  double omega_p = 0.0;  // rad/s
  RelaxationLaw relaxation;
  SpectralTable table;
  MagneticLaw permeability;

  static MaterialModel vacuum();
  static MaterialModel core_oscillators(std::vector<Oscillator> oscillators,
                                        std::string name = "dielectric");
  static MaterialModel dc_dielectric(std::vector<Oscillator> oscillators,
                                     double sigma0,
                                     std::string name = "dc-dielectric");
  static MaterialModel drude(double omega_p, RelaxationLaw relaxation,
                             std::vector<Oscillator> core = {},
                             std::string name = "drude-metal");
  static MaterialModel plasma(double omega_p, std::vector<Oscillator> core = {},
                              std::string name = "plasma-metal");
  static MaterialModel tabulated(SpectralTable table,
                                 std::string name = "tabulated");
};

/// Zero-frequency behavior of eps(i xi): finite limit, C/xi divergence, or
/// omega_p^2/xi^2 divergence. Selects the l = 0 reflection branch.
struct LowFrequencyClass {
  enum class Tag { Finite, InverseXi, InverseXiSquared };

  Tag tag = Tag::Finite;
  // Finite: eps(0); InverseXi: coefficient of 1/xi; InverseXiSquared: omega_p.
  double value = 1.0;
};

/// Evaluating a 1/xi- or 1/xi^2-divergent permittivity at xi = 0.
/// Callers must branch through low_frequency_class instead.
class DivergentZeroFrequencyError : public std::domain_error {
 public:
  explicit DivergentZeroFrequencyError(const std::string& what)
      : std::domain_error(what) {}
};

class SpectralTableError : public std::invalid_argument {
 public:
  explicit SpectralTableError(const std::string& what)
      : std::invalid_argument(what) {}
};

void validate_oscillators(std::span<const Oscillator> oscillators);
void validate_spectral_table(const SpectralTable& table);

/// eps_c(i xi) = 1 + sum_j g_j / (omega_j^2 + xi^2 + gamma_j xi)
double eval_core_permittivity(std::span<const Oscillator> oscillators,
                              double xi);

/// eps(i xi) for any model variant. Throws DivergentZeroFrequencyError when a
/// divergent variant is evaluated at xi = 0.
double eval_permittivity(const MaterialModel& model, double xi,
                         double temperature);

/// Checked overload: verifies xi against the Matsubara frequency of (l, T).
double eval_permittivity(const MaterialModel& model, int l, double temperature,
                         double xi);

LowFrequencyClass low_frequency_class(const MaterialModel& model,
                                      double temperature);

/// eps(i xi) = 1 + (2/pi) Int_0^inf omega Im eps(omega) / (omega^2 + xi^2)
/// from the tabulated range plus closed-form tail contributions.
double kramers_kronig_transform(const SpectralTable& table, double xi);

}  // namespace lifshitz
