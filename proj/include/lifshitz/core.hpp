#pragma once

#include <optional>
#include <string>

#include "lifshitz/matsubara.hpp"
#include "lifshitz/reflection.hpp"

namespace lifshitz {

struct GeometryThermal {
  double separation = 0.0;   // m, > 0
  double temperature = 0.0;  // K, > 0
};

struct QuadratureSpec {
  double integral_rel_tol = 1e-9;
  double matsubara_rel_tol = 1e-9;
  int max_matsubara = 200000;
  long max_evals = 200000000;
};

struct LifshitzResult {
  double value = 0.0;
  std::string unit;
  int l_max = 0;                  // highest Matsubara index actually used
  double remainder_estimate = 0;  // estimated truncation remainder
  long evals = 0;                 // integrand evaluations
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, LifshitzResult partial)
      : std::runtime_error(what), partial(std::move(partial)) {}
  LifshitzResult partial;
};

class EntropyStepError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// A reflecting body as seen from vacuum: a layered body, or the ideal-metal
/// limit with both reflection coefficients forced to unity.
class Body {
 public:
  static Body semispace(MaterialModel material);
  static Body layered(LayeredBody body);
  static Body ideal_metal();

  ReflectionPair reflect(const WaveSlot& slot) const;
  bool is_ideal() const { return !layered_.has_value(); }
  const LayeredBody* layered_body() const {
    return layered_ ? &*layered_ : nullptr;
  }

 private:
  Body() = default;
  std::optional<LayeredBody> layered_;
};

/// One Matsubara term of the free energy (J/m^2) or pressure (N/m^2) sum,
/// including its prefactor but not the 1/2 weight at l = 0.
enum class SummedQuantity { FreeEnergy, Pressure };
double matsubara_term(const Body& body1, const Body& body2,
                      const GeometryThermal& g, const QuadratureSpec& spec,
                      int l, SummedQuantity quantity, long* evals = nullptr);

/// Casimir free energy per unit area (J/m^2, <= 0 for identical passive
/// bodies).
LifshitzResult free_energy(const Body& body1, const Body& body2,
                           const GeometryThermal& g, const QuadratureSpec& spec);

/// Casimir pressure P = -dF/da (N/m^2), analytically differentiated integrand.
LifshitzResult casimir_pressure(const Body& body1, const Body& body2,
                                const GeometryThermal& g,
                                const QuadratureSpec& spec);

/// Casimir entropy S = -dF/dT (J/(K m^2)) via Richardson-extrapolated central
/// differences; delta_t <= 0 selects the default T/8.
LifshitzResult casimir_entropy(const Body& body1, const Body& body2,
                               const GeometryThermal& g,
                               const QuadratureSpec& spec, double delta_t = 0.0);

/// Sphere-plate force gradient dF/da = -2 pi R P (N/m), positive for
/// attractive configurations. Warns (via the result unit being unaffected;
/// callers check a/R) when a/R > 0.1.
LifshitzResult force_gradient_sphere_plate(const Body& sphere, const Body& plate,
                                           double radius,
                                           const GeometryThermal& g,
                                           const QuadratureSpec& spec);

}  // namespace lifshitz
