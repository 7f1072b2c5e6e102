#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lifshitz/materials.hpp"

#include "json.hpp"

namespace lifshitz {

/// One (l, k_perp) evaluation point of the Matsubara formalism.
struct WaveSlot {
  int l = 0;
  double xi = 0.0;          // rad/s, must equal 2 pi k_B T l / hbar
  double k_perp = 0.0;      // 1/m
  double temperature = 0.0; // K

  double q() const;  // sqrt(k_perp^2 + xi^2 / c^2)
};

WaveSlot make_slot(int l, double temperature, double k_perp);

struct ReflectionPair {
  double tm = 0.0;
  double te = 0.0;
};

/// Pi_00 and Pi_tr at imaginary Matsubara arguments, in units of
/// hbar * (1/m) exactly as they enter the graphene reflection coefficients.
struct PiValues {
  double pi00 = 0.0;
  double pi_tr = 0.0;
};

class ProviderInvariantError : public std::runtime_error {
 public:
  explicit ProviderInvariantError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Pluggable polarization tensor of a graphene sheet. Implementations must be
/// safe for concurrent evaluation.
class PolarizationTensorProvider {
 public:
  virtual ~PolarizationTensorProvider() = default;
  virtual PiValues evaluate(const WaveSlot& slot) const = 0;
  virtual std::string name() const = 0;
  /// Opaque mass-gap metadata; 0 for gapless providers.
  virtual double mass_gap() const { return 0.0; }
};

using PiProviderPtr = std::shared_ptr<const PolarizationTensorProvider>;

struct Layer {
  MaterialModel material;
  double thickness = 0.0;  // m, > 0
};

/// A semispace substrate plus finite coatings (ordered substrate outward) and
/// an optional graphene sheet on top.
struct LayeredBody {
  MaterialModel substrate;
  std::vector<Layer> layers;
  PiProviderPtr graphene;  // null: no sheet

  static LayeredBody semispace(MaterialModel substrate);
};

/// Fresnel coefficients of a semispace at imaginary Matsubara frequency.
/// At l = 0 the branch is selected by the material's LowFrequencyClass.
ReflectionPair fresnel_coefficients(const MaterialModel& body,
                                    const WaveSlot& slot);

/// Effective coefficients of substrate + coatings (no graphene sheet),
/// combined innermost-out with the standard two-interface recursion.
ReflectionPair layer_stack_reflection(const LayeredBody& body,
                                      const WaveSlot& slot);

/// Freestanding graphene sheet.
ReflectionPair graphene_reflection(const PolarizationTensorProvider& pi,
                                   const WaveSlot& slot);

/// Graphene on a semispace of permittivity eps_l (mu = 1). Reduces to the
/// bare Fresnel coefficients when Pi == 0 and to the freestanding sheet when
/// eps_l == 1.
ReflectionPair graphene_coated_reflection(double eps_l,
                                          const PolarizationTensorProvider& pi,
                                          const WaveSlot& slot);

/// Full body: coating stack, then the optional graphene sheet on top.
ReflectionPair body_reflection(const LayeredBody& body, const WaveSlot& slot);

// --- provider registry -----------------------------------------------------

using PiProviderFactory =
    std::function<PiProviderPtr(const nlohmann::json& params)>;

/// Register a named provider factory; overwrites an existing name.
void register_pi_provider(const std::string& name, PiProviderFactory factory);

/// Look up a registered provider. Built-ins: "zero" (transparent sheet) and
/// "constant" (params: "strength" >= 0, "te_strength" >= 1, "mass_gap").
PiProviderPtr make_pi_provider(const std::string& name,
                               const nlohmann::json& params = {});

std::vector<std::string> registered_pi_providers();

}  // namespace lifshitz
