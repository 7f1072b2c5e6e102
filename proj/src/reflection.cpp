#include "lifshitz/reflection.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "lifshitz/constants.hpp"
#include "lifshitz/matsubara.hpp"

namespace lifshitz {

namespace {

constexpr double kC = constants::speed_of_light;

void validate_slot(const WaveSlot& slot) {
  if (slot.l < 0) throw std::invalid_argument("Matsubara index must be >= 0");
  if (slot.k_perp < 0.0) throw std::invalid_argument("k_perp must be >= 0");
  if (slot.l == 0) {
    if (slot.xi != 0.0)
      throw std::invalid_argument("slot with l = 0 must have xi = 0");
    return;
  }
  const double expected = matsubara_frequency(slot.l, slot.temperature);
  if (std::abs(slot.xi - expected) > 1e-9 * expected)
    throw std::invalid_argument("slot xi inconsistent with (l, T)");
}

// eps(i xi) ~ eps_coeff / xi^eps_order as xi -> 0. At l >= 1 eps_order == 0
// and eps_coeff is the plain permittivity. For eps_order == 2 the coefficient
// stores omega_p^2 so that eps * xi^2 -> eps_coeff.
struct MediumState {
  int eps_order = 0;
  double eps_coeff = 1.0;
  double mu = 1.0;
};

MediumState medium_state(const MaterialModel& material, const WaveSlot& slot) {
  MediumState s;
  s.mu = material.permeability.at(slot.l);
  if (slot.l >= 1) {
    s.eps_order = 0;
    s.eps_coeff = eval_permittivity(material, slot.xi, slot.temperature);
    return s;
  }
  const LowFrequencyClass cls =
      low_frequency_class(material, slot.temperature);
  switch (cls.tag) {
    case LowFrequencyClass::Tag::Finite:
      s.eps_order = 0;
      s.eps_coeff = cls.value;
      break;
    case LowFrequencyClass::Tag::InverseXi:
      s.eps_order = 1;
      s.eps_coeff = cls.value;
      break;
    case LowFrequencyClass::Tag::InverseXiSquared:
      s.eps_order = 2;
      s.eps_coeff = cls.value * cls.value;  // omega_p^2
      break;
  }
  return s;
}

// k = sqrt(k_perp^2 + eps mu xi^2 / c^2) with the xi -> 0 limit applied at
// l = 0: eps xi^2 vanishes for Finite and InverseXi, tends to omega_p^2 for
// InverseXiSquared.
double transverse_wavenumber(const MediumState& s, const WaveSlot& slot) {
  if (slot.xi > 0.0)
    return std::sqrt(slot.k_perp * slot.k_perp +
                     s.eps_coeff * s.mu * slot.xi * slot.xi / (kC * kC));
  if (s.eps_order == 2)
    return std::sqrt(slot.k_perp * slot.k_perp +
                     s.mu * s.eps_coeff / (kC * kC));
  return slot.k_perp;
}

ReflectionPair interface_reflection(const MediumState& outer,
                                    const MediumState& inner,
                                    const WaveSlot& slot) {
  const double k_out = transverse_wavenumber(outer, slot);
  const double k_in = transverse_wavenumber(inner, slot);
  ReflectionPair r;
  if (inner.eps_order > outer.eps_order) {
    r.tm = 1.0;
  } else if (inner.eps_order < outer.eps_order) {
    r.tm = -1.0;
  } else {
    r.tm = (inner.eps_coeff * k_out - outer.eps_coeff * k_in) /
           (inner.eps_coeff * k_out + outer.eps_coeff * k_in);
  }
  r.te = (inner.mu * k_out - outer.mu * k_in) /
         (inner.mu * k_out + outer.mu * k_in);
  return r;
}

const MediumState kVacuumState{0, 1.0, 1.0};

double mobius(double r_top, double r_below, double decay) {
  const double x = r_below * decay;
  return (r_top + x) / (1.0 + r_top * x);
}

}  // namespace

double WaveSlot::q() const { return std::hypot(k_perp, xi / kC); }

WaveSlot make_slot(int l, double temperature, double k_perp) {
  WaveSlot s;
  s.l = l;
  s.temperature = temperature;
  s.k_perp = k_perp;
  s.xi = l == 0 ? 0.0 : matsubara_frequency(l, temperature);
  return s;
}

LayeredBody LayeredBody::semispace(MaterialModel substrate) {
  LayeredBody b;
  b.substrate = std::move(substrate);
  return b;
}

ReflectionPair fresnel_coefficients(const MaterialModel& body,
                                    const WaveSlot& slot) {
  validate_slot(slot);
  return interface_reflection(kVacuumState, medium_state(body, slot), slot);
}

ReflectionPair layer_stack_reflection(const LayeredBody& body,
                                      const WaveSlot& slot) {
  validate_slot(slot);
  const std::size_t n = body.layers.size();
  // media[0] = vacuum, media[1..n] = layers outermost first, media[n+1] = substrate
  std::vector<MediumState> media;
  media.reserve(n + 2);
  media.push_back(kVacuumState);
  for (auto it = body.layers.rbegin(); it != body.layers.rend(); ++it) {
    if (!(it->thickness > 0.0))
      throw std::invalid_argument("layer thickness must be > 0");
    media.push_back(medium_state(it->material, slot));
  }
  media.push_back(medium_state(body.substrate, slot));

  ReflectionPair r = interface_reflection(media[n], media[n + 1], slot);
  for (std::size_t j = n; j >= 1; --j) {
    const Layer& layer = body.layers[n - j];  // media[j] is layers[n - j]
    const double kappa = transverse_wavenumber(media[j], slot);
    const double decay = std::exp(-2.0 * kappa * layer.thickness);
    const ReflectionPair top = interface_reflection(media[j - 1], media[j], slot);
    r.tm = mobius(top.tm, r.tm, decay);
    r.te = mobius(top.te, r.te, decay);
  }
  return r;
}

ReflectionPair graphene_reflection(const PolarizationTensorProvider& pi,
                                   const WaveSlot& slot) {
  validate_slot(slot);
  if (!(slot.k_perp > 0.0))
    throw std::invalid_argument("graphene reflection needs k_perp > 0");
  const double q = slot.q();
  const double kp2 = slot.k_perp * slot.k_perp;
  const PiValues v = pi.evaluate(slot);
  const double te_combo = kp2 * v.pi_tr - q * q * v.pi00;
  const double scale = 2.0 * constants::hbar * kp2 * std::max(q, 1.0);
  if (v.pi00 < -1e-12 * scale || te_combo < -1e-12 * scale * q) {
    throw ProviderInvariantError(
        "polarization tensor invariant violated by provider '" + pi.name() +
        "' at l = " + std::to_string(slot.l) +
        ", k_perp = " + std::to_string(slot.k_perp) + " 1/m");
  }
  const double pi00 = std::max(v.pi00, 0.0);
  const double y = std::max(te_combo, 0.0);
  ReflectionPair r;
  r.tm = q * pi00 / (2.0 * constants::hbar * kp2 + q * pi00);
  r.te = -y / (2.0 * constants::hbar * kp2 * q + y);
  return r;
}

ReflectionPair graphene_coated_reflection(double eps_l,
                                          const PolarizationTensorProvider& pi,
                                          const WaveSlot& slot) {
  validate_slot(slot);
  if (!(slot.k_perp > 0.0))
    throw std::invalid_argument("graphene reflection needs k_perp > 0");
  if (!(eps_l >= 1.0))
    throw std::invalid_argument("substrate permittivity must be >= 1");
  const double q = slot.q();
  const double kp2 = slot.k_perp * slot.k_perp;
  const double k_l = std::sqrt(kp2 + eps_l * slot.xi * slot.xi / (kC * kC));
  const PiValues v = pi.evaluate(slot);
  const double p00 = q * v.pi00 / (constants::hbar * kp2);
  const double yn = (kp2 * v.pi_tr - q * q * v.pi00) / (constants::hbar * kp2);
  ReflectionPair r;
  r.tm = (eps_l * q + k_l * (p00 - 1.0)) / (eps_l * q + k_l * (p00 + 1.0));
  r.te = (q - k_l - yn) / (q + k_l + yn);
  return r;
}

ReflectionPair body_reflection(const LayeredBody& body, const WaveSlot& slot) {
  ReflectionPair below = layer_stack_reflection(body, slot);
  if (!body.graphene) return below;
  const ReflectionPair sheet = graphene_reflection(*body.graphene, slot);
  // sheet + substrate multiple reflections with zero gap; the sheet's
  // transmission is 1 - r for TM and 1 + r for TE
  ReflectionPair r;
  const double t_tm = 1.0 - sheet.tm;
  const double t_te = 1.0 + sheet.te;
  r.tm = sheet.tm + t_tm * t_tm * below.tm / (1.0 - sheet.tm * below.tm);
  r.te = sheet.te + t_te * t_te * below.te / (1.0 - sheet.te * below.te);
  return r;
}

// --- provider registry -----------------------------------------------------

namespace {

class ZeroPiProvider final : public PolarizationTensorProvider {
 public:
  PiValues evaluate(const WaveSlot&) const override { return {0.0, 0.0}; }
  std::string name() const override { return "zero"; }
};

// Scale-free test tensor: Pi_00 = g hbar k_perp^2 / q,
// Pi_tr = g hbar (k_perp^2 / q + s q) with s >= 1 so that
// k_perp^2 Pi_tr - q^2 Pi_00 = g hbar (k_perp^2 / q)(k_perp^2 + (s-1) q^2) >= 0.
class ConstantPiProvider final : public PolarizationTensorProvider {
 public:
  ConstantPiProvider(double strength, double te_strength, double mass_gap)
      : strength_(strength), te_strength_(te_strength), mass_gap_(mass_gap) {
    if (strength < 0.0)
      throw std::invalid_argument("constant provider strength must be >= 0");
    if (te_strength < 1.0)
      throw std::invalid_argument("constant provider te_strength must be >= 1");
  }

  PiValues evaluate(const WaveSlot& slot) const override {
    const double q = slot.q();
    const double kp2 = slot.k_perp * slot.k_perp;
    PiValues v;
    v.pi00 = strength_ * constants::hbar * kp2 / q;
    v.pi_tr = strength_ * constants::hbar * (kp2 / q + te_strength_ * q);
    return v;
  }
  std::string name() const override { return "constant"; }
  double mass_gap() const override { return mass_gap_; }

 private:
  double strength_;
  double te_strength_;
  double mass_gap_;
};

std::mutex g_registry_mutex;

std::map<std::string, PiProviderFactory>& registry() {
  static std::map<std::string, PiProviderFactory> map = [] {
    std::map<std::string, PiProviderFactory> m;
    m["zero"] = [](const nlohmann::json&) -> PiProviderPtr {
      return std::make_shared<ZeroPiProvider>();
    };
    m["constant"] = [](const nlohmann::json& params) -> PiProviderPtr {
      const double strength = params.value("strength", 1.0);
      const double te_strength = params.value("te_strength", 1.0);
      const double mass_gap = params.value("mass_gap", 0.0);
      return std::make_shared<ConstantPiProvider>(strength, te_strength,
                                                  mass_gap);
    };
    return m;
  }();
  return map;
}

}  // namespace

void register_pi_provider(const std::string& name, PiProviderFactory factory) {
  std::lock_guard<std::mutex> lock(g_registry_mutex);
  registry()[name] = std::move(factory);
}

PiProviderPtr make_pi_provider(const std::string& name,
                               const nlohmann::json& params) {
  PiProviderFactory factory;
  {
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto it = registry().find(name);
    if (it == registry().end())
      throw std::invalid_argument("unknown polarization tensor provider '" +
                                  name + "'");
    factory = it->second;
  }
  // invoked unlocked so factories may themselves consult the registry
  return factory(params);
}

std::vector<std::string> registered_pi_providers() {
  std::lock_guard<std::mutex> lock(g_registry_mutex);
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

}  // namespace lifshitz
