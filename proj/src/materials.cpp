#include "lifshitz/materials.hpp"

#include <algorithm>
#include <cmath>

#include "lifshitz/constants.hpp"
#include "lifshitz/quadrature.hpp"

namespace lifshitz {

double RelaxationLaw::at(double temperature) const {
  if (exponent == 0.0) return gamma_ref;
  return gamma_ref * std::pow(temperature / t_ref, exponent);
}

void validate_oscillators(std::span<const Oscillator> oscillators) {
  for (const Oscillator& osc : oscillators) {
    if (!(osc.frequency > 0.0))
      throw std::invalid_argument("oscillator frequency must be > 0");
    if (osc.strength < 0.0)
      throw std::invalid_argument("oscillator strength must be >= 0");
    if (osc.relaxation < 0.0)
      throw std::invalid_argument("oscillator relaxation must be >= 0");
  }
}

void validate_spectral_table(const SpectralTable& table) {
  if (table.omega.size() != table.im_eps.size())
    throw SpectralTableError("omega and im_eps must have the same length");
  if (table.omega.size() < 2)
    throw SpectralTableError("spectral table needs at least 2 samples");
  for (std::size_t i = 0; i < table.omega.size(); ++i) {
    if (!(table.omega[i] > 0.0))
      throw SpectralTableError("omega must be positive at sample " +
                               std::to_string(i));
    if (i > 0 && !(table.omega[i] > table.omega[i - 1]))
      throw SpectralTableError("omega must be strictly increasing at sample " +
                               std::to_string(i));
    if (table.im_eps[i] < 0.0)
      throw SpectralTableError("Im eps must be >= 0 at sample " +
                               std::to_string(i));
  }
  if (table.cache_xi.size() != table.cache_eps.size())
    throw SpectralTableError("cache_xi and cache_eps must have the same length");
  for (std::size_t i = 1; i < table.cache_xi.size(); ++i)
    if (!(table.cache_xi[i] > table.cache_xi[i - 1]))
      throw SpectralTableError("cache_xi must be strictly increasing");
}

MaterialModel MaterialModel::vacuum() { return MaterialModel{}; }

MaterialModel MaterialModel::core_oscillators(std::vector<Oscillator> oscillators,
                                              std::string name) {
  validate_oscillators(oscillators);
  MaterialModel m;
  m.kind = Kind::CoreOscillators;
  m.core = std::move(oscillators);
  m.name = std::move(name);
  return m;
}

MaterialModel MaterialModel::dc_dielectric(std::vector<Oscillator> oscillators,
                                           double sigma0, std::string name) {
  validate_oscillators(oscillators);
  if (!(sigma0 > 0.0))
    throw std::invalid_argument("dc conductivity must be > 0");
  MaterialModel m;
  m.kind = Kind::DcDielectric;
  m.core = std::move(oscillators);
  m.sigma0 = sigma0;
  m.name = std::move(name);
  return m;
}

MaterialModel MaterialModel::drude(double omega_p, RelaxationLaw relaxation,
                                   std::vector<Oscillator> core,
                                   std::string name) {
  validate_oscillators(core);
  if (!(omega_p > 0.0)) throw std::invalid_argument("omega_p must be > 0");
  if (relaxation.gamma_ref < 0.0 || relaxation.exponent < 0.0 ||
      !(relaxation.t_ref > 0.0))
    throw std::invalid_argument("invalid relaxation law");
  MaterialModel m;
  m.kind = Kind::Drude;
  m.core = std::move(core);
  m.omega_p = omega_p;
  m.relaxation = relaxation;
  m.name = std::move(name);
  return m;
}

MaterialModel MaterialModel::plasma(double omega_p, std::vector<Oscillator> core,
                                    std::string name) {
  validate_oscillators(core);
  if (!(omega_p > 0.0)) throw std::invalid_argument("omega_p must be > 0");
  MaterialModel m;
  m.kind = Kind::Plasma;
  m.core = std::move(core);
  m.omega_p = omega_p;
  m.name = std::move(name);
  return m;
}

MaterialModel MaterialModel::tabulated(SpectralTable table, std::string name) {
  validate_spectral_table(table);
  MaterialModel m;
  m.kind = Kind::Tabulated;
  m.table = std::move(table);
  m.name = std::move(name);
  return m;
}

double eval_core_permittivity(std::span<const Oscillator> oscillators,
                              double xi) {
  if (xi < 0.0) throw std::invalid_argument("xi must be >= 0");
  double eps = 1.0;
  for (const Oscillator& osc : oscillators) {
    if (!(osc.frequency > 0.0))
      throw std::invalid_argument("oscillator frequency must be > 0");
    eps += osc.strength /
           (osc.frequency * osc.frequency + xi * xi + osc.relaxation * xi);
  }
  return eps;
}

double eval_permittivity(const MaterialModel& model, double xi,
                         double temperature) {
  if (xi < 0.0) throw std::invalid_argument("xi must be >= 0");
  switch (model.kind) {
    case MaterialModel::Kind::Vacuum:
      return 1.0;
    case MaterialModel::Kind::CoreOscillators:
      return eval_core_permittivity(model.core, xi);
    case MaterialModel::Kind::DcDielectric:
      if (xi == 0.0)
        throw DivergentZeroFrequencyError(
            "dc-conductivity permittivity diverges at xi = 0; use "
            "low_frequency_class");
      return eval_core_permittivity(model.core, xi) +
             4.0 * M_PI * model.sigma0 / xi;
    case MaterialModel::Kind::Drude:
      if (xi == 0.0)
        throw DivergentZeroFrequencyError(
            "Drude permittivity diverges at xi = 0; use low_frequency_class");
      return eval_core_permittivity(model.core, xi) +
             model.omega_p * model.omega_p /
                 (xi * (xi + model.relaxation.at(temperature)));
    case MaterialModel::Kind::Plasma:
      if (xi == 0.0)
        throw DivergentZeroFrequencyError(
            "plasma permittivity diverges at xi = 0; use low_frequency_class");
      return eval_core_permittivity(model.core, xi) +
             model.omega_p * model.omega_p / (xi * xi);
    case MaterialModel::Kind::Tabulated: {
      const bool divergent_tail =
          model.table.low_tail &&
          model.table.low_tail->kind != LowTailKind::ConstantEps;
      if (xi == 0.0 && divergent_tail)
        throw DivergentZeroFrequencyError(
            "tabulated permittivity with a metallic tail diverges at xi = 0; "
            "use low_frequency_class");
      const auto& cx = model.table.cache_xi;
      if (!cx.empty() && xi > 0.0) {
        auto it = std::lower_bound(cx.begin(), cx.end(), xi);
        for (auto probe : {it, it == cx.begin() ? it : std::prev(it)}) {
          if (probe != cx.end() && std::abs(*probe - xi) <= 1e-9 * xi)
            return model.table
                .cache_eps[static_cast<std::size_t>(probe - cx.begin())];
        }
      }
      return kramers_kronig_transform(model.table, xi);
    }
  }
  throw std::logic_error("unreachable material kind");
}

double eval_permittivity(const MaterialModel& model, int l, double temperature,
                         double xi) {
  if (l < 0) throw std::invalid_argument("Matsubara index must be >= 0");
  const double expected = 2.0 * M_PI * constants::boltzmann * temperature *
                          static_cast<double>(l) / constants::hbar;
  const double scale = std::max(std::abs(expected), std::abs(xi));
  if (std::abs(xi - expected) > 1e-9 * std::max(scale, 1.0))
    throw std::invalid_argument("xi inconsistent with Matsubara index");
  return eval_permittivity(model, xi, temperature);
}

LowFrequencyClass low_frequency_class(const MaterialModel& model,
                                      double temperature) {
  using Tag = LowFrequencyClass::Tag;
  switch (model.kind) {
    case MaterialModel::Kind::Vacuum:
      return {Tag::Finite, 1.0};
    case MaterialModel::Kind::CoreOscillators:
      return {Tag::Finite, eval_core_permittivity(model.core, 0.0)};
    case MaterialModel::Kind::DcDielectric:
      return {Tag::InverseXi, 4.0 * M_PI * model.sigma0};
    case MaterialModel::Kind::Drude: {
      const double gamma = model.relaxation.at(temperature);
      if (gamma == 0.0) return {Tag::InverseXiSquared, model.omega_p};
      return {Tag::InverseXi, model.omega_p * model.omega_p / gamma};
    }
    case MaterialModel::Kind::Plasma:
      return {Tag::InverseXiSquared, model.omega_p};
    case MaterialModel::Kind::Tabulated: {
      if (!model.table.low_tail)
        return {Tag::Finite, kramers_kronig_transform(model.table, 0.0)};
      const LowTail& tail = *model.table.low_tail;
      switch (tail.kind) {
        case LowTailKind::DrudeTail:
          if (tail.gamma == 0.0) return {Tag::InverseXiSquared, tail.omega_p};
          return {Tag::InverseXi, tail.omega_p * tail.omega_p / tail.gamma};
        case LowTailKind::PlasmaTail:
          return {Tag::InverseXiSquared, tail.omega_p};
        case LowTailKind::ConstantEps:
          return {Tag::Finite, kramers_kronig_transform(model.table, 0.0)};
      }
      throw std::logic_error("unreachable tail kind");
    }
  }
  throw std::logic_error("unreachable material kind");
}

namespace {

double low_tail_contribution(const SpectralTable& table, double xi) {
  const double omega_min = table.omega.front();
  if (!table.low_tail) {
    if (table.im_eps.front() > 0.0)
      throw SpectralTableError(
          "low-frequency extrapolation policy missing while Im eps is nonzero "
          "at the table edge");
    return 0.0;
  }
  const LowTail& tail = *table.low_tail;
  switch (tail.kind) {
    case LowTailKind::DrudeTail: {
      if (xi == 0.0)
        throw DivergentZeroFrequencyError("Drude tail diverges at xi = 0");
      double gamma = tail.gamma;
      if (gamma == 0.0) return tail.omega_p * tail.omega_p / (xi * xi);
      double x = xi;
      // the closed form is singular (0/0) at xi == gamma; nudge past it
      if (std::abs(x - gamma) < 1e-7 * gamma) x = gamma * (1.0 + 2e-7);
      const double wp2 = tail.omega_p * tail.omega_p;
      const double bracket = std::atan(omega_min / gamma) / gamma -
                             std::atan(omega_min / x) / x;
      return 2.0 * wp2 * gamma / M_PI * bracket / (x * x - gamma * gamma);
    }
    case LowTailKind::PlasmaTail:
      // all dissipationless free-carrier weight sits at omega = 0
      if (xi == 0.0)
        throw DivergentZeroFrequencyError("plasma tail diverges at xi = 0");
      return tail.omega_p * tail.omega_p / (xi * xi);
    case LowTailKind::ConstantEps:
      // below-table weight modeled as an undamped oscillator at omega_min
      // whose zero-frequency contribution equals eps_const - 1
      return (tail.eps_const - 1.0) * omega_min * omega_min /
             (omega_min * omega_min + xi * xi);
  }
  throw std::logic_error("unreachable tail kind");
}

double high_tail_contribution(const SpectralTable& table, double xi) {
  const double amplitude = table.im_eps.back();
  if (amplitude == 0.0) return 0.0;
  if (!table.high_decay_exponent)
    throw SpectralTableError(
        "high-frequency extrapolation policy missing while Im eps is nonzero "
        "at the table edge");
  const double p = *table.high_decay_exponent;
  if (!(p > 0.0))
    throw SpectralTableError("high-frequency decay exponent must be > 0");
  const double omega_max = table.omega.back();
  // substitution u = omega_max / omega
  auto integrand = [&](double u) {
    return std::pow(u, p - 1.0) * omega_max * omega_max /
           (omega_max * omega_max + xi * xi * u * u);
  };
  IntegralResult res = integrate_adaptive(integrand, 0.0, 1.0, 1e-10, 200000);
  return 2.0 * amplitude / M_PI * res.value;
}

double table_contribution(const SpectralTable& table, double xi) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < table.omega.size(); ++i) {
    const double w0 = table.omega[i];
    const double w1 = table.omega[i + 1];
    const double f0 = table.im_eps[i];
    const double f1 = table.im_eps[i + 1];
    if (f0 == 0.0 && f1 == 0.0) continue;
    std::function<double(double)> im;
    if (f0 > 0.0 && f1 > 0.0) {
      // log-log linear between samples
      const double slope = std::log(f1 / f0) / std::log(w1 / w0);
      im = [=](double w) { return f0 * std::pow(w / w0, slope); };
    } else {
      im = [=](double w) { return f0 + (f1 - f0) * (w - w0) / (w1 - w0); };
    }
    auto integrand = [&, xi](double w) {
      return w * im(w) / (w * w + xi * xi);
    };
    IntegralResult res = integrate_adaptive(integrand, w0, w1, 1e-10, 20000);
    total += res.value;
  }
  return 2.0 / M_PI * total;
}

}  // namespace

double kramers_kronig_transform(const SpectralTable& table, double xi) {
  if (xi < 0.0) throw std::invalid_argument("xi must be >= 0");
  validate_spectral_table(table);
  return 1.0 + low_tail_contribution(table, xi) + table_contribution(table, xi) +
         high_tail_contribution(table, xi);
}

}  // namespace lifshitz
