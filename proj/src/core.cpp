#include "lifshitz/core.hpp"

#include <algorithm>
#include <cmath>

#include "lifshitz/constants.hpp"
#include "lifshitz/quadrature.hpp"

namespace lifshitz {

namespace {

constexpr double kC = constants::speed_of_light;
// e^{-y} below this cutoff is negligible to double precision
constexpr double kYWindow = 60.0;

void validate_geometry(const GeometryThermal& g) {
  if (!(g.separation > 0.0)) throw std::invalid_argument("separation must be > 0");
  if (!(g.temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
}

void validate_spec(const QuadratureSpec& spec) {
  if (!(spec.integral_rel_tol > 0.0 && spec.integral_rel_tol < 1.0))
    throw std::invalid_argument("integral tolerance must be in (0, 1)");
  if (!(spec.matsubara_rel_tol > 0.0 && spec.matsubara_rel_tol < 1.0))
    throw std::invalid_argument("Matsubara tolerance must be in (0, 1)");
  if (spec.max_matsubara <= 0 || spec.max_evals <= 0)
    throw std::invalid_argument("quadrature caps must be positive");
}

}  // namespace

Body Body::semispace(MaterialModel material) {
  return layered(LayeredBody::semispace(std::move(material)));
}

Body Body::layered(LayeredBody body) {
  Body b;
  b.layered_ = std::move(body);
  return b;
}

Body Body::ideal_metal() { return Body{}; }

ReflectionPair Body::reflect(const WaveSlot& slot) const {
  if (!layered_) return {1.0, 1.0};
  return body_reflection(*layered_, slot);
}

double matsubara_term(const Body& body1, const Body& body2,
                      const GeometryThermal& g, const QuadratureSpec& spec,
                      int l, SummedQuantity quantity, long* evals) {
  validate_geometry(g);
  validate_spec(spec);
  const double a = g.separation;
  const double temperature = g.temperature;
  const double xi = l == 0 ? 0.0 : matsubara_frequency(l, temperature);
  const double y_lo = 2.0 * a * xi / kC;
  if (y_lo > 745.0) return 0.0;  // exp(-y) underflows; the term is zero

  const double xi_over_c = xi / kC;
  auto integrand = [&](double y) {
    const double q = y / (2.0 * a);
    const double kp2 = q * q - xi_over_c * xi_over_c;
    WaveSlot slot;
    slot.l = l;
    slot.xi = xi;
    slot.temperature = temperature;
    slot.k_perp = std::sqrt(std::max(kp2, 0.0));
    const ReflectionPair r1 = body1.reflect(slot);
    const ReflectionPair r2 = body2.reflect(slot);
    const double r_tm = r1.tm * r2.tm;
    const double r_te = r1.te * r2.te;
    const double decay = std::exp(-y);
    if (quantity == SummedQuantity::FreeEnergy) {
      return y * (std::log1p(-r_tm * decay) + std::log1p(-r_te * decay));
    }
    const double tm = r_tm * decay / (1.0 - r_tm * decay);
    const double te = r_te * decay / (1.0 - r_te * decay);
    return y * y * (tm + te);
  };

  IntegralResult integral;
  try {
    integral = integrate_adaptive(integrand, y_lo, y_lo + kYWindow,
                                  spec.integral_rel_tol,
                                  evals ? spec.max_evals - *evals
                                        : spec.max_evals);
  } catch (const QuadratureError& err) {
    if (evals) *evals += err.partial.evals;
    LifshitzResult partial;
    partial.value = err.partial.value;
    partial.l_max = l;
    partial.evals = evals ? *evals : err.partial.evals;
    throw ConvergenceError("integrand evaluation budget exhausted at l = " +
                               std::to_string(l),
                           partial);
  }
  if (evals) *evals += integral.evals;

  const double kbt = constants::boltzmann * temperature;
  const double prefactor = quantity == SummedQuantity::FreeEnergy
                               ? kbt / (8.0 * M_PI * a * a)
                               : -kbt / (8.0 * M_PI * a * a * a);
  return prefactor * integral.value;
}

namespace {

LifshitzResult matsubara_sum(const Body& body1, const Body& body2,
                             const GeometryThermal& g,
                             const QuadratureSpec& spec,
                             SummedQuantity quantity) {
  validate_geometry(g);
  validate_spec(spec);

  long evals = 0;
  double sum = 0.0;
  double compensation = 0.0;  // Kahan
  auto accumulate = [&](double term) {
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  };

  int consecutive_small = 0;
  double prev_abs = 0.0;
  double last_abs = 0.0;
  int l = 0;
  int l_used = 0;
  for (; l <= spec.max_matsubara; ++l) {
    const double weight = l == 0 ? 0.5 : 1.0;
    double term;
    try {
      term = weight * matsubara_term(body1, body2, g, spec, l, quantity, &evals);
    } catch (ConvergenceError& err) {
      err.partial.value = sum;
      err.partial.l_max = l;
      err.partial.evals = evals;
      throw;
    }
    accumulate(term);
    l_used = l;
    if (term != 0.0) {
      prev_abs = last_abs;
      last_abs = std::abs(term);
    }
    if (l >= 1) {
      if (std::abs(term) <= spec.matsubara_rel_tol *
                                std::max(std::abs(sum), 1e-300)) {
        if (++consecutive_small >= 3) break;
      } else {
        consecutive_small = 0;
      }
      // terms decay at least geometrically once exp(-y_l) dominates
      const double y_l =
          2.0 * g.separation * matsubara_frequency(l, g.temperature) / kC;
      if (y_l > 745.0) break;
    }
  }

  LifshitzResult out;
  out.value = sum;
  out.l_max = l_used;
  out.evals = evals;
  if (prev_abs > 0.0 && last_abs > 0.0 && last_abs < prev_abs) {
    const double ratio = std::min(last_abs / prev_abs, 0.999);
    out.remainder_estimate = last_abs * ratio / (1.0 - ratio);
  } else {
    out.remainder_estimate = last_abs;
  }
  if (l > spec.max_matsubara) {
    out.l_max = spec.max_matsubara;
    throw ConvergenceError("Matsubara sum did not converge within max index",
                           out);
  }
  return out;
}

}  // namespace

LifshitzResult free_energy(const Body& body1, const Body& body2,
                           const GeometryThermal& g, const QuadratureSpec& spec) {
  LifshitzResult out =
      matsubara_sum(body1, body2, g, spec, SummedQuantity::FreeEnergy);
  out.unit = "J/m^2";
  return out;
}

LifshitzResult casimir_pressure(const Body& body1, const Body& body2,
                                const GeometryThermal& g,
                                const QuadratureSpec& spec) {
  LifshitzResult out =
      matsubara_sum(body1, body2, g, spec, SummedQuantity::Pressure);
  out.unit = "N/m^2";
  return out;
}

LifshitzResult casimir_entropy(const Body& body1, const Body& body2,
                               const GeometryThermal& g,
                               const QuadratureSpec& spec, double delta_t) {
  validate_geometry(g);
  if (delta_t <= 0.0) delta_t = g.temperature / 8.0;
  if (!(delta_t < g.temperature / 4.0))
    throw std::invalid_argument("entropy step must satisfy delta_t < T/4");

  LifshitzResult diag;
  auto f_at = [&](double temperature) {
    GeometryThermal gt{g.separation, temperature};
    LifshitzResult r = free_energy(body1, body2, gt, spec);
    diag.evals += r.evals;
    diag.l_max = std::max(diag.l_max, r.l_max);
    diag.remainder_estimate = std::max(diag.remainder_estimate,
                                       r.remainder_estimate);
    return r.value;
  };

  auto central = [&](double h) {
    return -(f_at(g.temperature + h) - f_at(g.temperature - h)) / (2.0 * h);
  };

  const double coarse = central(delta_t);
  const double fine = central(0.5 * delta_t);
  const double value = (4.0 * fine - coarse) / 3.0;

  const double f_scale = std::abs(f_at(g.temperature));
  const double floor = 1e-8 * f_scale / g.temperature + 1e-300;
  const double disagreement = std::abs(fine - coarse);
  diag.value = value;
  diag.unit = "J/(K m^2)";
  diag.remainder_estimate =
      std::max(diag.remainder_estimate, disagreement / 3.0);
  if (disagreement > std::max(0.1 * std::abs(value), floor))
    throw EntropyStepError(
        "entropy finite-difference step too large: Richardson levels disagree",
        diag);
  return diag;
}

LifshitzResult force_gradient_sphere_plate(const Body& sphere, const Body& plate,
                                           double radius,
                                           const GeometryThermal& g,
                                           const QuadratureSpec& spec) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  LifshitzResult out = casimir_pressure(sphere, plate, g, spec);
  out.value *= -2.0 * M_PI * radius;
  out.unit = "N/m";
  return out;
}

}  // namespace lifshitz
