// Brute-force reference implementation used to cross-check the library.
// Deliberately independent: its own Fresnel coefficients (including the
// zero-frequency branches), fixed-grid midpoint integration in q, explicit
// Matsubara term counts, and a truncated multiple-reflection series for
// coatings. Slow and simple on purpose.
#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace oracle {

constexpr double kHbar = 1.0545718e-34;
constexpr double kBoltzmann = 1.380649e-23;
constexpr double kC = 2.99792458e8;
constexpr double kEv = 1.602176634e-19 / kHbar;  // eV -> rad/s

inline double matsubara_xi(int l, double t) {
  return 2.0 * M_PI * kBoltzmann * t * static_cast<double>(l) / kHbar;
}

// eps(i xi) ~ zero_coeff / xi^zero_order as xi -> 0; zero_coeff stores eps(0)
// for order 0 and omega_p^2 for order 2.
struct Medium {
  std::function<double(double)> eps;  // xi > 0
  int zero_order = 0;
  double zero_coeff = 1.0;
  double mu0 = 1.0;
  bool ideal = false;
};

inline Medium ideal_metal() {
  Medium m;
  m.ideal = true;
  return m;
}

inline Medium drude_metal(double omega_p_ev, double gamma_ev, double mu0 = 1.0) {
  const double wp = omega_p_ev * kEv;
  const double g = gamma_ev * kEv;
  Medium m;
  m.eps = [wp, g](double xi) { return 1.0 + wp * wp / (xi * (xi + g)); };
  m.zero_order = 1;
  m.zero_coeff = wp * wp / g;
  m.mu0 = mu0;
  return m;
}

inline Medium plasma_metal(double omega_p_ev, double mu0 = 1.0) {
  const double wp = omega_p_ev * kEv;
  Medium m;
  m.eps = [wp](double xi) { return 1.0 + wp * wp / (xi * xi); };
  m.zero_order = 2;
  m.zero_coeff = wp * wp;
  m.mu0 = mu0;
  return m;
}

inline Medium oscillator_dielectric(double g_ev2, double omega0_ev) {
  const double g = g_ev2 * kEv * kEv;
  const double w0 = omega0_ev * kEv;
  Medium m;
  m.eps = [g, w0](double xi) { return 1.0 + g / (w0 * w0 + xi * xi); };
  m.zero_order = 0;
  m.zero_coeff = 1.0 + g / (w0 * w0);
  return m;
}

// r_tm, r_te of a semispace seen from vacuum
inline std::pair<double, double> fresnel(const Medium& m, double xi,
                                         double k_perp) {
  if (m.ideal) return {1.0, 1.0};
  if (xi > 0.0) {
    const double e = m.eps(xi);
    const double q = std::sqrt(k_perp * k_perp + xi * xi / (kC * kC));
    const double k = std::sqrt(k_perp * k_perp + e * xi * xi / (kC * kC));
    return {(e * q - k) / (e * q + k), (q - k) / (q + k)};
  }
  double r_tm, r_te;
  if (m.zero_order > 0) {
    r_tm = 1.0;
  } else {
    r_tm = (m.zero_coeff - 1.0) / (m.zero_coeff + 1.0);
  }
  if (m.zero_order == 2) {
    const double k =
        std::sqrt(k_perp * k_perp + m.mu0 * m.zero_coeff / (kC * kC));
    r_te = (m.mu0 * k_perp - k) / (m.mu0 * k_perp + k);
  } else {
    r_te = (m.mu0 - 1.0) / (m.mu0 + 1.0);
  }
  return {r_tm, r_te};
}

// one-layer coating on a substrate via a truncated bounce series (xi > 0 only)
inline std::pair<double, double> coated_fresnel(const Medium& film,
                                                double thickness,
                                                const Medium& substrate,
                                                double xi, double k_perp,
                                                int bounces = 50) {
  const double q = std::sqrt(k_perp * k_perp + xi * xi / (kC * kC));
  const double e1 = film.eps(xi);
  const double e2 = substrate.eps(xi);
  const double k1 = std::sqrt(k_perp * k_perp + e1 * xi * xi / (kC * kC));
  const double k2 = std::sqrt(k_perp * k_perp + e2 * xi * xi / (kC * kC));
  auto series = [&](double r01, double r12) {
    const double r10 = -r01;
    const double t = 1.0 - r01 * r01;  // t01 * t10
    const double decay = std::exp(-2.0 * k1 * thickness);
    double r = r01;
    double amp = t * r12 * decay;
    for (int n = 0; n < bounces; ++n) {
      r += amp;
      amp *= r10 * r12 * decay;
    }
    return r;
  };
  const double tm01 = (e1 * q - k1) / (e1 * q + k1);
  const double tm12 = (e2 * k1 - e1 * k2) / (e2 * k1 + e1 * k2);
  const double te01 = (q - k1) / (q + k1);
  const double te12 = (k1 - k2) / (k1 + k2);
  return {series(tm01, tm12), series(te01, te12)};
}

struct Reflector {
  std::function<std::pair<double, double>(double xi, double k_perp)> at;
};

inline Reflector semispace(const Medium& m) {
  return {[m](double xi, double k_perp) { return fresnel(m, xi, k_perp); }};
}

// Fixed-grid midpoint rule in q over [xi/c, xi/c + window/a], l = 0..l_terms.
// quantity: 0 -> free energy (J/m^2), 1 -> pressure (N/m^2).
inline double lifshitz_sum(const Reflector& b1, const Reflector& b2, double a,
                           double t, int l_terms, int nodes, int quantity,
                           double window = 40.0) {
  double total = 0.0;
  for (int l = 0; l <= l_terms; ++l) {
    const double xi = l == 0 ? 0.0 : matsubara_xi(l, t);
    const double q_lo = xi / kC;
    const double q_hi = q_lo + window / a;
    const double h = (q_hi - q_lo) / nodes;
    double integral = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double q = q_lo + (i + 0.5) * h;
      const double k_perp =
          std::sqrt(std::max(q * q - xi * xi / (kC * kC), 0.0));
      const auto [tm1, te1] = b1.at(xi, k_perp);
      const auto [tm2, te2] = b2.at(xi, k_perp);
      const double x_tm = tm1 * tm2 * std::exp(-2.0 * a * q);
      const double x_te = te1 * te2 * std::exp(-2.0 * a * q);
      if (quantity == 0) {
        integral += q * (std::log1p(-x_tm) + std::log1p(-x_te));
      } else {
        integral +=
            q * q * (x_tm / (1.0 - x_tm) + x_te / (1.0 - x_te));
      }
    }
    integral *= h;
    const double weight = l == 0 ? 0.5 : 1.0;
    const double prefactor = quantity == 0 ? kBoltzmann * t / (2.0 * M_PI)
                                           : -kBoltzmann * t / M_PI;
    total += weight * prefactor * integral;
  }
  return total;
}

inline double free_energy(const Reflector& b1, const Reflector& b2, double a,
                          double t, int l_terms = 400, int nodes = 2000) {
  return lifshitz_sum(b1, b2, a, t, l_terms, nodes, 0);
}

inline double pressure(const Reflector& b1, const Reflector& b2, double a,
                       double t, int l_terms = 400, int nodes = 2000) {
  return lifshitz_sum(b1, b2, a, t, l_terms, nodes, 1);
}

// zero-temperature ideal-metal closed forms
inline double ideal_pressure_t0(double a) {
  return -M_PI * M_PI * kHbar * kC / (240.0 * a * a * a * a);
}

inline double ideal_free_energy_t0(double a) {
  return -M_PI * M_PI * kHbar * kC / (720.0 * a * a * a);
}

}  // namespace oracle
