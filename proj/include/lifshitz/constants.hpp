#pragma once

namespace lifshitz::constants {

// SI units throughout: frequencies in rad/s, lengths in m, temperatures in K,
// energies in J. Dimensionless eps/mu.
inline constexpr double hbar = 1.0545718e-34;             // J s
inline constexpr double boltzmann = 1.380649e-23;         // J / K
inline constexpr double speed_of_light = 2.99792458e8;    // m / s
inline constexpr double electron_volt = 1.602176634e-19;  // J
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F / m

// omega [rad/s] = E [eV] * ev_to_rad_s
inline constexpr double ev_to_rad_s = electron_volt / hbar;

}  // namespace lifshitz::constants
