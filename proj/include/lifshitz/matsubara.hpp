#pragma once

#include <cmath>
#include <stdexcept>

#include "lifshitz/constants.hpp"

namespace lifshitz {

/// xi_l = 2 pi k_B T l / hbar
inline double matsubara_frequency(int l, double temperature) {
  if (l < 0) throw std::invalid_argument("Matsubara index must be >= 0");
  if (!(temperature > 0.0))
    throw std::invalid_argument("temperature must be > 0");
  return 2.0 * M_PI * constants::boltzmann * temperature *
         static_cast<double>(l) / constants::hbar;
}

}  // namespace lifshitz
