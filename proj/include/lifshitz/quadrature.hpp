#pragma once

#include <functional>
#include <stdexcept>

namespace lifshitz {

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evals = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, IntegralResult partial)
      : std::runtime_error(what), partial(partial) {}
  IntegralResult partial;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Refines the interval with the largest error estimate until the summed
/// error falls below rel_tol * |integral|. Throws QuadratureError with the
/// partial result when max_evals is exhausted first. Deterministic: the
/// refinement order depends only on the inputs.
IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double rel_tol,
                                  long max_evals = 1000000);

}  // namespace lifshitz
