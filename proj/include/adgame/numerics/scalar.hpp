#pragma once

#include <cstddef>
#include <functional>

namespace adgame::numerics {

using ScalarFunction = std::function<double(double)>;

/// Brent's method on a bracket with f(lo) * f(hi) <= 0. Stops when the
/// bracket is narrower than `tol` or |f| <= tol. Throws InvalidInput when
/// the bracket has no sign change.
double find_root_bracketed(const ScalarFunction& f, double lo, double hi, double tol = 1e-12);

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Brent's golden-section/parabolic minimizer. Finds a local minimum only.
ScalarMinimum minimize_scalar_bounded(const ScalarFunction& f, double lo, double hi,
                                      double tol = 1e-10);

/// Grid pre-scan with `grid_points` samples, then bounded refinement around
/// the best sample; endpoints are compared explicitly.
ScalarMinimum minimize_scalar_global(const ScalarFunction& f, double lo, double hi,
                                     double tol = 1e-10, std::size_t grid_points = 101);

}  // namespace adgame::numerics
