#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace adgame::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b]. Breakpoints
/// inside (a, b) are where f may jump; intervals are never straddled across
/// them. Throws NumericalFailure if the error target is not met.
QuadratureResult quadrature(const std::function<double(double)>& f, double a, double b,
                            std::span<const double> breakpoints = {},
                            const QuadratureConfig& config = {});

}  // namespace adgame::numerics
