#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "adgame/numerics/ode.hpp"

namespace adgame::numerics {

struct ShootingConfig {
  std::size_t segments = 8;
  double newton_tol = 1e-8;
  std::size_t max_newton_iters = 60;
  double damping = 1.0;      // first trial step fraction, in (0, 1]
  double fd_epsilon = 0.0;   // 0 selects sqrt(machine epsilon) * max(1, |z|)
  IntegratorConfig integrator{1e-11, 1e-12};

  void validate() const;
};

/// Split boundary value problem y' = f(t, y) on [t0, T] with
/// y = (x, p): the first x0.size() components are states fixed at t0, the
/// remaining ones are costates fixed at T.
struct BvpProblem {
  VectorField rhs;
  std::vector<double> x0;
  std::vector<double> terminal_costate;
  double t0 = 0.0;
  double T = 1.0;
  /// Optional full-state guess y(t) used to seed the shooting nodes.
  std::function<void(double, std::span<double>)> guess;
};

struct BvpSolution {
  DenseSolution path;             // segments stitched end to end
  std::vector<double> initial;    // y(t0) including recovered costates
  std::vector<double> node_times;
  double terminal_residual_norm = 0.0;  // max-norm of continuity and terminal residuals
  double condition_estimate = 0.0;      // reciprocal condition of the last Jacobian
  std::size_t iterations = 0;
  bool converged = false;
};

/// Multiple shooting with damped Newton and finite-difference Jacobians.
/// Non-convergence returns the best iterate with converged = false; a
/// numerically singular Jacobian throws SingularJacobian.
BvpSolution solve_two_point_bvp(const BvpProblem& problem, const ShootingConfig& config = {});

}  // namespace adgame::numerics
