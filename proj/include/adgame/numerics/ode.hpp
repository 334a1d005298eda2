#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace adgame::numerics {

/// Right-hand side of y' = f(t, y); writes f(t, y) into `dydt`.
using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  bool dense_output = true;
  std::size_t max_steps = 5'000'000;

  void validate() const;
};

/// Accepted Dormand-Prince 5(4) steps together with the pair's quartic
/// continuous extension. Evaluating between step endpoints costs one
/// polynomial evaluation per component.
class DenseSolution {
 public:
  DenseSolution() = default;

  std::size_t dimension() const noexcept { return dim_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::size_t step_count() const noexcept { return times_.empty() ? 0 : times_.size() - 1; }
  bool has_dense_output() const noexcept { return dense_; }

  /// Accepted step endpoints t_0 < t_1 < ... < t_N.
  std::span<const double> step_times() const noexcept { return times_; }
  const std::vector<double>& initial_state() const noexcept { return initial_; }
  const std::vector<double>& final_state() const noexcept { return final_; }

  /// State at `t`, which must lie in [t_begin(), t_end()].
  std::vector<double> operator()(double t) const;
  void evaluate(double t, std::span<double> out) const;

  /// Concatenates a solution that starts at t_end(); used to stitch shooting
  /// segments into one piecewise trajectory.
  void append(const DenseSolution& next);

 private:
  friend DenseSolution integrate_ivp(const VectorField&, std::span<const double>, double,
                                     double, const IntegratorConfig&);

  std::size_t dim_ = 0;
  bool dense_ = false;
  std::vector<double> times_;
  std::vector<double> coeffs_;  // 5 * dim_ doubles per step
  std::vector<double> initial_;
  std::vector<double> final_;
};

/// Adaptive explicit integration of y' = f(t, y) from t0 to t1 > t0.
/// Throws NumericalFailure on step-size underflow, step budget exhaustion or
/// a non-finite right-hand side.
DenseSolution integrate_ivp(const VectorField& rhs, std::span<const double> y0, double t0,
                            double t1, const IntegratorConfig& config = {});

/// Re-runs the Dormand-Prince map over a fixed step sequence without error
/// control. With `times` taken from a DenseSolution and the same y0 this
/// reproduces its final state bitwise; perturbing y0 then gives a smooth map
/// suitable for finite-difference Jacobians.
std::vector<double> replay_steps(const VectorField& rhs, std::span<const double> y0,
                                 std::span<const double> times);

}  // namespace adgame::numerics
