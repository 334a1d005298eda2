#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adgame/numerics/ode.hpp"

namespace adgame {

enum class Model { nontargeted, targeted, tiered };

const char* to_string(Model model);

/// Per-firm constants. sigma is ignored by the nontargeted model.
struct FirmParams {
  double rho = 1.0;
  double sigma = 1.0;
  double c = 0.0;
  double q = 0.0;
  std::optional<double> budget;

  void validate() const;
};

void validate_firms(std::span<const FirmParams> firms);

/// Sales of n firms in a market of total size m. The potential m - sum(s)
/// is always derived, never stored.
class MarketState {
 public:
  /// Entries may undershoot 0 (or overshoot m in total) by at most
  /// `slack_fraction * m`; integrator output carries roundoff of that size.
  static constexpr double slack_fraction = 1e-9;

  MarketState(double m, std::vector<double> s, double t = 0.0);

  double m() const noexcept { return m_; }
  double t() const noexcept { return t_; }
  const std::vector<double>& s() const noexcept { return s_; }
  std::size_t size() const noexcept { return s_.size(); }
  std::vector<double> shares() const;

 private:
  double m_;
  std::vector<double> s_;
  double t_;
};

double market_potential(const MarketState& state);

/// Efforts u (toward competitors' customers or, nontargeted, toward
/// everyone) and optionally v (toward the market potential).
class ControlVector {
 public:
  ControlVector() = default;
  explicit ControlVector(std::vector<double> u, std::vector<double> v = {});

  const std::vector<double>& u() const noexcept { return u_; }
  const std::vector<double>& v() const noexcept { return v_; }
  bool has_v() const noexcept { return !v_.empty(); }

 private:
  std::vector<double> u_;
  std::vector<double> v_;
};

/// Effort schedule over time.
class ControlPolicy {
 public:
  enum class Kind { constant, piecewise_constant, tabulated_linear };

  static ControlPolicy constant(ControlVector value);
  /// values[i] applies on [times[i], times[i+1]); the last value holds
  /// afterwards and the first one before times[0].
  static ControlPolicy piecewise_constant(std::vector<double> times,
                                          std::vector<ControlVector> values);
  /// Linear interpolation between nodes, constant outside them.
  static ControlPolicy tabulated_linear(std::vector<double> times,
                                        std::vector<ControlVector> values);

  Kind kind() const noexcept { return kind_; }
  ControlVector evaluate(double t) const;
  std::span<const double> breakpoints() const noexcept { return times_; }
  const std::vector<ControlVector>& values() const noexcept { return values_; }
  std::size_t firms() const noexcept { return values_.front().u().size(); }
  bool has_v() const noexcept { return values_.front().has_v(); }

  /// Exact integral of u_k (or v_k) over [a, b].
  double u_integral(std::size_t k, double a, double b) const;
  double v_integral(std::size_t k, double a, double b) const;

 private:
  ControlPolicy(Kind kind, std::vector<double> times, std::vector<ControlVector> values);
  double antiderivative(bool use_v, std::size_t k, double t) const;

  Kind kind_;
  std::vector<double> times_;
  std::vector<ControlVector> values_;
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<MarketState> states;
  std::vector<ControlVector> controls;
  std::vector<std::vector<double>> costates;  // empty unless produced by a game solve

  void validate() const;
};

std::vector<double> nontargeted_rhs(const MarketState& state, std::span<const FirmParams> params,
                                    const ControlVector& controls);
std::vector<double> targeted_rhs(const MarketState& state, std::span<const FirmParams> params,
                                 const ControlVector& controls);
/// Tier 1 is the highest tier; u[n-1] is ignored.
std::vector<double> tiered_rhs(const MarketState& state, std::span<const FirmParams> params,
                               double shared_v, std::span<const double> controls_u);

/// Allocation-free kernels behind the *_rhs functions, for use inside the
/// integrator. No validation.
namespace detail {
void nontargeted_field(double m, std::span<const FirmParams> params, std::span<const double> u,
                       std::span<const double> s, std::span<double> ds);
void targeted_field(double m, std::span<const FirmParams> params, std::span<const double> u,
                    std::span<const double> v, std::span<const double> s, std::span<double> ds);
void tiered_field(double m, std::span<const FirmParams> params, double v,
                  std::span<const double> u, std::span<const double> s, std::span<double> ds);
}  // namespace detail

/// Analytic solution of the nontargeted linear system at time t >= initial.t().
MarketState nontargeted_closed_form(const MarketState& initial, std::span<const FirmParams> params,
                                    const ControlPolicy& policy, double t);

/// Forward integration of one of the three models, sampled on a uniform grid
/// of `samples` points over [initial.t(), t_end]. For the tiered model the
/// policy's v must hold the single shared effort.
Trajectory simulate(Model model, const MarketState& initial, std::span<const FirmParams> params,
                    const ControlPolicy& policy, double t_end, std::size_t samples = 501,
                    const numerics::IntegratorConfig& config = {});

}  // namespace adgame
