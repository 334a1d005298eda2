#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "adgame/market.hpp"

namespace adgame {

struct SteadyStateReport {
  double m = 1.0;
  std::vector<double> s_star;
  double epsilon_star = 0.0;
  double U = 0.0;                 // sum of rho_j u_j
  std::optional<double> V;        // sum of sigma_j v_j (targeted models)
  std::optional<double> D;        // D2 / D3 / tier denominator when applicable
  double residual_norm = 0.0;     // max |rhs(s_star)|
};

struct StabilityReport {
  std::vector<std::vector<double>> jacobian;
  std::vector<std::complex<double>> eigenvalues;
  std::optional<double> d_star;   // duopoly discriminant
  bool stable = false;            // every eigenvalue has negative real part
};

/// Largest residual accepted from a closed-form steady state.
inline constexpr double steady_residual_limit = 1e-10;

SteadyStateReport nontargeted_steady_state(double m, std::span<const FirmParams> params,
                                           const ControlVector& controls);
SteadyStateReport targeted_steady_state_duopoly(double m, std::span<const FirmParams> params,
                                                const ControlVector& controls);
SteadyStateReport targeted_steady_state_triopoly(double m, std::span<const FirmParams> params,
                                                 const ControlVector& controls);
/// Dispatches on n; sizes other than 2 and 3 throw Unsupported.
SteadyStateReport targeted_steady_state(double m, std::span<const FirmParams> params,
                                        const ControlVector& controls);
/// Two tiers sharing effort v toward the potential; tier 1 spends u1 on upgrades.
SteadyStateReport tier_steady_state_two(double m, std::span<const FirmParams> params, double v,
                                        double u1);

/// Jacobian and eigenvalues of the linear nontargeted system (diagonal).
StabilityReport nontargeted_stability(std::span<const FirmParams> params,
                                       const ControlVector& controls);
/// Closed-form eigenvalues of the targeted duopoly with discriminant d*.
StabilityReport duopoly_stability(std::span<const FirmParams> params,
                                  const ControlVector& controls);
/// Targeted system of any size via a dense eigensolver. No stability result
/// is known for n = 3; the flag only reports what was computed.
StabilityReport targeted_stability(std::span<const FirmParams> params,
                                   const ControlVector& controls);
StabilityReport tier_stability_two(std::span<const FirmParams> params, double v, double u1);

/// Discriminant d* of the targeted duopoly eigenvalues.
double duopoly_discriminant(std::span<const FirmParams> params, const ControlVector& controls);

}  // namespace adgame
