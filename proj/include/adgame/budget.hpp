#pragma once

#include <optional>
#include <span>
#include <vector>

#include "adgame/market.hpp"

namespace adgame {

/// One firm's view of the market when deciding how to split a budget B
/// between competitors' customers (u) and the market potential (v).
struct AllocationQuery {
  double rho = 1.0;
  double sigma = 1.0;
  double B = 1.0;
  double X = 0.0;  // competitors' share of the non-firm market
  double N = 1.0;  // non-firm market m - s_k

  void validate() const;
};

/// Builds the query of firm k from a market state.
AllocationQuery allocation_query(const MarketState& state, const FirmParams& firm, std::size_t k,
                                 double B);

enum class AllocationMethod { closed_form, closed_form_with_root_fallback, numeric_scan };

const char* to_string(AllocationMethod method);

struct AllocationResult {
  double B = 1.0;
  double u = 0.0;
  double v = 0.0;
  double fraction = 0.0;   // u^2 / B
  double objective = 0.0;
  AllocationMethod method = AllocationMethod::closed_form;
  std::optional<double> delta0, delta1;  // cubic discriminants (tier path)
  std::optional<double> s1, s2;          // implied steady shares (duopoly paths)
  std::optional<double> cross_check_gap; // |u - argmin of a direct scan| (tier path)
};

/// Rate-maximizing split; objective is the u-dependent part of the sales
/// rate, sigma v epsilon + rho u (N - epsilon).
AllocationResult instantaneous_allocation(const AllocationQuery& query);

/// Firm k's instantaneous sales rate with v = sqrt(B - u^2). Only firm k's
/// parameters and the other firms' u enter; their v and c do not.
double rate_of_increase(const MarketState& state, std::span<const FirmParams> params,
                        std::span<const double> u_all, std::size_t k, double B, double u);
/// Same for every entry of `u_grid`, through the batched kernel.
void rate_of_increase_grid(const MarketState& state, std::span<const FirmParams> params,
                           std::span<const double> u_all, std::size_t k, double B,
                           std::span<const double> u_grid, std::span<double> out);
/// d^2 (rate) / du^2 = -sigma epsilon B / (B - u^2)^{3/2}.
double rate_second_derivative(const MarketState& state, const FirmParams& firm, std::size_t k,
                              double B, double u);

/// Settings of the targeted firm 1 versus nontargeted firm 2 comparison.
struct VersusSettings {
  double rho1 = 1.0, rho2 = 1.0, sigma1 = 1.0;
  double B = 1.0;    // firm 1 budget
  double B2 = 1.0;   // firm 2 budget, spent as u2 = v2 = sqrt(B2 / 2)
  double m = 1.0;
  std::size_t grid_points = 101;
};

/// Steady shares (s1, s2) for a given u1.
std::pair<double, double> steady_shares_vs_nontargeted(double c1, double c2, double u1,
                                                       const VersusSettings& settings = {});

/// Firm 1's u1 maximizing its own steady share s1.
AllocationResult steady_share_vs_nontargeted(double c1, double c2,
                                             const VersusSettings& settings = {});

enum class Dominance { dominates, tied, dominated };

const char* to_string(Dominance d);

inline constexpr double dominance_tie_tolerance = 1e-12;

/// Sign of s1 - s2 for equal decay c under the normalized parameters.
Dominance dominance_region(double c, double u1);
double dominance_margin(double c, double u1);

/// Firm 1's u1 maximizing the lead s1 - s2 with equal decay c.
AllocationResult maximize_lead(double c, const VersusSettings& settings = {});

/// Cubic whose root in (0, 1) is the tier optimum when c1 < c2.
double tier_cubic(double c1, double c2, double u);
/// Normalized two-tier potential as a function of u1.
double tier_potential(double c1, double c2, double u1);

/// u1 minimizing the normalized two-tier equilibrium potential.
AllocationResult tier_allocation(double c1, double c2);

}  // namespace adgame
