#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adgame/market.hpp"
#include "adgame/numerics/bvp.hpp"

namespace adgame {

enum class GameVariant { nontargeted, targeted_duopoly };

const char* to_string(GameVariant variant);

/// Finite-horizon advertising game in share form. Firm k earns
/// Q_k = q_k m per unit share and pays u_k^2 (+ v_k^2) per unit time.
struct GameSpec {
  std::vector<FirmParams> firms;
  double m = 1.0;
  double r = 0.0;
  double T = 1.0;
  std::vector<double> x0;
  GameVariant variant = GameVariant::nontargeted;

  void validate() const;
  double Q(std::size_t k) const { return firms[k].q * m; }
  std::size_t costate_count() const;
};

struct GameSolution {
  GameSpec spec;
  numerics::BvpSolution bvp;  // y = (x_1..x_n, phi...)
  /// Uniform 501-point sampling: sales x*m, on-path controls, costates phi
  /// (nontargeted: phi_1..phi_n; targeted: phi_11, phi_12, phi_21, phi_22).
  Trajectory trajectory;
  std::size_t homotopy_stages = 0;  // 0 when plain Newton converged
  std::size_t clamp_events = 0;     // negative on-path controls set to 0
  double max_terminal_costate = 0.0;
};

inline constexpr std::size_t nash_grid_points = 501;

GameSolution solve_nash_nontargeted(const GameSpec& spec,
                                    const numerics::ShootingConfig& config = {});
/// Throws Unsupported for more than two firms.
GameSolution solve_nash_targeted_duopoly(const GameSpec& spec,
                                         const numerics::ShootingConfig& config = {});
GameSolution solve_nash(const GameSpec& spec, const numerics::ShootingConfig& config = {});

/// Feedback rule evaluated against `live_shares` instead of the solved path.
/// Negative values are clamped to 0 and counted in `clamped` if given.
ControlVector closed_loop_controls(const GameSolution& solution, double t,
                                   std::span<const double> live_shares,
                                   std::size_t* clamped = nullptr);
/// The same rule pinned to the solved path x*(t).
ControlVector open_loop_controls(const GameSolution& solution, double t,
                                 std::size_t* clamped = nullptr);

struct ProfitResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Discounted profit of firm k by the trapezoid rule on the trajectory grid,
/// with a Richardson (step-doubling) error estimate.
ProfitResult profit(const GameSpec& spec, const Trajectory& trajectory, std::size_t k);

enum class OpponentResponse { open_loop, closed_loop };

struct DeviationOptions {
  std::size_t perturbations = 20;  // random deviations per firm
  double magnitude = 0.2;
  std::uint64_t seed = 12345;
  OpponentResponse opponents = OpponentResponse::open_loop;
  numerics::IntegratorConfig integrator{1e-10, 1e-12};
};

struct DeviationRecord {
  std::size_t firm = 0;
  enum class Kind { scale, bump } kind = Kind::scale;
  bool on_u = true;
  bool on_v = false;
  double amount = 0.0;      // scale factor, or bump amplitude
  double center = 0.0;      // bump center
  double width = 0.0;       // bump width
  double profit = 0.0;
  double gap = 0.0;         // profit(deviation) - profit(equilibrium)
};

struct NashVerification {
  std::vector<double> equilibrium_profit;
  std::vector<DeviationRecord> records;
  double max_gap = 0.0;
};

/// Profit of firm k when it plays `record`'s deviation and the others follow
/// `opponents`; uses the same integration as the equilibrium reference.
double deviation_profit(const GameSolution& solution, const DeviationRecord& record,
                        OpponentResponse opponents, const numerics::IntegratorConfig& integrator);

/// Random unilateral deviations (scalings and Gaussian bumps of u and/or v)
/// for every firm, plus their profit gaps.
NashVerification verify_nash(const GameSolution& solution, const DeviationOptions& options = {});

}  // namespace adgame
