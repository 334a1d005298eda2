#include "adgame/nash.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "adgame/error.hpp"

namespace adgame {

const char* to_string(GameVariant variant) {
  switch (variant) {
    case GameVariant::nontargeted: return "nontargeted";
    case GameVariant::targeted_duopoly: return "targeted";
  }
  return "?";
}

void GameSpec::validate() const {
  validate_firms(firms);
  if (!(std::isfinite(m) && m > 0.0)) throw InvalidInput("market size m must be positive");
  if (!(std::isfinite(r) && r >= 0.0)) throw InvalidInput("discount rate r must be nonnegative");
  if (!(std::isfinite(T) && T > 0.0)) throw InvalidInput("horizon T must be positive");
  if (x0.size() != firms.size()) throw DimensionMismatch("x0 length differs from firm count");
  double total = 0.0;
  for (double x : x0) {
    if (!(std::isfinite(x) && x >= 0.0 && x <= 1.0))
      throw InvalidInput("initial shares must lie in [0, 1]");
    total += x;
  }
  if (total > 1.0 + 1e-12) throw InvalidInput("initial shares sum to more than 1");
  if (variant == GameVariant::targeted_duopoly) {
    if (firms.size() > 2)
      throw Unsupported("targeted game is only available for two firms (no costate system for n > 2)");
    if (firms.size() < 2) throw InvalidInput("targeted game needs exactly two firms");
  }
}

std::size_t GameSpec::costate_count() const {
  return variant == GameVariant::nontargeted ? firms.size() : 4;
}

namespace {

struct Rule {
  const GameSpec& spec;
  double q_scale = 1.0;

  double Q(std::size_t k) const { return q_scale * spec.Q(k); }

  // Raw (unclamped) strategy formulas.
  void controls(double t, std::span<const double> x, std::span<const double> phi,
                std::span<double> u, std::span<double> v) const {
    const double E = std::exp(spec.r * t);
    const auto& f = spec.firms;
    if (spec.variant == GameVariant::nontargeted) {
      for (std::size_t k = 0; k < f.size(); ++k)
        u[k] = 0.5 * f[k].rho * Q(k) * phi[k] * E * (1.0 - x[k]);
      return;
    }
    const double P = 1.0 - x[0] - x[1];
    const double p11 = phi[0], p12 = phi[1], p21 = phi[2], p22 = phi[3];
    u[0] = 0.5 * f[0].rho * Q(0) * (p11 - p12) * x[1] * E;
    v[0] = 0.5 * f[0].sigma * Q(0) * p11 * P * E;
    u[1] = 0.5 * f[1].rho * Q(1) * (p22 - p21) * x[0] * E;
    v[1] = 0.5 * f[1].sigma * Q(1) * p22 * P * E;
  }

  void field(double t, std::span<const double> y, std::span<double> dy) const {
    const std::size_t n = spec.firms.size();
    const auto& f = spec.firms;
    const auto x = y.subspan(0, n);
    const auto phi = y.subspan(n);
    const double disc = std::exp(-spec.r * t);
    if (spec.variant == GameVariant::nontargeted) {
      double ru[16];
      std::vector<double> ru_heap;
      double* rup = ru;
      if (n > 16) {
        ru_heap.resize(n);
        rup = ru_heap.data();
      }
      std::span<double> uk(rup, n);
      controls(t, x, phi, uk, {});
      double U = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        uk[k] *= f[k].rho;
        U += uk[k];
      }
      for (std::size_t k = 0; k < n; ++k) {
        dy[k] = uk[k] - x[k] * (f[k].c + U);
        dy[n + k] = phi[k] * (f[k].c + U) - disc;
      }
      return;
    }
    double u[2], v[2];
    controls(t, x, phi, u, v);
    const double a1 = f[0].rho * u[0], a2 = f[1].rho * u[1];
    const double b1 = f[0].sigma * v[0], b2 = f[1].sigma * v[1];
    const double c1 = f[0].c, c2 = f[1].c;
    const double P = 1.0 - x[0] - x[1];
    const double p11 = phi[0], p12 = phi[1], p21 = phi[2], p22 = phi[3];
    dy[0] = b1 * P + a1 * x[1] - x[0] * (c1 + a2);
    dy[1] = b2 * P + a2 * x[0] - x[1] * (c2 + a1);
    dy[2] = p11 * (b1 + c1 + a2) + p12 * (b2 - a2) - disc;
    dy[3] = p11 * (b1 - a1) + p12 * (b2 + c2 + a1);
    dy[4] = p22 * (b2 - a2) + p21 * (b1 + c1 + a2);
    dy[5] = p22 * (b2 + c2 + a1) + p21 * (b1 - a1) - disc;
  }
};

std::size_t clamp_nonnegative(std::span<double> xs) {
  std::size_t count = 0;
  for (auto& x : xs)
    if (x < 0.0) {
      x = 0.0;
      ++count;
    }
  return count;
}

numerics::BvpProblem make_problem(const Rule& rule) {
  numerics::BvpProblem pb;
  pb.rhs = [rule](double t, std::span<const double> y, std::span<double> dy) {
    rule.field(t, y, dy);
  };
  pb.x0 = rule.spec.x0;
  pb.terminal_costate.assign(rule.spec.costate_count(), 0.0);
  pb.t0 = 0.0;
  pb.T = rule.spec.T;
  return pb;
}

std::optional<numerics::BvpSolution> try_solve(const numerics::BvpProblem& pb,
                                               const numerics::ShootingConfig& config) {
  try {
    return numerics::solve_two_point_bvp(pb, config);
  } catch (const SingularJacobian&) {
    return std::nullopt;
  } catch (const NumericalFailure&) {
    return std::nullopt;
  }
}

GameSolution solve_impl(const GameSpec& spec, const numerics::ShootingConfig& config) {
  spec.validate();
  config.validate();
  GameSolution out;
  out.spec = spec;
  const GameSpec& s = out.spec;

  std::optional<numerics::BvpSolution> sol = try_solve(make_problem(Rule{s, 1.0}), config);
  if (!sol || !sol->converged) {
    // Continuation in the profit rates: Q scaled by 0.1, 0.4, 0.7, 1.
    std::optional<numerics::BvpSolution> prev;
    for (int stage = 0; stage < 4; ++stage) {
      const double scale = 0.1 + 0.3 * stage;
      auto pb = make_problem(Rule{s, scale});
      if (prev) {
        const numerics::DenseSolution path = prev->path;
        pb.guess = [path](double t, std::span<double> y) { path.evaluate(t, y); };
      }
      auto next = try_solve(pb, config);
      out.homotopy_stages = static_cast<std::size_t>(stage) + 1;
      if (!next) break;
      prev = std::move(next);
    }
    if (prev && out.homotopy_stages == 4 && prev->converged) sol = std::move(prev);
    else if (prev && (!sol || prev->terminal_residual_norm < sol->terminal_residual_norm))
      sol = std::move(prev);
  }
  if (!sol) throw NumericalFailure("Nash boundary value problem: every shooting attempt failed");
  if (!sol->converged) {
    std::ostringstream os;
    os << "Nash boundary value problem did not converge: residual " << sol->terminal_residual_norm
       << " after " << sol->iterations << " Newton iterations (tolerance " << config.newton_tol << ")";
    throw NumericalFailure(os.str());
  }
  out.bvp = std::move(*sol);

  const std::size_t n = s.firms.size();
  const bool targeted = s.variant == GameVariant::targeted_duopoly;
  const Rule rule{s, 1.0};
  auto& traj = out.trajectory;
  const std::size_t N = nash_grid_points;
  std::vector<double> y(n + s.costate_count());
  for (std::size_t i = 0; i < N; ++i) {
    const double t = i + 1 == N ? s.T : s.T * static_cast<double>(i) / static_cast<double>(N - 1);
    out.bvp.path.evaluate(t, y);
    std::vector<double> sales(n), u(n), v(targeted ? n : 0);
    for (std::size_t k = 0; k < n; ++k) sales[k] = y[k] * s.m;
    const std::span<const double> ys(y);
    rule.controls(t, ys.subspan(0, n), ys.subspan(n), u, v);
    out.clamp_events += clamp_nonnegative(u) + clamp_nonnegative(v);
    traj.grid.push_back(t);
    try {
      traj.states.emplace_back(s.m, std::move(sales), t);
    } catch (const InvalidInput& e) {
      throw NumericalFailure(std::string("Nash path left the feasible share region: ") + e.what());
    }
    traj.controls.emplace_back(std::move(u), std::move(v));
    traj.costates.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
  }
  out.max_terminal_costate = 0.0;
  const auto& fin = out.bvp.path.final_state();
  for (std::size_t j = n; j < fin.size(); ++j)
    out.max_terminal_costate = std::max(out.max_terminal_costate, std::abs(fin[j]));
  return out;
}

}  // namespace

GameSolution solve_nash_nontargeted(const GameSpec& spec, const numerics::ShootingConfig& config) {
  if (spec.variant != GameVariant::nontargeted)
    throw InvalidInput("solve_nash_nontargeted called with a targeted game");
  return solve_impl(spec, config);
}

GameSolution solve_nash_targeted_duopoly(const GameSpec& spec,
                                         const numerics::ShootingConfig& config) {
  if (spec.variant != GameVariant::targeted_duopoly)
    throw InvalidInput("solve_nash_targeted_duopoly called with a nontargeted game");
  return solve_impl(spec, config);
}

GameSolution solve_nash(const GameSpec& spec, const numerics::ShootingConfig& config) {
  return solve_impl(spec, config);
}

namespace {

void check_time(const GameSolution& sol, double t) {
  if (!(t >= 0.0 && t <= sol.spec.T)) {
    std::ostringstream os;
    os << "time " << t << " outside the horizon [0, " << sol.spec.T << "]";
    throw InvalidInput(os.str());
  }
}

ControlVector evaluate_rule(const GameSolution& sol, double t, std::span<const double> x,
                            std::span<const double> phi, std::size_t* clamped) {
  const std::size_t n = sol.spec.firms.size();
  const bool targeted = sol.spec.variant == GameVariant::targeted_duopoly;
  std::vector<double> u(n), v(targeted ? n : 0);
  Rule{sol.spec, 1.0}.controls(t, x, phi, u, v);
  const std::size_t c = clamp_nonnegative(u) + clamp_nonnegative(v);
  if (clamped) *clamped += c;
  return ControlVector(std::move(u), std::move(v));
}

}  // namespace

ControlVector closed_loop_controls(const GameSolution& solution, double t,
                                   std::span<const double> live_shares, std::size_t* clamped) {
  check_time(solution, t);
  const std::size_t n = solution.spec.firms.size();
  if (live_shares.size() != n) throw DimensionMismatch("live state length differs from firm count");
  double total = 0.0;
  for (double x : live_shares) {
    if (!(std::isfinite(x) && x >= -1e-9 && x <= 1.0 + 1e-9))
      throw InvalidInput("live shares must lie in [0, 1]");
    total += x;
  }
  if (total > 1.0 + 1e-9) throw InvalidInput("live shares sum to more than 1");
  const auto y = solution.bvp.path(t);
  return evaluate_rule(solution, t, live_shares, std::span<const double>(y).subspan(n), clamped);
}

ControlVector open_loop_controls(const GameSolution& solution, double t, std::size_t* clamped) {
  check_time(solution, t);
  const std::size_t n = solution.spec.firms.size();
  const auto y = solution.bvp.path(t);
  const std::span<const double> ys(y);
  return evaluate_rule(solution, t, ys.subspan(0, n), ys.subspan(n), clamped);
}

ProfitResult profit(const GameSpec& spec, const Trajectory& trajectory, std::size_t k) {
  trajectory.validate();
  if (k >= spec.firms.size()) throw DimensionMismatch("firm index out of range");
  const std::size_t N = trajectory.grid.size();
  if (N < 2) throw InvalidInput("profit needs at least two grid points");
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto& st = trajectory.states[i];
    const auto& cv = trajectory.controls[i];
    if (st.size() != spec.firms.size() || cv.u().size() != spec.firms.size())
      throw DimensionMismatch("trajectory firm count differs from the game");
    const double x = st.s()[k] / st.m();
    double cost = cv.u()[k] * cv.u()[k];
    if (cv.has_v()) cost += cv.v()[k] * cv.v()[k];
    f[i] = (spec.Q(k) * x - cost) * std::exp(-spec.r * trajectory.grid[i]);
  }
  const auto& g = trajectory.grid;
  double fine = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) fine += 0.5 * (g[i + 1] - g[i]) * (f[i] + f[i + 1]);
  ProfitResult out{fine, 0.0};
  if ((N - 1) % 2 == 0 && N >= 3) {
    double coarse = 0.0;
    for (std::size_t i = 0; i + 2 < N; i += 2) coarse += 0.5 * (g[i + 2] - g[i]) * (f[i] + f[i + 2]);
    out.error_estimate = std::abs(fine - coarse) / 3.0;
  }
  return out;
}

double deviation_profit(const GameSolution& solution, const DeviationRecord& record,
                        OpponentResponse opponents, const numerics::IntegratorConfig& integrator) {
  const GameSpec& s = solution.spec;
  const std::size_t n = s.firms.size();
  const std::size_t k = record.firm;
  if (k >= n) throw DimensionMismatch("deviating firm index out of range");
  const bool targeted = s.variant == GameVariant::targeted_duopoly;
  const std::size_t d = n + s.costate_count();
  const Rule rule{s, 1.0};

  auto modify = [&](double base, double t) {
    if (record.kind == DeviationRecord::Kind::scale) return record.amount * base;
    const double z = (t - record.center) / record.width;
    return std::max(0.0, base + record.amount * std::exp(-z * z));
  };

  numerics::VectorField field = [&, buf = std::vector<double>(d), u = std::vector<double>(n),
                                 v = std::vector<double>(n), uo = std::vector<double>(n),
                                 vo = std::vector<double>(n)](
                                    double t, std::span<const double> y,
                                    std::span<double> dy) mutable {
    solution.bvp.path.evaluate(t, buf);
    const std::span<const double> path(buf);
    const auto xstar = path.subspan(0, n);
    const auto phi = path.subspan(n);
    const auto x = y.subspan(0, n);
    rule.controls(t, xstar, phi, uo, vo);
    if (opponents == OpponentResponse::closed_loop) {
      rule.controls(t, x, phi, u, v);
    } else {
      u = uo;
      v = vo;
    }
    clamp_nonnegative(u);
    clamp_nonnegative(uo);
    if (targeted) {
      clamp_nonnegative(v);
      clamp_nonnegative(vo);
    }
    // The deviator perturbs its own on-path schedule.
    u[k] = record.on_u ? modify(uo[k], t) : uo[k];
    if (targeted) v[k] = record.on_v ? modify(vo[k], t) : vo[k];
    if (targeted) {
      detail::targeted_field(1.0, s.firms, u, v, x, dy.subspan(0, n));
    } else {
      detail::nontargeted_field(1.0, s.firms, u, x, dy.subspan(0, n));
    }
    double cost = u[k] * u[k];
    if (targeted) cost += v[k] * v[k];
    dy[n] = (s.Q(k) * x[k] - cost) * std::exp(-s.r * t);
  };

  std::vector<double> y(s.x0);
  y.push_back(0.0);
  numerics::IntegratorConfig ic = integrator;
  ic.dense_output = false;
  const auto& nodes = solution.bvp.node_times;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    y = numerics::integrate_ivp(field, y, nodes[i], nodes[i + 1], ic).final_state();
  return y[n];
}

NashVerification verify_nash(const GameSolution& solution, const DeviationOptions& options) {
  if (!solution.bvp.converged) throw InvalidInput("verify_nash needs a converged solution");
  if (!(options.magnitude > 0.0 && std::isfinite(options.magnitude)))
    throw InvalidInput("deviation magnitude must be positive");
  const GameSpec& s = solution.spec;
  const std::size_t n = s.firms.size();
  const bool targeted = s.variant == GameVariant::targeted_duopoly;
  NashVerification out;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), pos(0.0, 1.0);

  out.max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    DeviationRecord identity;
    identity.firm = k;
    identity.amount = 1.0;
    identity.on_v = targeted;
    const double base = deviation_profit(solution, identity, options.opponents, options.integrator);
    out.equilibrium_profit.push_back(base);

    // Bump amplitudes are relative to the firm's peak on-path effort.
    double peak = 1e-3;
    for (const auto& cv : solution.trajectory.controls) {
      peak = std::max(peak, cv.u()[k]);
      if (targeted) peak = std::max(peak, cv.v()[k]);
    }
    for (std::size_t i = 0; i < options.perturbations; ++i) {
      DeviationRecord rec;
      rec.firm = k;
      const std::size_t which = targeted ? (i / 2) % 3 : 0;
      rec.on_u = which != 1;
      rec.on_v = targeted && which != 0;
      if (i % 2 == 0) {
        rec.kind = DeviationRecord::Kind::scale;
        rec.amount = 1.0 + options.magnitude * unit(rng);
      } else {
        rec.kind = DeviationRecord::Kind::bump;
        rec.amount = options.magnitude * peak * unit(rng);
        rec.center = s.T * pos(rng);
        rec.width = s.T * (0.05 + 0.25 * pos(rng));
      }
      rec.profit = deviation_profit(solution, rec, options.opponents, options.integrator);
      rec.gap = rec.profit - base;
      out.max_gap = std::max(out.max_gap, rec.gap);
      out.records.push_back(rec);
    }
  }
  if (out.records.empty()) out.max_gap = 0.0;
  return out;
}

}  // namespace adgame
