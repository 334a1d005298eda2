#include "adgame/numerics/bvp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "adgame/error.hpp"

namespace adgame::numerics {

void ShootingConfig::validate() const {
  if (segments < 1) throw InvalidInput("shooting needs at least one segment");
  if (!(newton_tol > 0.0)) throw InvalidInput("newton_tol must be positive");
  if (max_newton_iters < 1) throw InvalidInput("max_newton_iters must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("damping must lie in (0, 1]");
  if (fd_epsilon < 0.0) throw InvalidInput("fd_epsilon must be nonnegative");
  integrator.validate();
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

class Shooter {
 public:
  Shooter(const BvpProblem& pb, const ShootingConfig& cfg)
      : pb_(pb), cfg_(cfg), nx_(pb.x0.size()), np_(pb.terminal_costate.size()),
        d_(nx_ + np_), S_(cfg.segments) {
    nodes_.resize(S_ + 1);
    for (std::size_t i = 0; i <= S_; ++i)
      nodes_[i] = pb.t0 + (pb.T - pb.t0) * static_cast<double>(i) / static_cast<double>(S_);
    nodes_[S_] = pb.T;
  }

  std::size_t unknowns() const { return np_ + (S_ - 1) * d_; }
  const std::vector<double>& nodes() const { return nodes_; }

  std::vector<double> start_of(std::size_t seg, const std::vector<double>& z) const {
    std::vector<double> y(d_);
    if (seg == 0) {
      std::copy(pb_.x0.begin(), pb_.x0.end(), y.begin());
      std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(np_), y.begin() + nx_);
    } else {
      const auto off = static_cast<std::ptrdiff_t>(np_ + (seg - 1) * d_);
      std::copy(z.begin() + off, z.begin() + off + static_cast<std::ptrdiff_t>(d_), y.begin());
    }
    return y;
  }

  struct Evaluation {
    std::vector<double> residual;
    std::vector<DenseSolution> segments;
  };

  Evaluation evaluate(const std::vector<double>& z, bool dense) const {
    IntegratorConfig ic = cfg_.integrator;
    ic.dense_output = dense;
    Evaluation ev;
    ev.residual.assign(unknowns(), 0.0);
    for (std::size_t s = 0; s < S_; ++s) {
      const auto y = start_of(s, z);
      ev.segments.push_back(integrate_ivp(pb_.rhs, y, nodes_[s], nodes_[s + 1], ic));
      const auto& Y = ev.segments.back().final_state();
      if (s + 1 < S_) {
        const auto next = start_of(s + 1, z);
        for (std::size_t i = 0; i < d_; ++i) ev.residual[s * d_ + i] = Y[i] - next[i];
      } else {
        for (std::size_t i = 0; i < np_; ++i)
          ev.residual[(S_ - 1) * d_ + i] = Y[nx_ + i] - pb_.terminal_costate[i];
      }
    }
    return ev;
  }

  Eigen::MatrixXd jacobian(const std::vector<double>& z, const Evaluation& ev) const {
    const std::size_t N = unknowns();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N),
                                              static_cast<Eigen::Index>(N));
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t seg = j < np_ ? 0 : 1 + (j - np_) / d_;
      const std::size_t comp = j < np_ ? nx_ + j : (j - np_) % d_;
      auto y = start_of(seg, z);
      const double h = cfg_.fd_epsilon > 0.0 ? cfg_.fd_epsilon * std::max(1.0, std::abs(y[comp]))
                                             : root_eps * std::max(1.0, std::abs(y[comp]));
      const double base = y[comp];
      y[comp] = base + h;
      const double step = y[comp] - base;
      const auto Yp = replay_steps(pb_.rhs, y, ev.segments[seg].step_times());
      const auto& Y = ev.segments[seg].final_state();
      const auto col = static_cast<Eigen::Index>(j);
      if (seg + 1 < S_) {
        for (std::size_t i = 0; i < d_; ++i)
          J(static_cast<Eigen::Index>(seg * d_ + i), col) = (Yp[i] - Y[i]) / step;
      } else {
        for (std::size_t i = 0; i < np_; ++i)
          J(static_cast<Eigen::Index>((S_ - 1) * d_ + i), col) =
              (Yp[nx_ + i] - Y[nx_ + i]) / step;
      }
      if (seg >= 1) J(static_cast<Eigen::Index>((seg - 1) * d_ + comp), col) -= 1.0;
    }
    return J;
  }

  std::vector<double> initial_guess() const {
    std::vector<double> z(unknowns(), 0.0);
    if (pb_.guess) {
      std::vector<double> y(d_);
      for (std::size_t s = 0; s < S_; ++s) {
        pb_.guess(nodes_[s], y);
        if (s == 0) {
          std::copy(y.begin() + static_cast<std::ptrdiff_t>(nx_), y.end(), z.begin());
        } else {
          std::copy(y.begin(), y.end(), z.begin() + static_cast<std::ptrdiff_t>(np_ + (s - 1) * d_));
        }
      }
      return z;
    }
    // Costates at their terminal value everywhere, states from a forward sweep.
    std::copy(pb_.terminal_costate.begin(), pb_.terminal_costate.end(), z.begin());
    IntegratorConfig ic = cfg_.integrator;
    ic.dense_output = false;
    for (std::size_t s = 0; s + 1 < S_; ++s) {
      const auto y = start_of(s, z);
      const auto seg = integrate_ivp(pb_.rhs, y, nodes_[s], nodes_[s + 1], ic);
      const auto& Y = seg.final_state();
      const auto off = np_ + s * d_;
      std::copy(Y.begin(), Y.begin() + static_cast<std::ptrdiff_t>(nx_),
                z.begin() + static_cast<std::ptrdiff_t>(off));
      std::copy(pb_.terminal_costate.begin(), pb_.terminal_costate.end(),
                z.begin() + static_cast<std::ptrdiff_t>(off + nx_));
    }
    return z;
  }

 private:
  const BvpProblem& pb_;
  const ShootingConfig& cfg_;
  std::size_t nx_, np_, d_, S_;
  std::vector<double> nodes_;
};

}  // namespace

BvpSolution solve_two_point_bvp(const BvpProblem& problem, const ShootingConfig& config) {
  config.validate();
  if (!problem.rhs) throw InvalidInput("boundary value problem has no vector field");
  if (!(problem.T > problem.t0)) throw InvalidInput("boundary value problem needs T > t0");
  if (problem.terminal_costate.empty()) throw InvalidInput("no costates in boundary problem");

  Shooter shooter(problem, config);
  std::vector<double> z = shooter.initial_guess();
  auto ev = shooter.evaluate(z, false);
  double res = max_abs(ev.residual);
  double merit = two_norm(ev.residual);
  double rcond = 0.0;
  std::size_t iters = 0;
  int polish = 0;

  while (iters < config.max_newton_iters) {
    if (res <= config.newton_tol) {
      // A couple of extra steps push the iterate well below the tolerance so
      // that single-shot re-integration from t0 stays within it.
      if (polish >= 2 || res <= 1e-3 * config.newton_tol) break;
      ++polish;
    }
    ++iters;
    const Eigen::MatrixXd J = shooter.jacobian(z, ev);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    rcond = lu.rcond();
    if (!(rcond >= 1e-14)) throw SingularJacobian("shooting Jacobian is numerically singular", rcond);
    const Eigen::Map<const Eigen::VectorXd> r(ev.residual.data(),
                                              static_cast<Eigen::Index>(ev.residual.size()));
    const Eigen::VectorXd delta = lu.solve(-r);

    double lambda = config.damping;
    bool accepted = false;
    for (int k = 0; k < 12; ++k, lambda *= 0.5) {
      std::vector<double> trial(z);
      for (std::size_t i = 0; i < z.size(); ++i)
        trial[i] += lambda * delta(static_cast<Eigen::Index>(i));
      std::optional<Shooter::Evaluation> tev;
      try {
        tev = shooter.evaluate(trial, false);
      } catch (const NumericalFailure&) {
        continue;
      }
      const double tmerit = two_norm(tev->residual);
      if (tmerit <= (1.0 - 1e-4 * lambda) * merit) {
        z = std::move(trial);
        ev = std::move(*tev);
        merit = tmerit;
        res = max_abs(ev.residual);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  BvpSolution out;
  auto final_ev = shooter.evaluate(z, true);
  out.terminal_residual_norm = max_abs(final_ev.residual);
  out.converged = out.terminal_residual_norm <= config.newton_tol;
  out.iterations = iters;
  out.condition_estimate = rcond;
  out.node_times = shooter.nodes();
  out.initial = shooter.start_of(0, z);
  for (const auto& seg : final_ev.segments) out.path.append(seg);
  return out;
}

}  // namespace adgame::numerics
