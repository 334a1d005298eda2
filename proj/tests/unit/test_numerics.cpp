#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "adgame/error.hpp"
#include "adgame/numerics/bvp.hpp"
#include "adgame/numerics/ode.hpp"
#include "adgame/numerics/quadrature.hpp"
#include "adgame/numerics/scalar.hpp"

using namespace adgame;
using namespace adgame::numerics;

namespace {

void decay(double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }

double decay_error(double tol) {
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol;
  std::vector<double> y0{1.0};
  auto sol = integrate_ivp(decay, y0, 0.0, 1.0, cfg);
  return std::abs(sol.final_state()[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("integrator: exponential decay") {
  std::vector<double> y0{1.0};
  auto sol = integrate_ivp(decay, y0, 0.0, 1.0);
  CHECK(std::abs(sol.final_state()[0] - std::exp(-1.0)) < 1e-8);
  // dense output between steps
  for (double t : {0.013, 0.25, 0.5, 0.77, 0.999})
    CHECK(std::abs(sol(t)[0] - std::exp(-t)) < 1e-8);
  CHECK(sol(0.0)[0] == 1.0);
  CHECK(sol(1.0)[0] == sol.final_state()[0]);
  CHECK_THROWS_AS(sol(1.5), InvalidInput);
}

TEST_CASE("integrator: zero field keeps the state exactly") {
  auto zero = [](double, std::span<const double>, std::span<double> dy) {
    for (auto& v : dy) v = 0.0;
  };
  std::vector<double> y0{0.3, -2.0, 7.5};
  auto sol = integrate_ivp(zero, y0, 0.0, 10.0);
  CHECK(sol.final_state() == y0);
  CHECK(sol(3.3) == y0);
}

TEST_CASE("integrator: error shrinks with tolerance") {
  const double e1 = decay_error(1e-6), e2 = decay_error(1e-7), e3 = decay_error(1e-8);
  CHECK(e2 * 10.0 <= e1 * 1.0001);
  CHECK(e3 * 10.0 <= e2 * 1.0001);
}

TEST_CASE("integrator: replay reproduces the adaptive run bitwise") {
  auto osc = [](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0] + 0.1 * std::sin(t);
  };
  std::vector<double> y0{1.0, 0.0};
  auto sol = integrate_ivp(osc, y0, 0.0, 5.0);
  auto y = replay_steps(osc, y0, sol.step_times());
  CHECK(y == sol.final_state());
}

TEST_CASE("integrator: failures") {
  auto bad = [](double, std::span<const double>, std::span<double> dy) { dy[0] = NAN; };
  std::vector<double> y0{1.0};
  CHECK_THROWS_AS(integrate_ivp(bad, y0, 0.0, 1.0), NumericalFailure);
  auto blowup = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[0] * y[0];
  };
  CHECK_THROWS_AS(integrate_ivp(blowup, y0, 0.0, 2.0), NumericalFailure);
  CHECK_THROWS_AS(integrate_ivp(decay, y0, 1.0, 1.0), InvalidInput);
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate_ivp(decay, y0, 0.0, 1.0, cfg), InvalidInput);
}

TEST_CASE("quadrature") {
  auto one = [](double) { return 1.0; };
  CHECK(quadrature(one, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-15));
  auto ex = [](double t) { return std::exp(-0.1 * t); };
  CHECK(std::abs(quadrature(ex, 0.0, 1.0).value - (1.0 - std::exp(-0.1)) / 0.1) < 1e-13);
  auto step = [](double t) { return t < 0.37 ? 2.0 : -0.5; };
  std::vector<double> bp{0.37};
  const double exact = 2.0 * 0.37 - 0.5 * 0.63;
  CHECK(std::abs(quadrature(step, 0.0, 1.0, bp).value - exact) < 1e-14);
  CHECK(quadrature(ex, 1.0, 0.0).value < 0.0);
  auto nan = [](double) { return NAN; };
  CHECK_THROWS_AS(quadrature(nan, 0.0, 1.0), NumericalFailure);
}

TEST_CASE("root finder") {
  const double r = find_root_bracketed([](double x) { return x * x - 2.0; }, 1.0, 2.0);
  CHECK(std::abs(r - std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(find_root_bracketed([](double x) { return x; }, -1.0, 1.0)) < 1e-12);
  CHECK_THROWS_AS(find_root_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                  InvalidInput);
  auto f = [](double x) { return std::cos(x) - x; };
  CHECK(find_root_bracketed(f, 0.0, 1.0) == find_root_bracketed(f, 0.0, 1.0));
}

TEST_CASE("bounded minimizer") {
  auto sq = [](double x) { return (x - 0.3) * (x - 0.3); };
  CHECK(std::abs(minimize_scalar_bounded(sq, 0.0, 1.0).argmin - 0.3) < 1e-8);
  auto m = minimize_scalar_global([](double x) { return std::cos(x); }, 0.0, std::numbers::pi);
  CHECK(std::abs(m.argmin - std::numbers::pi) < 1e-8);
  CHECK(m.value == doctest::Approx(-1.0));
  // two wells: the deeper one is on the right
  auto wells = [](double x) { return std::pow(x * x - 1.0, 2) - 0.3 * x; };
  CHECK(minimize_scalar_global(wells, -2.0, 2.0).argmin > 0.5);
  CHECK_THROWS_AS(minimize_scalar_bounded([](double) { return NAN; }, 0.0, 1.0),
                  NumericalFailure);
}

TEST_CASE("shooting: linear problem against the analytic solution") {
  // x' = -x + p, p' = p - 1, x(0) = 0, p(1) = 0.
  BvpProblem pb;
  pb.rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0] + y[1];
    dy[1] = y[1] - 1.0;
  };
  pb.x0 = {0.0};
  pb.terminal_costate = {0.0};
  pb.T = 1.0;
  auto sol = solve_two_point_bvp(pb);
  REQUIRE(sol.converged);
  CHECK(sol.terminal_residual_norm <= 1e-8);
  for (int i = 0; i <= 20; ++i) {
    const double t = i / 20.0;
    const double p = 1.0 - std::exp(t - 1.0);
    const double x = 1.0 - 0.5 * std::exp(t - 1.0) + (0.5 * std::exp(-1.0) - 1.0) * std::exp(-t);
    const auto y = sol.path(t);
    CHECK(std::abs(y[0] - x) < 1e-8);
    CHECK(std::abs(y[1] - p) < 1e-8);
  }
  // single-shot re-integration from the recovered initial costate
  auto whole = integrate_ivp(pb.rhs, sol.initial, 0.0, 1.0, ShootingConfig{}.integrator);
  CHECK(std::abs(whole.final_state()[1]) <= 10 * 1e-8);
}

TEST_CASE("shooting: short horizon") {
  BvpProblem pb;
  pb.rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0] + y[1];
    dy[1] = y[1] - 1.0;
  };
  pb.x0 = {0.4};
  pb.terminal_costate = {0.0};
  pb.T = 1e-6;
  auto sol = solve_two_point_bvp(pb);
  REQUIRE(sol.converged);
  CHECK(std::abs(sol.initial[1]) < 1e-5);
  CHECK(std::abs(sol.path(0.5e-6)[0] - 0.4) < 1e-5);
}

TEST_CASE("shooting: nonlinear problem, segment counts agree") {
  // max int (x - u^2) with x' = u(1 - x) - 0.2x
  BvpProblem pb;
  pb.rhs = [](double, std::span<const double> y, std::span<double> dy) {
    const double u = 0.5 * y[1] * (1.0 - y[0]);
    dy[0] = u * (1.0 - y[0]) - 0.2 * y[0];
    dy[1] = 0.2 * y[1] + u * y[1] - 1.0;
  };
  pb.x0 = {0.1};
  pb.terminal_costate = {0.0};
  pb.T = 2.0;
  ShootingConfig three;
  three.segments = 3;
  auto a = solve_two_point_bvp(pb, three);
  auto b = solve_two_point_bvp(pb);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(std::abs(a.initial[1] - b.initial[1]) < 1e-8);
  CHECK(b.iterations >= 1);
}

TEST_CASE("shooting config validation") {
  ShootingConfig cfg;
  cfg.segments = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.damping = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}
