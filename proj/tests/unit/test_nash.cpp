#include <doctest.h>

#include <cmath>
#include <vector>

#include "adgame/error.hpp"
#include "adgame/nash.hpp"

using namespace adgame;

namespace {

GameSpec reference_game(GameVariant variant, double c1, double c2) {
  GameSpec s;
  s.r = 0.1;
  s.T = 10.0;
  s.x0 = {0.4, 0.4};
  s.variant = variant;
  FirmParams a, b;
  a.rho = 1.0;
  a.sigma = 1.2;
  a.c = c1;
  a.q = 1.0;
  b.rho = 1.2;
  b.sigma = 1.0;
  b.c = c2;
  b.q = 1.0;
  s.firms = {a, b};
  return s;
}

double share(const GameSolution& sol, std::size_t i, std::size_t k) {
  return sol.trajectory.states[i].s()[k] / sol.trajectory.states[i].m();
}

}  // namespace

TEST_CASE("nontargeted game, zero decay") {
  auto sol = solve_nash(reference_game(GameVariant::nontargeted, 0.0, 0.0));
  CHECK(sol.bvp.converged);
  CHECK(sol.bvp.terminal_residual_norm <= 1e-8);
  CHECK(sol.max_terminal_costate <= 1e-8);
  CHECK(sol.trajectory.grid.size() == nash_grid_points);
  CHECK(market_potential(sol.trajectory.states.back()) < 0.02);
  double spread = 0.0;
  for (const auto& phi : sol.trajectory.costates) spread = std::max(spread, std::abs(phi[0] - phi[1]));
  CHECK(spread <= 1e-8);
}

TEST_CASE("nontargeted game with decay") {
  auto sol = solve_nash(reference_game(GameVariant::nontargeted, 0.1, 0.2));
  CHECK(sol.bvp.terminal_residual_norm <= 1e-8);
  CHECK(market_potential(sol.trajectory.states.back()) > 0.0);
  CHECK(share(sol, nash_grid_points - 1, 1) > share(sol, nash_grid_points - 1, 0));
  // Frozen terminal shares.
  CHECK(share(sol, nash_grid_points - 1, 0) == doctest::Approx(0.3640).epsilon(1e-3));
  CHECK(share(sol, nash_grid_points - 1, 1) == doctest::Approx(0.3889).epsilon(1e-3));

  SUBCASE("controls") {
    for (double t : {0.0, 1.7, 5.0, 9.99}) {
      auto ol = open_loop_controls(sol, t);
      auto y = sol.bvp.path(t);
      auto cl = closed_loop_controls(sol, t, std::vector<double>(y.begin(), y.begin() + 2));
      CHECK(ol.u()[0] == cl.u()[0]);
      CHECK(ol.u()[1] == cl.u()[1]);
    }
    auto end = open_loop_controls(sol, 10.0);
    CHECK(std::abs(end.u()[0]) <= 1e-8);
    CHECK(std::abs(end.u()[1]) <= 1e-8);
    auto sat = closed_loop_controls(sol, 3.0, std::vector<double>{1.0, 0.0});
    CHECK(sat.u()[0] == 0.0);
    CHECK_THROWS_AS(open_loop_controls(sol, 10.5), InvalidInput);
    CHECK_THROWS_AS(closed_loop_controls(sol, 1.0, std::vector<double>{0.7, 0.7}), InvalidInput);
  }

  SUBCASE("deviations") {
    DeviationRecord same;
    same.firm = 0;
    same.amount = 1.0;
    const double base = deviation_profit(sol, same, OpponentResponse::open_loop, {1e-10, 1e-12});
    CHECK(deviation_profit(sol, same, OpponentResponse::open_loop, {1e-10, 1e-12}) - base == 0.0);

    // quadrature on the grid agrees with the integrated reference
    CHECK(profit(sol.spec, sol.trajectory, 0).value == doctest::Approx(base).epsilon(1e-5));

    double best_gap = -1.0, best_alpha = 0.0;
    for (double alpha : {0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2}) {
      DeviationRecord d = same;
      d.amount = alpha;
      const double gap =
          deviation_profit(sol, d, OpponentResponse::open_loop, {1e-10, 1e-12}) - base;
      if (alpha == 1.1) CHECK(gap < 0.0);
      if (gap > best_gap) {
        best_gap = gap;
        best_alpha = alpha;
      }
    }
    CHECK(best_alpha == 1.0);

    auto v = verify_nash(sol);
    CHECK(v.records.size() == 40);
    CHECK(v.max_gap <= 1e-6);
  }
}

TEST_CASE("targeted duopoly") {
  auto a = solve_nash(reference_game(GameVariant::targeted_duopoly, 0.0, 0.0));
  CHECK(a.bvp.terminal_residual_norm <= 1e-8);
  CHECK(a.max_terminal_costate <= 1e-8);
  CHECK(share(a, nash_grid_points - 1, 1) > share(a, nash_grid_points - 1, 0));
  CHECK(a.trajectory.costates.front().size() == 4);

  auto b = solve_nash(reference_game(GameVariant::targeted_duopoly, 0.1, 0.2));
  CHECK(b.bvp.terminal_residual_norm <= 1e-8);
  for (std::size_t i = 1; i < nash_grid_points; ++i) CHECK(share(b, i, 0) > share(b, i, 1));

  auto v = verify_nash(b);
  CHECK(v.max_gap <= 1e-6);
  bool touched_v = false;
  for (const auto& r : v.records) touched_v = touched_v || r.on_v;
  CHECK(touched_v);

  auto spec = reference_game(GameVariant::targeted_duopoly, 0.1, 0.2);
  spec.firms.push_back(spec.firms[0]);
  spec.x0 = {0.3, 0.3, 0.3};
  CHECK_THROWS_AS(solve_nash(spec), Unsupported);
}

TEST_CASE("profit quadrature") {
  GameSpec s;
  FirmParams f;
  f.q = 1.0;
  s.firms = {f};
  s.x0 = {0.0};
  s.r = 0.1;
  s.T = 1.0;
  Trajectory tr;
  for (int i = 0; i <= 500; ++i) {
    tr.grid.push_back(i / 500.0);
    tr.states.emplace_back(1.0, std::vector<double>{1.0}, i / 500.0);
    tr.controls.emplace_back(std::vector<double>{0.0});
  }
  CHECK(profit(s, tr, 0).value == doctest::Approx((1 - std::exp(-0.1)) / 0.1).epsilon(1e-8));

  Trajectory cost;
  s.r = 0.0;
  for (int i = 0; i <= 500; ++i) {
    cost.grid.push_back(i / 250.0);
    cost.states.emplace_back(1.0, std::vector<double>{0.0}, i / 250.0);
    cost.controls.emplace_back(std::vector<double>{1.0});
  }
  CHECK(profit(s, cost, 0).value == doctest::Approx(-2.0).epsilon(1e-14));

  for (auto& c : cost.controls) c = ControlVector({0.0});
  CHECK(profit(s, cost, 0).value == 0.0);

  cost.controls.pop_back();
  CHECK_THROWS(profit(s, cost, 0));
}

TEST_CASE("game validation") {
  auto s = reference_game(GameVariant::nontargeted, 0.1, 0.2);
  s.x0 = {0.7, 0.7};
  CHECK_THROWS_AS(solve_nash(s), InvalidInput);
  s = reference_game(GameVariant::nontargeted, 0.1, 0.2);
  s.T = 0.0;
  CHECK_THROWS_AS(solve_nash(s), InvalidInput);
  s = reference_game(GameVariant::nontargeted, 0.1, 0.2);
  s.x0 = {0.4};
  CHECK_THROWS_AS(solve_nash(s), DimensionMismatch);
}
