#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "adgame/equilibrium.hpp"
#include "adgame/error.hpp"
#include "adgame/market.hpp"

using namespace adgame;

namespace {

FirmParams firm(double rho, double c, double sigma = 1.0) {
  FirmParams f;
  f.rho = rho;
  f.sigma = sigma;
  f.c = c;
  return f;
}

}  // namespace

TEST_CASE("market potential") {
  CHECK(market_potential(MarketState(1.0, {0.4, 0.4})) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(market_potential(MarketState(1.0, {1.0})) == 0.0);
  CHECK(market_potential(MarketState(2.0, {0.3, 0.5, 0.2})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(MarketState(1.0, {0.6, 0.6}), InvalidInput);
  CHECK_THROWS_AS(MarketState(1.0, {-0.1}), InvalidInput);
  CHECK_THROWS_AS(MarketState(0.0, {0.0}), InvalidInput);
  CHECK_THROWS_AS(MarketState(1.0, {NAN}), InvalidInput);
}

TEST_CASE("controls reject negative or non-finite efforts") {
  CHECK_THROWS_AS(ControlVector({-0.1}), InvalidInput);
  CHECK_THROWS_AS(ControlVector({0.1}, {INFINITY}), InvalidInput);
  CHECK_NOTHROW(ControlVector({0.0, 1.0}, {2.0, 0.0}));
}

TEST_CASE("nontargeted rhs") {
  std::vector<FirmParams> two{firm(1, 0), firm(1, 0)};
  auto zero = nontargeted_rhs(MarketState(1.0, {0.3, 0.2}), two, ControlVector({0.0, 0.0}));
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);

  std::vector<FirmParams> one{firm(1, 0)};
  auto d = nontargeted_rhs(MarketState(1.0, {0.5}), one, ControlVector({1.0}));
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(nontargeted_rhs(MarketState(1.0, {0.5}), one, ControlVector({1.0, 1.0})),
                  DimensionMismatch);

  // fixed point for random positive data
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.05, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 5;
    std::vector<FirmParams> p;
    std::vector<double> u;
    for (std::size_t k = 0; k < n; ++k) {
      p.push_back(firm(U(rng), U(rng)));
      u.push_back(U(rng));
    }
    const double m = U(rng);
    auto ss = nontargeted_steady_state(m, p, ControlVector(u));
    auto r = nontargeted_rhs(MarketState(m, ss.s_star), p, ControlVector(u));
    for (double x : r) CHECK(std::abs(x) <= 1e-12);
  }
}

TEST_CASE("targeted rhs") {
  std::vector<FirmParams> p{firm(1, 0.1), firm(1, 0.0)};
  auto d = targeted_rhs(MarketState(1.0, {0.3, 0.3}), p, ControlVector({0.5, 0.4}, {0.5, 0.0}));
  CHECK(d[0] == doctest::Approx(0.2).epsilon(1e-14));

  std::vector<FirmParams> q{firm(1, 0.3, 0.7), firm(2, 0.1, 1.5)};
  auto z = targeted_rhs(MarketState(1.0, {0.0, 0.0}), q, ControlVector({0.2, 0.9}, {0.4, 0.6}));
  CHECK(z[0] == doctest::Approx(0.7 * 0.4).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(1.5 * 0.6).epsilon(1e-15));

  CHECK_THROWS_AS(targeted_rhs(MarketState(1.0, {0.3, 0.3}), p, ControlVector({0.5, 0.4})),
                  InvalidInput);

  SUBCASE("reduces to the nontargeted model bitwise") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + trial % 5;
      std::vector<FirmParams> ps;
      std::vector<double> u, s;
      const double m = 0.5 + U(rng);
      double budget = m;
      for (std::size_t k = 0; k < n; ++k) {
        const double rho = U(rng);
        ps.push_back(firm(rho, U(rng), rho));
        u.push_back(U(rng));
        const double sk = budget * 0.9 * std::uniform_real_distribution<double>(0, 1)(rng) / n;
        s.push_back(sk);
      }
      MarketState st(m, s);
      auto a = targeted_rhs(st, ps, ControlVector(u, u));
      auto b = nontargeted_rhs(st, ps, ControlVector(u));
      for (std::size_t k = 0; k < n; ++k) CHECK(a[k] == b[k]);
    }
  }
}

TEST_CASE("tiered rhs") {
  std::vector<FirmParams> p{firm(1, 0.1), firm(1, 0.2)};
  const std::vector<double> u{0.3, 0.0};
  auto d = tiered_rhs(MarketState(1.0, {0.2, 0.3}), p, 0.6, u);
  CHECK(d[0] == doctest::Approx(0.37).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(0.15).epsilon(1e-14));

  const std::vector<double> none{0.0, 0.0};
  auto e = tiered_rhs(MarketState(1.0, {0.2, 0.3}), p, 0.6, none);
  CHECK(e[0] == doctest::Approx(0.6 * 0.5 - 0.1 * 0.2).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(0.6 * 0.5 - 0.2 * 0.3).epsilon(1e-14));

  auto ss = tier_steady_state_two(1.0, p, 0.6, 0.3);
  auto r = tiered_rhs(MarketState(1.0, ss.s_star), p, 0.6, u);
  CHECK(std::abs(r[0]) <= 1e-12);
  CHECK(std::abs(r[1]) <= 1e-12);
}

TEST_CASE("control policies") {
  auto pc = ControlPolicy::piecewise_constant({0.0, 1.0, 3.0},
                                              {ControlVector({1.0}), ControlVector({2.0}),
                                               ControlVector({0.5})});
  CHECK(pc.evaluate(0.5).u()[0] == 1.0);
  CHECK(pc.evaluate(1.0).u()[0] == 2.0);
  CHECK(pc.evaluate(10.0).u()[0] == 0.5);
  CHECK(pc.u_integral(0, 0.0, 4.0) == doctest::Approx(1.0 + 4.0 + 0.5));

  auto tl = ControlPolicy::tabulated_linear({0.0, 2.0}, {ControlVector({0.0}), ControlVector({2.0})});
  CHECK(tl.evaluate(0.5).u()[0] == doctest::Approx(0.5));
  CHECK(tl.u_integral(0, 0.0, 3.0) == doctest::Approx(2.0 + 2.0));

  CHECK_THROWS_AS(ControlPolicy::piecewise_constant({1.0, 0.0},
                                                    {ControlVector({1.0}), ControlVector({1.0})}),
                  InvalidInput);
  CHECK_THROWS_AS(ControlPolicy::tabulated_linear({0.0, 1.0},
                                                  {ControlVector({1.0}), ControlVector({1.0, 2.0})}),
                  DimensionMismatch);
}

TEST_CASE("closed form") {
  std::vector<FirmParams> one{firm(1.3, 0.2)};
  const double u = 0.7, s0 = 0.1, m = 2.0;
  auto pol = ControlPolicy::constant(ControlVector({u}));
  const double a = 0.2 + 1.3 * u, sinf = m * 1.3 * u / a;
  for (double t : {0.0, 0.5, 3.0, 10.0}) {
    auto st = nontargeted_closed_form(MarketState(m, {s0}), one, pol, t);
    CHECK(st.s()[0] == doctest::Approx(sinf + (s0 - sinf) * std::exp(-a * t)).epsilon(1e-13));
  }

  std::vector<FirmParams> two{firm(1, 0.3), firm(1, 0.7)};
  auto idle = ControlPolicy::constant(ControlVector({0.0, 0.0}));
  auto st = nontargeted_closed_form(MarketState(1.0, {0.4, 0.5}), two, idle, 2.0);
  CHECK(st.s()[0] == doctest::Approx(0.4 * std::exp(-0.6)).epsilon(1e-14));
  CHECK(st.s()[1] == doctest::Approx(0.5 * std::exp(-1.4)).epsilon(1e-14));

  SUBCASE("piecewise policy matches the integrator") {
    auto pol2 = ControlPolicy::piecewise_constant(
        {0.0, 2.5, 6.0}, {ControlVector({0.4, 0.9}), ControlVector({1.2, 0.1}),
                          ControlVector({0.0, 0.5})});
    MarketState init(1.0, {0.1, 0.2});
    auto traj = simulate(Model::nontargeted, init, two, pol2, 10.0, 101);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
      auto cf = nontargeted_closed_form(init, two, pol2, traj.grid[i]);
      for (std::size_t k = 0; k < 2; ++k)
        worst = std::max(worst, std::abs(cf.s()[k] - traj.states[i].s()[k]));
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("tabulated policy matches the integrator") {
    auto pol3 = ControlPolicy::tabulated_linear(
        {0.0, 4.0, 10.0}, {ControlVector({0.0, 1.0}), ControlVector({1.0, 0.2}),
                           ControlVector({0.3, 0.3})});
    MarketState init(1.0, {0.3, 0.1});
    auto traj = simulate(Model::nontargeted, init, two, pol3, 10.0, 51);
    auto cf = nontargeted_closed_form(init, two, pol3, 10.0);
    CHECK(std::abs(cf.s()[0] - traj.states.back().s()[0]) < 1e-6);
    CHECK(std::abs(cf.s()[1] - traj.states.back().s()[1]) < 1e-6);
  }
}

TEST_CASE("simulation stays in the share box") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FirmParams> p{firm(U(rng), U(rng), U(rng)), firm(U(rng), U(rng), U(rng)),
                              firm(U(rng), U(rng), U(rng))};
    auto pol = ControlPolicy::constant(
        ControlVector({U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}));
    auto traj = simulate(Model::targeted, MarketState(1.0, {0.2, 0.3, 0.1}), p, pol, 8.0, 41);
    for (const auto& st : traj.states) {
      double total = 0.0;
      for (double s : st.s()) {
        CHECK(s >= -1e-9);
        total += s;
      }
      CHECK(total <= 1.0 + 1e-9);
    }
  }
  CHECK_THROWS_AS(simulate(Model::nontargeted, MarketState(1.0, {0.2}), std::vector{firm(1, 0)},
                           ControlPolicy::constant(ControlVector({1.0})), -1.0),
                  InvalidInput);
}
