#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "adgame/equilibrium.hpp"
#include "adgame/error.hpp"

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

TEST_CASE("nontargeted steady state") {
  std::vector<FirmParams> p{firm(1, 0), firm(1, 0)};
  auto r = nontargeted_steady_state(1.0, p, ControlVector({1.0, 1.0}));
  CHECK(r.s_star[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.s_star[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.epsilon_star == doctest::Approx(0.0));

  std::vector<FirmParams> q{firm(1, 2), firm(1, 2)};
  auto s = nontargeted_steady_state(1.0, q, ControlVector({1.0, 1.0}));
  CHECK(s.s_star[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.epsilon_star == doctest::Approx(0.5).epsilon(1e-15));

  std::vector<FirmParams> idle{firm(1, 0)};
  CHECK_THROWS_AS(nontargeted_steady_state(1.0, idle, ControlVector({0.0})), DegenerateDenominator);
}

TEST_CASE("targeted duopoly steady state") {
  std::vector<FirmParams> p{firm(1, 0.3), firm(1, 0.2)};
  const double h = std::sqrt(0.5);
  auto r = targeted_steady_state_duopoly(1.0, p,
                                         ControlVector({std::sqrt(0.76), h}, {std::sqrt(0.24), h}));
  CHECK(r.s_star[0] == doctest::Approx(0.429).epsilon(0.005 / 0.429));
  CHECK(r.s_star[1] == doctest::Approx(0.397).epsilon(0.005 / 0.397));
  CHECK(r.residual_norm <= 1e-10);

  std::vector<FirmParams> sym{firm(1.2, 0.4, 0.8), firm(1.2, 0.4, 0.8)};
  auto e = targeted_steady_state(2.0, sym, ControlVector({0.6, 0.6}, {0.3, 0.3}));
  CHECK(e.s_star[0] == e.s_star[1]);

  SUBCASE("u = v and rho = sigma reduce to the nontargeted formula") {
    std::vector<FirmParams> q{firm(0.7, 0.3, 0.7), firm(1.4, 0.1, 1.4)};
    auto a = targeted_steady_state(1.5, q, ControlVector({0.4, 0.9}, {0.4, 0.9}));
    auto b = nontargeted_steady_state(1.5, q, ControlVector({0.4, 0.9}));
    CHECK(a.s_star[0] == doctest::Approx(b.s_star[0]).epsilon(1e-14));
    CHECK(a.s_star[1] == doctest::Approx(b.s_star[1]).epsilon(1e-14));
  }
}

TEST_CASE("targeted triopoly steady state") {
  std::vector<FirmParams> same{firm(1.1, 0.2, 0.9), firm(1.1, 0.2, 0.9), firm(1.1, 0.2, 0.9)};
  auto r = targeted_steady_state(1.0, same, ControlVector({0.5, 0.5, 0.5}, {0.7, 0.7, 0.7}));
  CHECK(r.s_star[0] == doctest::Approx(r.s_star[1]).epsilon(1e-14));
  CHECK(r.s_star[1] == doctest::Approx(r.s_star[2]).epsilon(1e-14));

  // an inert third firm leaves the duopoly values
  std::vector<FirmParams> p{firm(1.0, 0.3, 1.2), firm(0.8, 0.1, 0.6), firm(1.0, 0.5)};
  auto tri = targeted_steady_state(1.0, p, ControlVector({0.4, 0.9, 0.0}, {0.6, 0.2, 0.0}));
  std::vector<FirmParams> p2(p.begin(), p.begin() + 2);
  auto duo = targeted_steady_state(1.0, p2, ControlVector({0.4, 0.9}, {0.6, 0.2}));
  CHECK(std::abs(tri.s_star[2]) < 1e-15);
  CHECK(tri.s_star[0] == doctest::Approx(duo.s_star[0]).epsilon(1e-13));
  CHECK(tri.s_star[1] == doctest::Approx(duo.s_star[1]).epsilon(1e-13));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.01, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<FirmParams> q{firm(U(rng), U(rng), U(rng)), firm(U(rng), U(rng), U(rng)),
                              firm(U(rng), U(rng), U(rng))};
    auto s = targeted_steady_state(U(rng), q,
                                   ControlVector({U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}));
    CHECK(s.residual_norm <= 1e-10);
  }
}

TEST_CASE("targeted steady state sizes") {
  std::vector<FirmParams> four(4, firm(1, 0.1));
  CHECK_THROWS_AS(targeted_steady_state(1.0, four, ControlVector({1, 1, 1, 1}, {1, 1, 1, 1})),
                  Unsupported);
  std::vector<FirmParams> two{firm(1, 0.1), firm(1, 0.1)};
  CHECK_THROWS_AS(targeted_steady_state(1.0, two, ControlVector({1, 1})), InvalidInput);
}

TEST_CASE("tier steady state") {
  std::vector<FirmParams> p{firm(1, 0.1), firm(1, 0.2)};
  const double u1 = 0.25, v = std::sqrt(1 - u1 * u1);
  auto r = tier_steady_state_two(1.0, p, v, u1);
  const double num = 0.1 * (0.2 + u1);
  const double direct = num / ((0.1 + 0.2 + 2 * u1) * v + num);
  CHECK(r.epsilon_star == doctest::Approx(direct).epsilon(1e-14));
  CHECK(r.residual_norm <= 1e-10);
}

TEST_CASE("stability") {
  std::vector<FirmParams> p{firm(1, 0.4), firm(1, 0.4)};
  auto r = duopoly_stability(p, ControlVector({0.7, 0.7}, {0.2, 0.2}));
  CHECK(r.eigenvalues[0].real() == doctest::Approx(-(0.4 + 0.7 + 0.2 - 0.5)).epsilon(1e-14));
  CHECK(r.eigenvalues[1].real() == doctest::Approx(-(0.4 + 0.7 + 0.2 + 0.5)).epsilon(1e-14));
  CHECK(r.stable);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.001, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<FirmParams> q{firm(U(rng), U(rng), U(rng)), firm(U(rng), U(rng), U(rng))};
    ControlVector cv({U(rng), U(rng)}, {U(rng), U(rng)});
    auto a = duopoly_stability(q, cv);
    auto b = targeted_stability(q, cv);
    CHECK(a.stable);
    CHECK(a.eigenvalues[0].real() == doctest::Approx(b.eigenvalues[0].real()).epsilon(1e-9));
  }

  auto n = nontargeted_stability(std::vector{firm(1, 0.3), firm(2, 0.1)}, ControlVector({0.5, 0.5}));
  CHECK(n.stable);
  CHECK(n.eigenvalues[0].real() == doctest::Approx(-(0.1 + 1.5)));
}
