#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "adgame/budget.hpp"
#include "adgame/equilibrium.hpp"
#include "adgame/error.hpp"

using namespace adgame;

namespace {

AllocationQuery query(double ratio, double X, double B = 1.0) {
  AllocationQuery q;
  q.rho = ratio;
  q.sigma = 1.0;
  q.X = X;
  q.B = B;
  return q;
}

FirmParams firm(double rho, double c, double sigma = 1.0) {
  FirmParams f;
  f.rho = rho;
  f.sigma = sigma;
  f.c = c;
  return f;
}

}  // namespace

TEST_CASE("instantaneous allocation") {
  CHECK(std::abs(instantaneous_allocation(query(1.0, 0.5)).fraction - 0.5) <= 1e-12);
  CHECK(std::abs(instantaneous_allocation(query(0.5, 0.5)).fraction - 0.2) <= 1e-12);
  CHECK(std::abs(instantaneous_allocation(query(1.0, 2.0 / 3.0)).fraction - 0.8) <= 1e-12);
  CHECK(std::abs(instantaneous_allocation(query(0.5, 2.0 / 3.0)).fraction - 0.5) <= 1e-12);

  CHECK(instantaneous_allocation(query(1.3, 0.0)).u == 0.0);
  auto full = instantaneous_allocation(query(1.3, 1.0, 4.0));
  CHECK(full.u == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(full.v == 0.0);

  // fraction does not depend on B; budget identity holds
  for (double B : {0.1, 1.0, 7.5}) {
    auto r = instantaneous_allocation(query(0.8, 0.37, B));
    CHECK(r.fraction == instantaneous_allocation(query(0.8, 0.37)).fraction);
    CHECK(std::abs(r.u * r.u + r.v * r.v - B) <= 1e-12 * std::max(1.0, B));
  }

  AllocationQuery bad = query(1.0, 0.5);
  bad.sigma = 0.0;
  CHECK_THROWS_AS(instantaneous_allocation(bad), InvalidInput);
  CHECK_THROWS_AS(instantaneous_allocation(query(1.0, 1.5)), InvalidInput);
}

TEST_CASE("closed form beats a grid of the sales rate") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.05, 2.0), P(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FirmParams> p{firm(U(rng), U(rng), U(rng)), firm(U(rng), U(rng), U(rng)),
                              firm(U(rng), U(rng), U(rng))};
    const double m = U(rng);
    std::vector<double> s{m * 0.3 * P(rng), m * 0.3 * P(rng), m * 0.3 * P(rng)};
    MarketState st(m, s);
    const std::vector<double> u_all{U(rng), U(rng), U(rng)};
    const double B = U(rng);
    auto q = allocation_query(st, p[0], 0, B);
    auto best = instantaneous_allocation(q);
    const double at_best = rate_of_increase(st, p, u_all, 0, B, best.u);
    std::vector<double> grid(1001), out(1001);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = std::min(std::sqrt(B), std::sqrt(B) * static_cast<double>(i) / 1000.0);
    rate_of_increase_grid(st, p, u_all, 0, B, grid, out);
    for (double r : out) CHECK(r <= at_best + 1e-9);
    CHECK(rate_second_derivative(st, p[0], 0, B, best.u) < 0.0);
    if (q.X < 1.0) CHECK(rate_of_increase(st, p, u_all, 0, B, std::sqrt(B)) < at_best);
  }
  std::vector<FirmParams> one{firm(1, 0.1)};
  const std::vector<double> u1{0.5};
  CHECK_THROWS_AS(rate_of_increase(MarketState(1.0, {0.2}), one, u1, 0, 1.0, 1.5), InvalidInput);
}

TEST_CASE("argmax ignores competitors") {
  MarketState st(1.0, {0.2, 0.3, 0.1});
  std::vector<FirmParams> p{firm(1.2, 0.1, 0.7), firm(0.5, 0.2), firm(2.0, 0.4)};
  const double ref = instantaneous_allocation(allocation_query(st, p[0], 0, 1.0)).u;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    p[1] = firm(U(rng) + 0.01, U(rng), U(rng) + 0.01);
    p[2] = firm(U(rng) + 0.01, U(rng), U(rng) + 0.01);
    CHECK(instantaneous_allocation(allocation_query(st, p[0], 0, 1.0)).u == ref);
  }
}

TEST_CASE("steady share against a nontargeted rival") {
  auto a = steady_share_vs_nontargeted(0.3, 0.2);
  CHECK(a.fraction == doctest::Approx(0.76).epsilon(0.01 / 0.76));
  CHECK(*a.s1 == doctest::Approx(0.429).epsilon(0.005 / 0.429));
  CHECK(*a.s2 == doctest::Approx(0.397).epsilon(0.005 / 0.397));
  CHECK(std::abs(a.u * a.u + a.v * a.v - 1.0) <= 1e-12);

  auto b = steady_share_vs_nontargeted(0.9, 0.9);
  CHECK(b.fraction == doctest::Approx(0.43).epsilon(0.01 / 0.43));
  CHECK(*b.s1 == doctest::Approx(0.306).epsilon(0.005 / 0.306));
  CHECK(*b.s2 == doctest::Approx(0.313).epsilon(0.005 / 0.313));

  // Frozen values from this implementation.
  CHECK(a.fraction == doctest::Approx(0.761857).epsilon(1e-5));
  CHECK(b.fraction == doctest::Approx(0.425594).epsilon(1e-5));

  // agrees with the general duopoly steady state
  const double h = std::sqrt(0.5);
  auto eq = targeted_steady_state_duopoly(1.0, std::vector{firm(1, 0.3), firm(1, 0.2)},
                                          ControlVector({a.u, h}, {a.v, h}));
  CHECK(*a.s1 == doctest::Approx(eq.s_star[0]).epsilon(1e-12));
  CHECK(*a.s2 == doctest::Approx(eq.s_star[1]).epsilon(1e-12));

  SUBCASE("optimal effort is nonincreasing in both decay rates") {
    const int n = 20;
    std::vector<std::vector<double>> u(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        u[i][j] = steady_share_vs_nontargeted((i + 1) / 20.0, (j + 1) / 20.0).u;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i + 1 < n) CHECK(u[i + 1][j] <= u[i][j] + 1e-7);
        if (j + 1 < n) CHECK(u[i][j + 1] <= u[i][j] + 1e-7);
      }
  }
}

TEST_CASE("dominance and lead") {
  for (double c : {0.05, 0.3, 0.9, 2.0}) {
    CHECK(dominance_region(c, 1.0 / std::sqrt(2.0)) == Dominance::tied);
    auto [s1, s2] = steady_shares_vs_nontargeted(c, c, 1.0 / std::sqrt(2.0));
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-14));
  }
  const double u = std::sqrt(0.637);
  CHECK(dominance_region(0.9, u) == Dominance::dominates);
  auto [s1, s2] = steady_shares_vs_nontargeted(0.9, 0.9, u);
  CHECK(s1 == doctest::Approx(0.299).epsilon(0.005 / 0.299));
  CHECK(s2 == doctest::Approx(0.293).epsilon(0.005 / 0.293));

  auto lead = maximize_lead(0.9);
  CHECK(lead.objective >= s1 - s2);
  // Frozen: the unrounded shares at u1^2 = 0.637 give a lead near 0.0047.
  CHECK(lead.objective == doctest::Approx(0.004712).epsilon(1e-3));

  for (int i = 1; i <= 10; ++i) {
    const double c = i / 10.0;
    CHECK(dominance_region(c, maximize_lead(c).u) == Dominance::dominates);
  }

  SUBCASE("region matches the direct share comparison") {
    int disagreements = 0;
    for (int i = 1; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j) {
        const double c = i / 100.0, uu = std::sqrt(j / 200.0);
        const auto [a, b] = steady_shares_vs_nontargeted(c, c, uu);
        const Dominance d = dominance_region(c, uu);
        if (std::abs(a - b) < 1e-12) continue;
        if ((a > b) != (d == Dominance::dominates)) ++disagreements;
      }
    CHECK(disagreements == 0);
  }
}

TEST_CASE("tier allocation") {
  auto r = tier_allocation(0.1, 0.2);
  CHECK(r.u == doctest::Approx(0.25).epsilon(0.01 / 0.25));
  CHECK(r.u == doctest::Approx(0.254436591).epsilon(1e-8));
  CHECK(r.method == AllocationMethod::closed_form);
  CHECK(std::abs(tier_cubic(0.1, 0.2, r.u)) <= 1e-10);
  REQUIRE(r.cross_check_gap.has_value());
  CHECK(*r.cross_check_gap <= 1e-6);

  for (double c : {0.01, 0.2, 1.0, 5.0}) CHECK(tier_allocation(c, c).u == 0.0);
  CHECK(tier_allocation(0.5, 0.2).u == 0.0);

  auto f = tier_allocation(0.01, 1.0);
  CHECK(f.method == AllocationMethod::closed_form_with_root_fallback);
  CHECK(*f.delta0 < 0.0);
  CHECK(std::abs(tier_cubic(0.01, 1.0, f.u)) <= 1e-10);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.001, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    double c1 = U(rng), c2 = U(rng);
    if (c1 > c2) std::swap(c1, c2);
    if (c1 == c2) continue;
    auto t = tier_allocation(c1, c2);
    CHECK(std::abs(tier_cubic(c1, c2, t.u)) <= 1e-10);
    const double best = tier_potential(c1, c2, t.u);
    for (int i = 0; i <= 1000; ++i) CHECK(best <= tier_potential(c1, c2, i / 1000.0) + 1e-12);
  }

  double prev = tier_allocation(0.3, 0.4).u;
  for (int k = 2; k <= 6; ++k) {
    const double u = tier_allocation(0.3, 0.3 + std::pow(10.0, -k)).u;
    CHECK(u < prev);
    prev = u;
  }
  CHECK(prev < 1e-5);

  CHECK_THROWS_AS(tier_allocation(0.0, 0.2), InvalidInput);
  CHECK(tier_potential(0.1, 0.2, 1.0) == 1.0);
}
