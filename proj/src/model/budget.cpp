#include "adgame/budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adgame/error.hpp"
#include "adgame/kernels.hpp"
#include "adgame/numerics/scalar.hpp"

namespace adgame {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void check_versus(double c1, double c2, const VersusSettings& s) {
  if (!(std::isfinite(c1) && c1 >= 0.0) || !(std::isfinite(c2) && c2 >= 0.0))
    throw InvalidInput("decay rates must be nonnegative");
  if (!finite_positive(s.rho1) || !finite_positive(s.rho2) || !finite_positive(s.sigma1))
    throw InvalidInput("effectiveness ratios must be positive");
  if (!finite_positive(s.B) || !finite_positive(s.B2)) throw InvalidInput("budgets must be positive");
  if (!finite_positive(s.m)) throw InvalidInput("market size must be positive");
  if (s.grid_points < 3) throw InvalidInput("scan needs at least 3 grid points");
}

kernels::VersusNontargeted versus_args(double c1, double c2, const VersusSettings& s) {
  return {c1, c2, s.rho1, s.rho2, s.sigma1, s.B, s.B2, s.m};
}

struct Best {
  double u;
  double value;
};

// Grid scan of `batch` (which fills values for a vector of u) followed by
// Brent refinement around the best node; maximizes.
template <class Batch>
Best scan_maximize(double lo, double hi, std::size_t points, Batch batch) {
  std::vector<double> grid(points), vals(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                              static_cast<double>(points - 1);
  batch(points, grid.data(), vals.data());
  std::size_t best = 0;
  for (std::size_t i = 1; i < points; ++i)
    if (vals[i] > vals[best]) best = i;
  Best out{grid[best], vals[best]};
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[best + 1 == points ? best : best + 1];
  auto neg = [&](double u) {
    double y;
    batch(1, &u, &y);
    return -y;
  };
  const auto local = numerics::minimize_scalar_bounded(neg, a, b, 1e-12);
  if (-local.value > out.value) out = {local.argmin, -local.value};
  return out;
}

AllocationResult versus_result(double u, double objective, double c1, double c2,
                               const VersusSettings& s) {
  AllocationResult r;
  r.B = s.B;
  r.u = u;
  r.v = std::sqrt(std::max(0.0, s.B - u * u));
  r.fraction = u * u / s.B;
  r.objective = objective;
  r.method = AllocationMethod::numeric_scan;
  const auto [s1, s2] = steady_shares_vs_nontargeted(c1, c2, u, s);
  r.s1 = s1;
  r.s2 = s2;
  return r;
}

}  // namespace

void AllocationQuery::validate() const {
  if (!finite_positive(rho)) throw InvalidInput("rho must be positive");
  if (!finite_positive(sigma)) throw InvalidInput("sigma must be positive");
  if (!finite_positive(B)) throw InvalidInput("budget B must be positive");
  if (!(std::isfinite(X) && X >= 0.0 && X <= 1.0)) throw InvalidInput("X must lie in [0, 1]");
  if (!(std::isfinite(N) && N >= 0.0)) throw InvalidInput("N must be nonnegative");
}

AllocationQuery allocation_query(const MarketState& state, const FirmParams& firm, std::size_t k,
                                 double B) {
  if (k >= state.size()) throw DimensionMismatch("firm index out of range");
  AllocationQuery q;
  q.rho = firm.rho;
  q.sigma = firm.sigma;
  q.B = B;
  q.N = std::max(0.0, state.m() - state.s()[k]);
  const double eps = market_potential(state);
  q.X = q.N > 0.0 ? std::clamp((q.N - eps) / q.N, 0.0, 1.0) : 0.0;
  q.validate();
  return q;
}

const char* to_string(AllocationMethod method) {
  switch (method) {
    case AllocationMethod::closed_form: return "closed-form";
    case AllocationMethod::closed_form_with_root_fallback: return "closed-form-with-root-fallback";
    case AllocationMethod::numeric_scan: return "numeric-scan";
  }
  return "?";
}

AllocationResult instantaneous_allocation(const AllocationQuery& query) {
  query.validate();
  AllocationResult r;
  r.B = query.B;
  kernels::allocation_fraction(1, &query.rho, &query.sigma, &query.X, &r.fraction);
  r.u = std::sqrt(query.B * r.fraction);
  r.v = std::sqrt(query.B * (1.0 - r.fraction));
  const double eps = query.N * (1.0 - query.X);
  r.objective = query.sigma * r.v * eps + query.rho * r.u * (query.N - eps);
  r.method = AllocationMethod::closed_form;
  return r;
}

namespace {

kernels::RateArgs rate_args(const MarketState& state, std::span<const FirmParams> params,
                            std::span<const double> u_all, std::size_t k, double B) {
  const std::size_t n = state.size();
  if (params.size() != n || u_all.size() != n)
    throw DimensionMismatch("rate of increase: firm counts differ");
  if (k >= n) throw DimensionMismatch("firm index out of range");
  if (!finite_positive(B)) throw InvalidInput("budget B must be positive");
  params[k].validate();
  double others = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != k) {
      if (!(std::isfinite(u_all[j]) && u_all[j] >= 0.0))
        throw InvalidInput("efforts must be nonnegative");
      others += params[j].rho * u_all[j];
    }
  const double sk = state.s()[k];
  kernels::RateArgs a;
  a.rho = params[k].rho;
  a.sigma = params[k].sigma;
  a.B = B;
  a.epsilon = market_potential(state);
  a.N = state.m() - sk;
  a.loss = sk * (params[k].c + others);
  return a;
}

void check_effort(double u, double B) {
  if (!(std::isfinite(u) && u >= 0.0)) throw InvalidInput("trial effort must be nonnegative");
  if (u * u > B * (1.0 + 1e-15)) throw InvalidInput("trial effort exceeds the budget (u > sqrt(B))");
}

}  // namespace

double rate_of_increase(const MarketState& state, std::span<const FirmParams> params,
                        std::span<const double> u_all, std::size_t k, double B, double u) {
  const auto a = rate_args(state, params, u_all, k, B);
  check_effort(u, B);
  double out;
  kernels::rate_scan(a, 1, &u, &out);
  return out;
}

void rate_of_increase_grid(const MarketState& state, std::span<const FirmParams> params,
                           std::span<const double> u_all, std::size_t k, double B,
                           std::span<const double> u_grid, std::span<double> out) {
  const auto a = rate_args(state, params, u_all, k, B);
  if (out.size() != u_grid.size()) throw DimensionMismatch("output size differs from grid size");
  for (double u : u_grid) check_effort(u, B);
  kernels::rate_scan(a, u_grid.size(), u_grid.data(), out.data());
}

double rate_second_derivative(const MarketState& state, const FirmParams& firm, std::size_t k,
                              double B, double u) {
  if (k >= state.size()) throw DimensionMismatch("firm index out of range");
  check_effort(u, B);
  const double rest = B - u * u;
  return -firm.sigma * market_potential(state) * B / (rest * std::sqrt(rest));
}

std::pair<double, double> steady_shares_vs_nontargeted(double c1, double c2, double u1,
                                                       const VersusSettings& settings) {
  check_versus(c1, c2, settings);
  check_effort(u1, settings.B);
  const auto args = versus_args(c1, c2, settings);
  double s1, s2;
  kernels::steady_shares(args, 1, &u1, &s1, &s2);
  if (!std::isfinite(s1) || !std::isfinite(s2))
    throw DegenerateDenominator("steady shares undefined (no activity and no decay)");
  return {s1, s2};
}

AllocationResult steady_share_vs_nontargeted(double c1, double c2, const VersusSettings& settings) {
  check_versus(c1, c2, settings);
  const auto args = versus_args(c1, c2, settings);
  auto batch = [&](std::size_t n, const double* u, double* out) {
    std::vector<double> s2(n);
    kernels::steady_shares(args, n, u, out, s2.data());
  };
  const Best best = scan_maximize(0.0, std::sqrt(settings.B), settings.grid_points, batch);
  if (!std::isfinite(best.value)) throw NumericalFailure("steady-share scan produced no finite value");
  return versus_result(best.u, best.value, c1, c2, settings);
}

const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::dominates: return "dominates";
    case Dominance::tied: return "tied";
    case Dominance::dominated: return "dominated";
  }
  return "?";
}

double dominance_margin(double c, double u1) {
  if (!finite_positive(c)) throw InvalidInput("decay rate c must be positive");
  if (!(std::isfinite(u1) && u1 >= 0.0 && u1 <= 1.0)) throw InvalidInput("u1 must lie in [0, 1]");
  double out;
  kernels::dominance_margin(1, &c, &u1, &out);
  return out;
}

Dominance dominance_region(double c, double u1) {
  const double margin = dominance_margin(c, u1);
  if (margin > dominance_tie_tolerance) return Dominance::dominates;
  if (margin < -dominance_tie_tolerance) return Dominance::dominated;
  return Dominance::tied;
}

AllocationResult maximize_lead(double c, const VersusSettings& settings) {
  if (!finite_positive(c)) throw InvalidInput("decay rate c must be positive");
  check_versus(c, c, settings);
  const auto args = versus_args(c, c, settings);
  auto batch = [&](std::size_t n, const double* u, double* out) {
    std::vector<double> s2(n);
    kernels::steady_shares(args, n, u, out, s2.data());
    for (std::size_t i = 0; i < n; ++i) out[i] -= s2[i];
  };
  const Best best = scan_maximize(0.0, std::sqrt(settings.B), settings.grid_points, batch);
  if (!std::isfinite(best.value)) throw NumericalFailure("lead scan produced no finite value");
  return versus_result(best.u, best.value, c, c, settings);
}

double tier_cubic(double c1, double c2, double u) {
  return 2.0 * u * u * u + 4.0 * c2 * u * u + c2 * (c1 + c2) * u + c1 - c2;
}

double tier_potential(double c1, double c2, double u1) {
  if (!finite_positive(c1) || !finite_positive(c2)) throw InvalidInput("tier decay rates must be positive");
  if (!(std::isfinite(u1) && u1 >= 0.0 && u1 <= 1.0)) throw InvalidInput("u1 must lie in [0, 1]");
  double out;
  kernels::tier_potential(c1, c2, 1, &u1, &out);
  return out;
}

AllocationResult tier_allocation(double c1, double c2) {
  if (!finite_positive(c1) || !finite_positive(c2)) throw InvalidInput("tier decay rates must be positive");
  AllocationResult r;
  r.B = 1.0;

  auto eps = [&](double u) { return tier_potential(c1, c2, u); };
  const auto direct = numerics::minimize_scalar_global(eps, 0.0, 1.0, 1e-12, 101);

  if (c1 >= c2) {
    r.u = 0.0;
    r.method = AllocationMethod::closed_form;
  } else {
    const double d0 = 6.0 * (c1 - c2) *
                      (std::pow(c2, 5) + 2.0 * c1 * std::pow(c2, 4) + (c1 * c1 + 14.0) * std::pow(c2, 3) -
                       18.0 * c1 * c2 * c2 - 13.5 * c2 + 13.5 * c1);
    r.delta0 = d0;
    bool ok = false;
    if (d0 >= 0.0) {
      const double d1 = 36.0 * c1 * c2 * c2 - 28.0 * c2 * c2 * c2 - 54.0 * c1 + 54.0 * c2 +
                        6.0 * std::sqrt(d0);
      r.delta1 = d1;
      const double cr = std::cbrt(d1);
      if (cr != 0.0) {
        const double u = (10.0 * c2 * c2 - 6.0 * c1 * c2 + cr * cr - 4.0 * c2 * cr) / (6.0 * cr);
        if (std::isfinite(u) && u > 0.0 && u < 1.0 && std::abs(tier_cubic(c1, c2, u)) <= 1e-10) {
          r.u = u;
          ok = true;
        }
      }
    }
    if (ok) {
      r.method = AllocationMethod::closed_form;
    } else {
      r.u = numerics::find_root_bracketed([&](double u) { return tier_cubic(c1, c2, u); }, 0.0,
                                          1.0, 1e-15);
      r.method = AllocationMethod::closed_form_with_root_fallback;
    }
  }
  r.v = std::sqrt(1.0 - r.u * r.u);
  r.fraction = r.u * r.u;
  r.objective = eps(r.u);
  r.cross_check_gap = std::abs(r.u - direct.argmin);
  return r;
}

}  // namespace adgame
