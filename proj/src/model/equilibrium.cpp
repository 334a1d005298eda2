#include "adgame/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "adgame/error.hpp"

namespace adgame {

namespace {

void check_controls(double m, std::span<const FirmParams> params, const ControlVector& controls,
                    bool need_v) {
  if (!(std::isfinite(m) && m > 0.0)) throw InvalidInput("market size m must be positive");
  validate_firms(params);
  if (controls.u().size() != params.size())
    throw DimensionMismatch("control vector length differs from firm count");
  if (need_v && controls.v().size() != params.size())
    throw InvalidInput("targeted model requires a v effort for every firm");
}

// Fills epsilon and the residual; rejects the report if the formula missed
// the fixed point.
void finish(SteadyStateReport& r, const std::vector<double>& rhs) {
  double total = 0.0;
  for (double s : r.s_star) total += s;
  r.epsilon_star = std::max(0.0, r.m - total);
  r.residual_norm = 0.0;
  for (double x : rhs) r.residual_norm = std::max(r.residual_norm, std::abs(x));
  if (!(r.residual_norm <= steady_residual_limit)) {
    std::ostringstream os;
    os << "steady-state residual " << r.residual_norm << " exceeds " << steady_residual_limit;
    throw NumericalFailure(os.str());
  }
}

void require_positive(double D, const char* what) {
  if (!(D > 0.0) || !std::isfinite(D))
    throw DegenerateDenominator(std::string(what) + " vanishes (no activity and no decay)");
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& J) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(J.rows()));
  for (Eigen::Index i = 0; i < J.rows(); ++i)
    for (Eigen::Index j = 0; j < J.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(J(i, j));
  return rows;
}

StabilityReport from_matrix(const Eigen::MatrixXd& J) {
  StabilityReport rep;
  rep.jacobian = to_rows(J);
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue computation failed");
  rep.stable = true;
  for (Eigen::Index i = 0; i < J.rows(); ++i) {
    rep.eigenvalues.push_back(es.eigenvalues()(i));
    if (!(es.eigenvalues()(i).real() < 0.0)) rep.stable = false;
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](auto a, auto b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); });
  return rep;
}

}  // namespace

SteadyStateReport nontargeted_steady_state(double m, std::span<const FirmParams> params,
                                           const ControlVector& controls) {
  check_controls(m, params, controls, false);
  const std::size_t n = params.size();
  SteadyStateReport r;
  r.m = m;
  for (std::size_t j = 0; j < n; ++j) r.U += params[j].rho * controls.u()[j];
  r.s_star.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double den = params[k].c + r.U;
    require_positive(den, "c_k + U");
    r.s_star[k] = m * params[k].rho * controls.u()[k] / den;
  }
  finish(r, nontargeted_rhs(MarketState(m, r.s_star), params, controls));
  return r;
}

SteadyStateReport targeted_steady_state_duopoly(double m, std::span<const FirmParams> params,
                                                const ControlVector& controls) {
  check_controls(m, params, controls, true);
  if (params.size() != 2) throw DimensionMismatch("duopoly steady state needs exactly 2 firms");
  const double a1 = params[0].rho * controls.u()[0], a2 = params[1].rho * controls.u()[1];
  const double b1 = params[0].sigma * controls.v()[0], b2 = params[1].sigma * controls.v()[1];
  const double c1 = params[0].c, c2 = params[1].c;
  SteadyStateReport r;
  r.m = m;
  r.U = a1 + a2;
  r.V = b1 + b2;
  const double D = b1 * (c2 + r.U) + b2 * (c1 + r.U) + c1 * a1 + c2 * a2 + c1 * c2;
  require_positive(D, "D2");
  r.D = D;
  r.s_star = {m * (*r.V * a1 + c2 * b1) / D, m * (*r.V * a2 + c1 * b2) / D};
  finish(r, targeted_rhs(MarketState(m, r.s_star), params, controls));
  return r;
}

SteadyStateReport targeted_steady_state_triopoly(double m, std::span<const FirmParams> params,
                                                 const ControlVector& controls) {
  check_controls(m, params, controls, true);
  if (params.size() != 3) throw DimensionMismatch("triopoly steady state needs exactly 3 firms");
  double a[3], b[3], c[3];
  for (std::size_t k = 0; k < 3; ++k) {
    a[k] = params[k].rho * controls.u()[k];
    b[k] = params[k].sigma * controls.v()[k];
    c[k] = params[k].c;
  }
  SteadyStateReport r;
  r.m = m;
  r.U = a[0] + a[1] + a[2];
  r.V = b[0] + b[1] + b[2];
  const double U = r.U, V = *r.V;
  double D = c[0] * c[1] * c[2];
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    D += b[k] * (c[i] + U) * (c[j] + U) + a[k] * c[k] * (U + c[i] + c[j]);
  }
  require_positive(D, "D3");
  r.D = D;
  r.s_star.resize(3);
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    const double pull = U * V + b[k] * (c[i] + c[j]) + b[i] * c[j] + b[j] * c[i];
    const double keep = a[i] * c[i] + a[j] * c[j] + c[i] * c[j];
    r.s_star[static_cast<std::size_t>(k)] = m * (a[k] * pull + b[k] * keep) / D;
  }
  finish(r, targeted_rhs(MarketState(m, r.s_star), params, controls));
  return r;
}

SteadyStateReport targeted_steady_state(double m, std::span<const FirmParams> params,
                                        const ControlVector& controls) {
  switch (params.size()) {
    case 2: return targeted_steady_state_duopoly(m, params, controls);
    case 3: return targeted_steady_state_triopoly(m, params, controls);
    default: {
      std::ostringstream os;
      os << "unsupported size: targeted steady state is available for 2 or 3 firms, got "
         << params.size();
      throw Unsupported(os.str());
    }
  }
}

SteadyStateReport tier_steady_state_two(double m, std::span<const FirmParams> params, double v,
                                        double u1) {
  if (!(std::isfinite(m) && m > 0.0)) throw InvalidInput("market size m must be positive");
  validate_firms(params);
  if (params.size() != 2) throw DimensionMismatch("two-tier steady state needs exactly 2 tiers");
  if (!(std::isfinite(v) && v >= 0.0) || !(std::isfinite(u1) && u1 >= 0.0))
    throw InvalidInput("tier efforts must be nonnegative");
  const double s1g = params[0].sigma, s2g = params[1].sigma;
  const double a = params[0].rho * u1;
  const double c1 = params[0].c, c2 = params[1].c;
  const double D = ((s1g + s2g) * v + c1) * a + (c1 * s2g + c2 * s1g) * v + c1 * c2;
  require_positive(D, "tier denominator");
  SteadyStateReport r;
  r.m = m;
  r.U = a;
  r.V = (s1g + s2g) * v;
  r.D = D;
  r.s_star = {m * v * ((s1g + s2g) * a + c2 * s1g) / D, m * v * s2g * c1 / D};
  const std::vector<double> u{u1, 0.0};
  finish(r, tiered_rhs(MarketState(m, r.s_star), params, v, u));
  // The closed form for the potential, rather than m - s1 - s2, avoids
  // cancellation when both tiers nearly saturate the market.
  r.epsilon_star = m * c1 * (c2 + a) / D;
  return r;
}

StabilityReport nontargeted_stability(std::span<const FirmParams> params,
                                      const ControlVector& controls) {
  check_controls(1.0, params, controls, false);
  const std::size_t n = params.size();
  double U = 0.0;
  for (std::size_t j = 0; j < n; ++j) U += params[j].rho * controls.u()[j];
  StabilityReport rep;
  rep.jacobian.assign(n, std::vector<double>(n, 0.0));
  rep.stable = true;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = -(params[k].c + U);
    rep.jacobian[k][k] = d;
    rep.eigenvalues.emplace_back(d, 0.0);
    if (!(d < 0.0)) rep.stable = false;
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](auto a, auto b) { return a.real() > b.real(); });
  return rep;
}

double duopoly_discriminant(std::span<const FirmParams> params, const ControlVector& controls) {
  check_controls(1.0, params, controls, true);
  if (params.size() != 2) throw DimensionMismatch("duopoly discriminant needs exactly 2 firms");
  const double a1 = params[0].rho * controls.u()[0], a2 = params[1].rho * controls.u()[1];
  const double b1 = params[0].sigma * controls.v()[0], b2 = params[1].sigma * controls.v()[1];
  const double D = params[0].c - params[1].c;
  const double U = a1 + a2, V = b1 + b2;
  return D * D - 2.0 * D * (a1 - a2 - b1 + b2) + (U - V) * (U - V);
}

StabilityReport duopoly_stability(std::span<const FirmParams> params,
                                  const ControlVector& controls) {
  const double d = duopoly_discriminant(params, controls);
  const double a1 = params[0].rho * controls.u()[0], a2 = params[1].rho * controls.u()[1];
  const double b1 = params[0].sigma * controls.v()[0], b2 = params[1].sigma * controls.v()[1];
  const double c1 = params[0].c, c2 = params[1].c;
  StabilityReport rep;
  rep.jacobian = {{-(c1 + b1 + a2), a1 - b1}, {a2 - b2, -(c2 + b2 + a1)}};
  rep.d_star = d;
  const double S = c1 + c2 + a1 + a2 + b1 + b2;
  const std::complex<double> root = std::sqrt(std::complex<double>(d, 0.0));
  rep.eigenvalues = {-0.5 * (S - root), -0.5 * (S + root)};
  rep.stable = rep.eigenvalues[0].real() < 0.0 && rep.eigenvalues[1].real() < 0.0;
  return rep;
}

StabilityReport targeted_stability(std::span<const FirmParams> params,
                                   const ControlVector& controls) {
  check_controls(1.0, params, controls, true);
  const auto n = static_cast<Eigen::Index>(params.size());
  double U = 0.0;
  for (std::size_t j = 0; j < params.size(); ++j) U += params[j].rho * controls.u()[j];
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double a = params[kk].rho * controls.u()[kk];
    const double b = params[kk].sigma * controls.v()[kk];
    for (Eigen::Index j = 0; j < n; ++j) J(k, j) = a - b;
    J(k, k) = -(params[kk].c + b + (U - a));
  }
  return from_matrix(J);
}

StabilityReport tier_stability_two(std::span<const FirmParams> params, double v, double u1) {
  validate_firms(params);
  if (params.size() != 2) throw DimensionMismatch("two-tier stability needs exactly 2 tiers");
  const double a = params[0].rho * u1;
  Eigen::MatrixXd J(2, 2);
  J << -(params[0].sigma * v + params[0].c), -params[0].sigma * v + a,
      -params[1].sigma * v, -(params[1].sigma * v + params[1].c + a);
  return from_matrix(J);
}

}  // namespace adgame
