#include "adgame/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "adgame/error.hpp"
#include "adgame/numerics/quadrature.hpp"

namespace adgame {

const char* to_string(Model model) {
  switch (model) {
    case Model::nontargeted: return "nontargeted";
    case Model::targeted: return "targeted";
    case Model::tiered: return "tiered";
  }
  return "?";
}

void FirmParams::validate() const {
  if (!(std::isfinite(rho) && rho > 0.0)) throw InvalidInput("firm rho must be positive");
  if (!(std::isfinite(sigma) && sigma > 0.0)) throw InvalidInput("firm sigma must be positive");
  if (!(std::isfinite(c) && c >= 0.0)) throw InvalidInput("firm c must be nonnegative");
  if (!(std::isfinite(q) && q >= 0.0)) throw InvalidInput("firm q must be nonnegative");
  if (budget && !(std::isfinite(*budget) && *budget > 0.0))
    throw InvalidInput("firm budget must be positive when present");
}

void validate_firms(std::span<const FirmParams> firms) {
  if (firms.empty()) throw InvalidInput("at least one firm is required");
  for (const auto& f : firms) f.validate();
}

MarketState::MarketState(double m, std::vector<double> s, double t)
    : m_(m), s_(std::move(s)), t_(t) {
  if (!(std::isfinite(m_) && m_ > 0.0)) throw InvalidInput("market size m must be positive");
  if (!std::isfinite(t_)) throw InvalidInput("state time must be finite");
  if (s_.empty()) throw InvalidInput("market state needs at least one firm");
  const double slack = slack_fraction * m_;
  double total = 0.0;
  for (double x : s_) {
    if (!std::isfinite(x)) throw InvalidInput("sales must be finite");
    if (x < -slack) throw InvalidInput("sales must be nonnegative");
    total += x;
  }
  if (total > m_ + slack) throw InvalidInput("total sales exceed the market size");
}

std::vector<double> MarketState::shares() const {
  std::vector<double> x(s_.size());
  for (std::size_t i = 0; i < s_.size(); ++i) x[i] = s_[i] / m_;
  return x;
}

double market_potential(const MarketState& state) {
  double total = 0.0;
  for (double x : state.s()) total += x;
  return std::max(0.0, state.m() - total);
}

ControlVector::ControlVector(std::vector<double> u, std::vector<double> v)
    : u_(std::move(u)), v_(std::move(v)) {
  auto check = [](const std::vector<double>& xs, const char* name) {
    for (double x : xs)
      if (!(std::isfinite(x) && x >= 0.0)) {
        std::ostringstream os;
        os << "effort " << name << " must be finite and nonnegative (got " << x << ")";
        throw InvalidInput(os.str());
      }
  };
  check(u_, "u");
  check(v_, "v");
}

ControlPolicy::ControlPolicy(Kind kind, std::vector<double> times,
                             std::vector<ControlVector> values)
    : kind_(kind), times_(std::move(times)), values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("control policy has no values");
  const std::size_t n = values_.front().u().size();
  const std::size_t nv = values_.front().v().size();
  for (const auto& cv : values_)
    if (cv.u().size() != n || cv.v().size() != nv)
      throw DimensionMismatch("control policy values differ in size");
  if (kind_ != Kind::constant) {
    if (times_.size() != values_.size())
      throw DimensionMismatch("control policy needs one value per time node");
    for (double t : times_)
      if (!std::isfinite(t)) throw InvalidInput("control policy times must be finite");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw InvalidInput("control policy times must be strictly increasing");
  }
}

ControlPolicy ControlPolicy::constant(ControlVector value) {
  return ControlPolicy(Kind::constant, {}, {std::move(value)});
}

ControlPolicy ControlPolicy::piecewise_constant(std::vector<double> times,
                                                std::vector<ControlVector> values) {
  return ControlPolicy(Kind::piecewise_constant, std::move(times), std::move(values));
}

ControlPolicy ControlPolicy::tabulated_linear(std::vector<double> times,
                                              std::vector<ControlVector> values) {
  return ControlPolicy(Kind::tabulated_linear, std::move(times), std::move(values));
}

ControlVector ControlPolicy::evaluate(double t) const {
  if (kind_ == Kind::constant || t < times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (kind_ == Kind::piecewise_constant) return values_[i];
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  auto lerp = [w](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::max(0.0, a[k] + w * (b[k] - a[k]));
    return out;
  };
  return ControlVector(lerp(values_[i].u(), values_[i + 1].u()),
                       lerp(values_[i].v(), values_[i + 1].v()));
}

double ControlPolicy::antiderivative(bool use_v, std::size_t k, double t) const {
  auto val = [&](std::size_t i) { return use_v ? values_[i].v()[k] : values_[i].u()[k]; };
  if (kind_ == Kind::constant) return val(0) * t;
  // Anchored at times_[0]; constant extension on both sides.
  if (t <= times_.front()) return val(0) * (t - times_.front());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    const double a = times_[i], b = times_[i + 1];
    if (t <= a) break;
    const double hi = std::min(t, b);
    if (kind_ == Kind::piecewise_constant) {
      acc += val(i) * (hi - a);
    } else {
      const double slope = (val(i + 1) - val(i)) / (b - a);
      acc += (hi - a) * (val(i) + 0.5 * slope * (hi - a));
    }
  }
  if (t > times_.back()) acc += val(times_.size() - 1) * (t - times_.back());
  return acc;
}

double ControlPolicy::u_integral(std::size_t k, double a, double b) const {
  if (k >= firms()) throw DimensionMismatch("firm index out of range");
  return antiderivative(false, k, b) - antiderivative(false, k, a);
}

double ControlPolicy::v_integral(std::size_t k, double a, double b) const {
  if (!has_v() || k >= values_.front().v().size())
    throw DimensionMismatch("policy has no v component for this index");
  return antiderivative(true, k, b) - antiderivative(true, k, a);
}

void Trajectory::validate() const {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidInput("trajectory grid must be strictly increasing");
  if (states.size() != grid.size() || controls.size() != grid.size())
    throw DimensionMismatch("trajectory arrays must match the grid length");
  if (!costates.empty() && costates.size() != grid.size())
    throw DimensionMismatch("trajectory costates must match the grid length");
}

namespace detail {

void nontargeted_field(double m, std::span<const FirmParams> params, std::span<const double> u,
                       std::span<const double> s, std::span<double> ds) {
  const std::size_t n = s.size();
  double U = 0.0;
  for (std::size_t j = 0; j < n; ++j) U += params[j].rho * u[j];
  for (std::size_t k = 0; k < n; ++k) {
    const double ru = params[k].rho * u[k];
    ds[k] = ru * m - s[k] * (params[k].c + U);
  }
}

// Grouped so that sigma = rho, v = u collapses term by term onto
// nontargeted_field: x + 0 and 0 * S are exact.
void targeted_field(double m, std::span<const FirmParams> params, std::span<const double> u,
                    std::span<const double> v, std::span<const double> s, std::span<double> ds) {
  const std::size_t n = s.size();
  double U = 0.0, total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    U += params[j].rho * u[j];
    total += s[j];
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double ru = params[k].rho * u[k];
    const double sv = params[k].sigma * v[k];
    const double others = total - s[k];
    ds[k] = (sv * m + (ru - sv) * others) - s[k] * ((params[k].c + U) + (sv - ru));
  }
}

void tiered_field(double m, std::span<const FirmParams> params, double v,
                  std::span<const double> u, std::span<const double> s, std::span<double> ds) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (double x : s) total += x;
  const double eps = m - total;
  double below = total;  // sum over j > k
  double above = 0.0;    // sum of rho_j u_j over j < k
  for (std::size_t k = 0; k < n; ++k) {
    below -= s[k];
    const double ru = k + 1 < n ? params[k].rho * u[k] : 0.0;
    ds[k] = params[k].sigma * v * eps + ru * below - s[k] * (params[k].c + above);
    above += ru;
  }
}

}  // namespace detail

namespace {

void check_dims(const MarketState& state, std::span<const FirmParams> params, std::size_t nu) {
  if (params.size() != state.size())
    throw DimensionMismatch("state and parameter lists differ in length");
  if (nu != state.size()) throw DimensionMismatch("control vector length differs from firm count");
}

}  // namespace

std::vector<double> nontargeted_rhs(const MarketState& state, std::span<const FirmParams> params,
                                    const ControlVector& controls) {
  check_dims(state, params, controls.u().size());
  std::vector<double> ds(state.size());
  detail::nontargeted_field(state.m(), params, controls.u(), state.s(), ds);
  return ds;
}

std::vector<double> targeted_rhs(const MarketState& state, std::span<const FirmParams> params,
                                 const ControlVector& controls) {
  check_dims(state, params, controls.u().size());
  if (!controls.has_v()) throw InvalidInput("targeted model requires a v component");
  if (controls.v().size() != state.size())
    throw DimensionMismatch("v length differs from firm count");
  std::vector<double> ds(state.size());
  detail::targeted_field(state.m(), params, controls.u(), controls.v(), state.s(), ds);
  return ds;
}

std::vector<double> tiered_rhs(const MarketState& state, std::span<const FirmParams> params,
                               double shared_v, std::span<const double> controls_u) {
  check_dims(state, params, controls_u.size());
  if (!(std::isfinite(shared_v) && shared_v >= 0.0))
    throw InvalidInput("shared tier effort v must be nonnegative");
  for (double x : controls_u)
    if (!(std::isfinite(x) && x >= 0.0)) throw InvalidInput("tier efforts must be nonnegative");
  std::vector<double> ds(state.size());
  detail::tiered_field(state.m(), params, shared_v, controls_u, state.s(), ds);
  return ds;
}

MarketState nontargeted_closed_form(const MarketState& initial, std::span<const FirmParams> params,
                                    const ControlPolicy& policy, double t) {
  const std::size_t n = initial.size();
  if (params.size() != n || policy.firms() != n)
    throw DimensionMismatch("closed form: firm counts differ");
  const double t0 = initial.t();
  if (!(t >= t0)) throw InvalidInput("closed form needs t >= initial time");
  const double m = initial.m();
  std::vector<double> s(n);
  if (t == t0) return initial;

  if (policy.kind() == ControlPolicy::Kind::constant) {
    const auto& u = policy.values().front().u();
    double U = 0.0;
    for (std::size_t j = 0; j < n; ++j) U += params[j].rho * u[j];
    for (std::size_t k = 0; k < n; ++k) {
      const double rate = params[k].c + U;
      const double s0 = initial.s()[k];
      if (rate == 0.0) {
        s[k] = s0;
        continue;
      }
      const double s_inf = m * params[k].rho * u[k] / rate;
      s[k] = s_inf + (s0 - s_inf) * std::exp(-rate * (t - t0));
    }
    return MarketState(m, std::move(s), t);
  }

  // psi_k(b) - psi_k(a) = c_k (b - a) + sum_j rho_j * int_a^b u_j
  auto psi_gap = [&](std::size_t k, double a, double b) {
    double g = params[k].c * (b - a);
    for (std::size_t j = 0; j < n; ++j) g += params[j].rho * policy.u_integral(j, a, b);
    return g;
  };
  std::vector<double> bps;
  for (double b : policy.breakpoints())
    if (b > t0 && b < t) bps.push_back(b);
  numerics::QuadratureConfig qc;
  qc.abs_tol = 1e-13 * m;
  qc.rel_tol = 1e-12;
  for (std::size_t k = 0; k < n; ++k) {
    const double decay = std::exp(-psi_gap(k, t0, t));
    auto integrand = [&](double tau) {
      return m * params[k].rho * policy.evaluate(tau).u()[k] * std::exp(-psi_gap(k, tau, t));
    };
    const auto q = numerics::quadrature(integrand, t0, t, bps, qc);
    s[k] = initial.s()[k] * decay + q.value;
  }
  return MarketState(m, std::move(s), t);
}

Trajectory simulate(Model model, const MarketState& initial, std::span<const FirmParams> params,
                    const ControlPolicy& policy, double t_end, std::size_t samples,
                    const numerics::IntegratorConfig& config) {
  const std::size_t n = initial.size();
  validate_firms(params);
  if (params.size() != n || policy.firms() != n)
    throw DimensionMismatch("simulate: firm counts differ");
  if (samples < 2) throw InvalidInput("simulate needs at least two samples");
  const double t0 = initial.t();
  if (!(t_end > t0)) throw InvalidInput("simulate needs t_end after the initial time");
  if (model == Model::targeted && (!policy.has_v() || policy.values().front().v().size() != n))
    throw InvalidInput("targeted model requires v efforts for every firm");
  if (model == Model::tiered && policy.values().front().v().size() != 1)
    throw InvalidInput("tiered model requires exactly one shared v effort");

  const double m = initial.m();
  numerics::VectorField rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const ControlVector cv = policy.evaluate(t);
    switch (model) {
      case Model::nontargeted: detail::nontargeted_field(m, params, cv.u(), y, dy); break;
      case Model::targeted: detail::targeted_field(m, params, cv.u(), cv.v(), y, dy); break;
      case Model::tiered: detail::tiered_field(m, params, cv.v()[0], cv.u(), y, dy); break;
    }
  };

  // Integrate piece by piece so no step straddles a policy breakpoint.
  std::vector<double> cuts{t0};
  for (double b : policy.breakpoints())
    if (b > t0 && b < t_end) cuts.push_back(b);
  cuts.push_back(t_end);
  numerics::IntegratorConfig ic = config;
  ic.dense_output = true;
  numerics::DenseSolution path;
  std::vector<double> y = initial.s();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto piece = numerics::integrate_ivp(rhs, y, cuts[i], cuts[i + 1], ic);
    y = piece.final_state();
    path.append(piece);
  }

  Trajectory out;
  out.grid.resize(samples);
  for (std::size_t i = 0; i < samples; ++i)
    out.grid[i] = i + 1 == samples
                      ? t_end
                      : t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
  out.states.reserve(samples);
  out.controls.reserve(samples);
  for (double t : out.grid) {
    try {
      out.states.emplace_back(m, path(t), t);
    } catch (const InvalidInput& e) {
      std::ostringstream os;
      os << "integrated state left the feasible region at t=" << t << ": " << e.what();
      throw NumericalFailure(os.str());
    }
    out.controls.push_back(policy.evaluate(t));
  }
  return out;
}

}  // namespace adgame
