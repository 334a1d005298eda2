#include "adgame/numerics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adgame/error.hpp"

namespace adgame::numerics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Workspace {
  explicit Workspace(std::size_t n)
      : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), tmp(n) {}
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, y1, tmp;
};

// One Dormand-Prince step from (t, y) with k1 = f(t, y) already in ws.k1.
// Leaves y1 and k2..k7 (k7 = f(t + h, y1)) in the workspace.
void dopri_step(const VectorField& f, double t, std::span<const double> y, double h,
                Workspace& ws) {
  const std::size_t n = y.size();
  auto& tmp = ws.tmp;
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a21 * ws.k1[i]);
  f(t + c2 * h, tmp, ws.k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * ws.k1[i] + a32 * ws.k2[i]);
  f(t + c3 * h, tmp, ws.k3);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a41 * ws.k1[i] + a42 * ws.k2[i] + a43 * ws.k3[i]);
  f(t + c4 * h, tmp, ws.k4);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a51 * ws.k1[i] + a52 * ws.k2[i] + a53 * ws.k3[i] + a54 * ws.k4[i]);
  f(t + c5 * h, tmp, ws.k5);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a61 * ws.k1[i] + a62 * ws.k2[i] + a63 * ws.k3[i] + a64 * ws.k4[i] +
                         a65 * ws.k5[i]);
  f(t + h, tmp, ws.k6);
  for (std::size_t i = 0; i < n; ++i)
    ws.y1[i] = y[i] + h * (a71 * ws.k1[i] + a73 * ws.k3[i] + a74 * ws.k4[i] +
                           a75 * ws.k5[i] + a76 * ws.k6[i]);
  f(t + h, ws.y1, ws.k7);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double error_norm(std::span<const double> y, const Workspace& ws, double h, double rtol,
                  double atol) {
  const std::size_t n = y.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = h * (e1 * ws.k1[i] + e3 * ws.k3[i] + e4 * ws.k4[i] + e5 * ws.k5[i] +
                            e6 * ws.k6[i] + e7 * ws.k7[i]);
    const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(ws.y1[i]));
    sum += (err / sk) * (err / sk);
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double initial_step(const VectorField& f, double t0, std::span<const double> y0,
                    std::span<const double> f0, double hmax, double rtol, double atol) {
  const std::size_t n = y0.size();
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  std::vector<double> y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h * f0[i];
  f(t0 + h, y1, f1);
  double der2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 =
      der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 5.0);
  if (!std::isfinite(h1)) return std::min(h, hmax);
  return std::min({100.0 * h, h1, hmax});
}

// Local error control makes the global error scale slightly slower than the
// tolerance; raising tolerances below one to the power 6/5 restores
// proportionality (one decade of tolerance buys at least one of accuracy).
double proportional(double tol) {
  if (tol >= 1.0) return tol;
  return std::pow(tol, 1.2);
}

[[noreturn]] void fail(const char* what, double t) {
  std::ostringstream os;
  os << what << " at t=" << t;
  throw NumericalFailure(os.str());
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw InvalidInput("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw InvalidInput("integrator max_step must be positive");
  if (max_steps == 0) throw InvalidInput("integrator max_steps must be positive");
}

std::vector<double> DenseSolution::operator()(double t) const {
  std::vector<double> out(dim_);
  evaluate(t, out);
  return out;
}

void DenseSolution::evaluate(double t, std::span<double> out) const {
  if (times_.empty()) throw InvalidInput("evaluating an empty solution");
  if (out.size() != dim_) throw DimensionMismatch("dense output buffer has wrong size");
  const double tb = times_.front(), te = times_.back();
  // Tolerate last-bit overshoot from callers computing grid times.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max({1.0, std::abs(tb), std::abs(te)});
  if (t < tb - slack || t > te + slack) {
    std::ostringstream os;
    os << "time " << t << " outside solution range [" << tb << ", " << te << "]";
    throw InvalidInput(os.str());
  }
  if (t >= te) {
    std::copy(final_.begin(), final_.end(), out.begin());
    return;
  }
  if (t <= tb) {
    std::copy(initial_.begin(), initial_.end(), out.begin());
    return;
  }
  if (!dense_) throw InvalidInput("solution was computed without dense output");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t step = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double h = times_[step + 1] - times_[step];
  const double theta = (t - times_[step]) / h;
  const double theta1 = 1.0 - theta;
  const double* r = coeffs_.data() + 5 * dim_ * step;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double r1 = r[i], r2 = r[dim_ + i], r3 = r[2 * dim_ + i], r4 = r[3 * dim_ + i],
                 r5 = r[4 * dim_ + i];
    out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
}

void DenseSolution::append(const DenseSolution& next) {
  if (times_.empty()) {
    *this = next;
    return;
  }
  if (next.dim_ != dim_) throw DimensionMismatch("appending solution of other dimension");
  if (next.times_.front() != times_.back())
    throw InvalidInput("appended solution must start where this one ends");
  dense_ = dense_ && next.dense_;
  times_.insert(times_.end(), next.times_.begin() + 1, next.times_.end());
  coeffs_.insert(coeffs_.end(), next.coeffs_.begin(), next.coeffs_.end());
  final_ = next.final_;
}

DenseSolution integrate_ivp(const VectorField& rhs, std::span<const double> y0, double t0,
                            double t1, const IntegratorConfig& config) {
  config.validate();
  if (!(t1 > t0)) throw InvalidInput("integrate_ivp requires t1 > t0");
  if (!all_finite(y0)) throw InvalidInput("integrate_ivp: non-finite initial state");
  const std::size_t n = y0.size();
  const double rtol = std::max(proportional(config.rel_tol),
                              4.0 * std::numeric_limits<double>::epsilon());
  const double atol = proportional(config.abs_tol);
  const double hmax = std::min(config.max_step, t1 - t0);

  DenseSolution sol;
  sol.dim_ = n;
  sol.dense_ = config.dense_output;
  sol.initial_.assign(y0.begin(), y0.end());
  sol.times_.push_back(t0);

  Workspace ws(n);
  std::vector<double> y(y0.begin(), y0.end());
  rhs(t0, y, ws.k1);
  if (!all_finite(ws.k1)) fail("non-finite right-hand side value", t0);

  double t = t0;
  double h = initial_step(rhs, t0, y, ws.k1, hmax, rtol, atol);
  double facold = 1e-4;
  bool last_rejected = false;
  int nonfinite_streak = 0;
  std::size_t steps = 0;
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

  while (t < t1) {
    if (++steps > config.max_steps) fail("integrator step budget exhausted", t);
    if (0.1 * std::abs(h) <= std::abs(t) * std::numeric_limits<double>::epsilon() ||
        h < 1e3 * std::numeric_limits<double>::min())
      fail("integrator step size underflow", t);
    // Step through the actual endpoint difference so replay_steps, which
    // only sees the endpoints, uses the identical h.
    const double t_next = t + 1.01 * h >= t1 ? t1 : t + h;
    h = t_next - t;
    dopri_step(rhs, t, y, h, ws);
    const double err = error_norm(y, ws, h, rtol, atol);
    if (!std::isfinite(err) || !all_finite(ws.y1) || !all_finite(ws.k7)) {
      if (++nonfinite_streak > 60) fail("non-finite right-hand side value", t);
      h *= 0.2;
      last_rejected = true;
      continue;
    }
    nonfinite_streak = 0;
    const double fac11 = std::pow(err, expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    double hnew = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      if (config.dense_output) {
        const std::size_t base = sol.coeffs_.size();
        sol.coeffs_.resize(base + 5 * n);
        double* r = sol.coeffs_.data() + base;
        for (std::size_t i = 0; i < n; ++i) {
          const double ydiff = ws.y1[i] - y[i];
          const double bspl = h * ws.k1[i] - ydiff;
          r[i] = y[i];
          r[n + i] = ydiff;
          r[2 * n + i] = bspl;
          r[3 * n + i] = ydiff - h * ws.k7[i] - bspl;
          r[4 * n + i] = h * (d1 * ws.k1[i] + d3 * ws.k3[i] + d4 * ws.k4[i] + d5 * ws.k5[i] +
                              d6 * ws.k6[i] + d7 * ws.k7[i]);
        }
      }
      y.swap(ws.y1);
      std::swap(ws.k1, ws.k7);
      t = t_next;
      sol.times_.push_back(t);
      if (std::abs(hnew) > hmax) hnew = hmax;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      hnew = h / std::min(facc1, fac11 / safe);
      last_rejected = true;
      h = hnew;
    }
  }
  sol.final_ = std::move(y);
  return sol;
}

std::vector<double> replay_steps(const VectorField& rhs, std::span<const double> y0,
                                 std::span<const double> times) {
  if (times.size() < 2) return {y0.begin(), y0.end()};
  Workspace ws(y0.size());
  std::vector<double> y(y0.begin(), y0.end());
  rhs(times[0], y, ws.k1);
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double h = times[s + 1] - times[s];
    dopri_step(rhs, times[s], y, h, ws);
    y.swap(ws.y1);
    std::swap(ws.k1, ws.k7);
  }
  if (!all_finite(y)) fail("non-finite state during step replay", times.back());
  return y;
}

}  // namespace adgame::numerics
