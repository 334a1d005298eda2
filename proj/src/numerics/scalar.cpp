#include "adgame/numerics/scalar.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "adgame/error.hpp"

namespace adgame::numerics {

namespace {

double checked(const ScalarFunction& f, double x, std::size_t& evals) {
  const double y = f(x);
  ++evals;
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "non-finite function value at x=" << x;
    throw NumericalFailure(os.str());
  }
  return y;
}

}  // namespace

double find_root_bracketed(const ScalarFunction& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("root tolerance must be positive");
  std::size_t evals = 0;
  double a = lo, b = hi;
  double fa = checked(f, a, evals), fb = checked(f, b, evals);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]";
    throw InvalidInput(os.str());
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol * 1e-6) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = checked(f, b, evals);
  }
  throw NumericalFailure("root finder did not converge in 200 iterations");
}

ScalarMinimum minimize_scalar_bounded(const ScalarFunction& f, double lo, double hi,
                                      double tol) {
  if (!(hi > lo)) throw InvalidInput("minimization interval must satisfy lo < hi");
  if (!(tol > 0.0)) throw InvalidInput("minimization tolerance must be positive");
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  std::size_t evals = 0;
  double a = lo, b = hi;
  double v = a + golden * (b - a), w = v, x = v;
  double e = 0.0, d = 0.0;
  double fx = checked(f, x, evals), fv = fx, fw = fx;
  for (int iter = 0; iter < 500; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = sqrt_eps * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x))) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = checked(f, u, evals);
    if (fu <= fx) {
      (u >= x ? a : b) = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

ScalarMinimum minimize_scalar_global(const ScalarFunction& f, double lo, double hi, double tol,
                                     std::size_t grid_points) {
  if (!(hi > lo)) throw InvalidInput("minimization interval must satisfy lo < hi");
  if (grid_points < 3) throw InvalidInput("grid pre-scan needs at least 3 points");
  std::size_t evals = 0;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
    const double y = checked(f, x, evals);
    if (y < best_value) {
      best_value = y;
      best = i;
    }
  }
  const auto node = [&](std::size_t i) {
    return i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
  };
  ScalarMinimum out{node(best), best_value, 0};
  const double a = node(best == 0 ? 0 : best - 1);
  const double b = node(best + 1 == grid_points ? best : best + 1);
  const ScalarMinimum local = minimize_scalar_bounded(f, a, b, tol);
  evals += local.evaluations;
  if (local.value < out.value) out = local;
  out.evaluations = evals;
  return out;
}

}  // namespace adgame::numerics
