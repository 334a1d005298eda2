#include "adgame/numerics/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "adgame/error.hpp"

namespace adgame::numerics {

namespace {

constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                    std::size_t& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * wgk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double f1 = f(center - dx), f2 = f(center + dx);
    kronrod += wgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
  }
  evals += 15;
  const double value = kronrod * half;
  const double error = std::abs((kronrod - gauss) * half);
  if (!std::isfinite(value)) throw NumericalFailure("quadrature: non-finite integrand");
  return {a, b, value, error};
}

}  // namespace

QuadratureResult quadrature(const std::function<double(double)>& f, double a, double b,
                            std::span<const double> breakpoints, const QuadratureConfig& config) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("quadrature: infinite limits");
  if (a == b) return {};
  if (b < a) {
    auto r = quadrature(f, b, a, breakpoints, config);
    r.value = -r.value;
    return r;
  }
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult out;
  std::priority_queue<Piece> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Piece p = gauss_kronrod(f, cuts[i], cuts[i + 1], out.evaluations);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  auto target = [&] { return std::max(config.abs_tol, config.rel_tol * std::abs(total)); };
  while (total_err > target()) {
    if (heap.size() >= config.max_intervals)
      throw NumericalFailure("quadrature: interval budget exhausted before reaching tolerance");
    Piece worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot subdivide further
    heap.pop();
    Piece left = gauss_kronrod(f, worst.a, mid, out.evaluations);
    Piece right = gauss_kronrod(f, mid, worst.b, out.evaluations);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the pieces so the result does not carry update roundoff.
  total = 0.0;
  total_err = 0.0;
  std::vector<Piece> pieces;
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  for (const auto& p : pieces) {
    total += p.value;
    total_err += p.error;
  }
  if (total_err > target() && total_err > 1e3 * std::numeric_limits<double>::epsilon() *
                                              std::abs(total))
    throw NumericalFailure("quadrature: failed to converge below tolerance");
  out.value = total;
  out.error_estimate = total_err;
  return out;
}

}  // namespace adgame::numerics
