#pragma once

// Per-element reference formulas. The SIMD variants reproduce these
// operation by operation; the scalar table and every SIMD tail call them.

#include <cmath>
#include <cstddef>

#include "adgame/kernels.hpp"

namespace adgame::kernels::ref {

constexpr double inv_sqrt2 = 0.70710678118654752440;

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

inline void steady_shares(const VersusNontargeted& p, double b, double u, double& s1,
                          double& s2) {
  const double a = p.rho1 * u;
  const double w = p.sigma1 * std::sqrt(clamp0(p.B1 - u * u));
  const double ab_c2 = (a + b) + p.c2;
  s1 = (p.m * (w * (a + p.c2) + a * b)) / (ab_c2 * ((w + b) + p.c1));
  s2 = (p.m * b) / ab_c2;
}

inline double dominance_margin(double c, double u) {
  const double root = std::sqrt(clamp0(1.0 - u * u));
  return root * ((c + u) - inv_sqrt2) + inv_sqrt2 * ((u - c) - inv_sqrt2);
}

inline double tier_potential(double c1, double c_sum, double c2, double u) {
  const double num = c1 * (c2 + u);
  const double den = (c_sum + (u + u)) * std::sqrt(clamp0(1.0 - u * u)) + num;
  return num / den;
}

inline double allocation_fraction(double rho, double sigma, double X) {
  const double rx = rho * X;
  const double sx = sigma * (1.0 - X);
  return (rx * rx) / (sx * sx + rx * rx);
}

inline double rate(const RateArgs& p, double n_minus_eps, double u) {
  const double v = std::sqrt(clamp0(p.B - u * u));
  return ((p.sigma * v) * p.epsilon + (p.rho * u) * n_minus_eps) - p.loss;
}

inline double duopoly_max_real_eig(double a1, double b1, double a2, double b2, double c1,
                                   double c2) {
  const double U = a1 + a2;
  const double V = b1 + b2;
  const double S = ((c1 + c2) + U) + V;
  const double D = c1 - c2;
  const double w = ((a1 - a2) - b1) + b2;
  const double UmV = U - V;
  const double d = (D * D - (D + D) * w) + UmV * UmV;
  return d >= 0.0 ? -0.5 * (S - std::sqrt(d)) : -0.5 * S;
}

}  // namespace adgame::kernels::ref
