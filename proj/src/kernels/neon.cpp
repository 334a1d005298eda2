#include "formulas.hpp"
#include "tables.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace adgame::kernels {

namespace {

inline float64x2_t clamp0(float64x2_t x) {
  // vmaxq_f64 propagates NaN; the scalar reference maps NaN to 0, so select.
  return vbslq_f64(vcgtq_f64(x, vdupq_n_f64(0.0)), x, vdupq_n_f64(0.0));
}

void steady_shares_neon(const VersusNontargeted& p, std::size_t n, const double* u1, double* s1,
                        double* s2) {
  const double b_s = p.rho2 * std::sqrt(p.B2 * 0.5);
  const float64x2_t b = vdupq_n_f64(b_s), rho1 = vdupq_n_f64(p.rho1),
                    sigma1 = vdupq_n_f64(p.sigma1), B1 = vdupq_n_f64(p.B1),
                    c1 = vdupq_n_f64(p.c1), c2 = vdupq_n_f64(p.c2), m = vdupq_n_f64(p.m);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t u = vld1q_f64(u1 + i);
    const float64x2_t a = vmulq_f64(rho1, u);
    const float64x2_t w = vmulq_f64(sigma1, vsqrtq_f64(clamp0(vsubq_f64(B1, vmulq_f64(u, u)))));
    const float64x2_t ab_c2 = vaddq_f64(vaddq_f64(a, b), c2);
    const float64x2_t num =
        vmulq_f64(m, vaddq_f64(vmulq_f64(w, vaddq_f64(a, c2)), vmulq_f64(a, b)));
    const float64x2_t den = vmulq_f64(ab_c2, vaddq_f64(vaddq_f64(w, b), c1));
    vst1q_f64(s1 + i, vdivq_f64(num, den));
    vst1q_f64(s2 + i, vdivq_f64(vmulq_f64(m, b), ab_c2));
  }
  for (; i < n; ++i) ref::steady_shares(p, b_s, u1[i], s1[i], s2[i]);
}

void dominance_margin_neon(std::size_t n, const double* c, const double* u1, double* out) {
  const float64x2_t one = vdupq_n_f64(1.0), k = vdupq_n_f64(ref::inv_sqrt2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t cv = vld1q_f64(c + i), u = vld1q_f64(u1 + i);
    const float64x2_t root = vsqrtq_f64(clamp0(vsubq_f64(one, vmulq_f64(u, u))));
    const float64x2_t lhs = vmulq_f64(root, vsubq_f64(vaddq_f64(cv, u), k));
    const float64x2_t rhs = vmulq_f64(k, vsubq_f64(vsubq_f64(u, cv), k));
    vst1q_f64(out + i, vaddq_f64(lhs, rhs));
  }
  for (; i < n; ++i) out[i] = ref::dominance_margin(c[i], u1[i]);
}

void tier_potential_neon(double c1_s, double c2_s, std::size_t n, const double* u1, double* eps) {
  const double c_sum_s = c1_s + c2_s;
  const float64x2_t one = vdupq_n_f64(1.0), c1 = vdupq_n_f64(c1_s), c2 = vdupq_n_f64(c2_s),
                    c_sum = vdupq_n_f64(c_sum_s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t u = vld1q_f64(u1 + i);
    const float64x2_t num = vmulq_f64(c1, vaddq_f64(c2, u));
    const float64x2_t root = vsqrtq_f64(clamp0(vsubq_f64(one, vmulq_f64(u, u))));
    const float64x2_t den = vaddq_f64(vmulq_f64(vaddq_f64(c_sum, vaddq_f64(u, u)), root), num);
    vst1q_f64(eps + i, vdivq_f64(num, den));
  }
  for (; i < n; ++i) eps[i] = ref::tier_potential(c1_s, c_sum_s, c2_s, u1[i]);
}

void allocation_fraction_neon(std::size_t n, const double* rho, const double* sigma,
                              const double* X, double* fraction) {
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(X + i);
    const float64x2_t rx = vmulq_f64(vld1q_f64(rho + i), x);
    const float64x2_t sx = vmulq_f64(vld1q_f64(sigma + i), vsubq_f64(one, x));
    const float64x2_t rx2 = vmulq_f64(rx, rx);
    vst1q_f64(fraction + i, vdivq_f64(rx2, vaddq_f64(vmulq_f64(sx, sx), rx2)));
  }
  for (; i < n; ++i) fraction[i] = ref::allocation_fraction(rho[i], sigma[i], X[i]);
}

void rate_scan_neon(const RateArgs& p, std::size_t n, const double* u, double* rate) {
  const double nme_s = p.N - p.epsilon;
  const float64x2_t B = vdupq_n_f64(p.B), sigma = vdupq_n_f64(p.sigma), rho = vdupq_n_f64(p.rho),
                    eps = vdupq_n_f64(p.epsilon), nme = vdupq_n_f64(nme_s),
                    loss = vdupq_n_f64(p.loss);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t uv = vld1q_f64(u + i);
    const float64x2_t v = vsqrtq_f64(clamp0(vsubq_f64(B, vmulq_f64(uv, uv))));
    const float64x2_t gain =
        vaddq_f64(vmulq_f64(vmulq_f64(sigma, v), eps), vmulq_f64(vmulq_f64(rho, uv), nme));
    vst1q_f64(rate + i, vsubq_f64(gain, loss));
  }
  for (; i < n; ++i) rate[i] = ref::rate(p, nme_s, u[i]);
}

void duopoly_max_real_eig_neon(std::size_t n, const double* a1, const double* b1,
                               const double* a2, const double* b2, const double* c1,
                               const double* c2, double* out) {
  const float64x2_t half = vdupq_n_f64(-0.5), zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t A1 = vld1q_f64(a1 + i), B1 = vld1q_f64(b1 + i), A2 = vld1q_f64(a2 + i),
                      B2 = vld1q_f64(b2 + i), C1 = vld1q_f64(c1 + i), C2 = vld1q_f64(c2 + i);
    const float64x2_t U = vaddq_f64(A1, A2);
    const float64x2_t V = vaddq_f64(B1, B2);
    const float64x2_t S = vaddq_f64(vaddq_f64(vaddq_f64(C1, C2), U), V);
    const float64x2_t D = vsubq_f64(C1, C2);
    const float64x2_t w = vaddq_f64(vsubq_f64(vsubq_f64(A1, A2), B1), B2);
    const float64x2_t UmV = vsubq_f64(U, V);
    const float64x2_t d = vaddq_f64(vsubq_f64(vmulq_f64(D, D), vmulq_f64(vaddq_f64(D, D), w)),
                                    vmulq_f64(UmV, UmV));
    const float64x2_t real_root = vmulq_f64(half, vsubq_f64(S, vsqrtq_f64(d)));
    const float64x2_t complex_pair = vmulq_f64(half, S);
    vst1q_f64(out + i, vbslq_f64(vcgeq_f64(d, zero), real_root, complex_pair));
  }
  for (; i < n; ++i) out[i] = ref::duopoly_max_real_eig(a1[i], b1[i], a2[i], b2[i], c1[i], c2[i]);
}

}  // namespace

const Table neon_table{steady_shares_neon,      dominance_margin_neon,
                       tier_potential_neon,     allocation_fraction_neon,
                       rate_scan_neon,          duopoly_max_real_eig_neon};

}  // namespace adgame::kernels

#endif
